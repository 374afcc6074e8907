#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "rankanneal/evaluator.hpp"
#include "rankanneal/letor.hpp"
#include "rankanneal/subset.hpp"
#include "rankanneal/sweep.hpp"
#include "rankanneal/synthetic.hpp"
#include "rankanneal/util.hpp"

namespace {

using namespace rankanneal;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct SweepCliOptions {
  std::string config_file;
  std::string data_dir;
  std::string algo = "sa";
  std::string setting;
  std::string neighborhood = "swap";
  std::string scheme = "fast";
  double t0 = 0.05;
  double alpha = 0.9;
  int log_offset = 10;
  int repeats = 10;
  std::string k_spec;
  std::uint64_t seed = 0;
  std::string out;
  std::string guide_metric = "ndcg";
  int ndcg_k = 10;
  int map_cutoff = 0;
  std::string guide_split = "validation";
  bool skip_zero_idcg = false;
  std::string ranker = "coordinate_ascent";
  int ca_rounds = 4;
  int accept_quota = 10;
  int max_steps_per_temp = 50;
  int progress = 25;
  double t_min = 1e-4;
  bool hill_climb = false;
  bool calibrate_t0 = false;
  int beam_width = 10;
  std::size_t lbs_steps = 0;
  bool full_expansion = false;
  double budget_c = 2.0;
  std::size_t budget_cap = 1000;
  std::size_t budget = 0;
  int jobs = 1;
  bool no_resume = false;
  std::string cache_file;
  std::string trace_dir;
};

SweepConfig to_sweep_config(const SweepCliOptions& opt) {
  if (opt.data_dir.empty())
    throw std::invalid_argument("--data is required (flag or config file)");
  if (opt.out.empty())
    throw std::invalid_argument("--out is required (flag or config file)");
  SweepConfig cfg;
  cfg.data_dir = opt.data_dir;
  cfg.algo = algo_from_string(opt.algo);
  if (!opt.setting.empty()) {
    const Setting s = parse_setting(opt.setting);
    cfg.neighborhood = s.neighborhood;
    cfg.scheme.kind = s.scheme;
  } else {
    cfg.neighborhood = neighborhood_from_string(opt.neighborhood);
    cfg.scheme.kind = scheme_from_string(opt.scheme);
  }
  cfg.scheme.t0 = opt.t0;
  cfg.scheme.alpha = opt.alpha;
  cfg.scheme.log_offset = opt.log_offset;
  cfg.repeats = opt.repeats;
  if (!opt.k_spec.empty()) cfg.ks = parse_k_list(opt.k_spec);
  cfg.eval.guide_metric =
      opt.guide_metric == "map" ? GuideMetric::map : GuideMetric::ndcg;
  if (opt.guide_metric != "map" && opt.guide_metric != "ndcg")
    throw std::invalid_argument("guide metric must be ndcg or map");
  cfg.eval.ndcg_k = opt.ndcg_k;
  cfg.eval.map_cutoff = opt.map_cutoff;
  if (opt.guide_split == "validation")
    cfg.eval.guide_split = GuideSplit::validation;
  else if (opt.guide_split == "test")
    cfg.eval.guide_split = GuideSplit::test;
  else
    throw std::invalid_argument("guide split must be validation or test");
  cfg.eval.zero_idcg = opt.skip_zero_idcg ? ZeroIdcgPolicy::skip
                                          : ZeroIdcgPolicy::count_as_zero;
  cfg.eval.seed = opt.seed;
  if (opt.ranker == "coordinate_ascent")
    cfg.eval.ranker = RankerKind::coordinate_ascent;
  else if (opt.ranker == "synthetic")
    cfg.eval.ranker = RankerKind::synthetic;
  else
    throw std::invalid_argument("ranker must be coordinate_ascent or synthetic");
  cfg.eval.ca.max_rounds = opt.ca_rounds;
  cfg.accept_quota = opt.accept_quota;
  cfg.max_steps_per_temp = opt.max_steps_per_temp;
  cfg.progress_threshold = opt.progress;
  cfg.t_min = opt.t_min;
  cfg.hill_climb = opt.hill_climb;
  cfg.calibrate_t0 = opt.calibrate_t0;
  cfg.beam_width = opt.beam_width;
  cfg.lbs_steps = opt.lbs_steps;
  cfg.full_expansion = opt.full_expansion;
  cfg.budget_c = opt.budget_c;
  cfg.budget_cap = opt.budget_cap;
  cfg.budget_override = opt.budget;
  cfg.base_seed = opt.seed;
  cfg.jobs = opt.jobs;
  cfg.resume = !opt.no_resume;
  cfg.out = opt.out;
  cfg.cache_file = opt.cache_file;
  return cfg;
}

// Flat "key = value" TOML-style text or a JSON object; keys match the long
// option names. Values given on the command line win over file values.
void apply_config_file(const CLI::App* cmd, SweepCliOptions& opt) {
  if (opt.config_file.empty()) return;
  std::ifstream in(opt.config_file);
  if (!in) throw DataError("cannot read config file: " + opt.config_file);

  std::map<std::string, std::string> values;
  char first = 0;
  in >> std::ws;
  in.get(first);
  in.unget();
  if (first == '{') {
    const nlohmann::json doc = nlohmann::json::parse(in);
    for (const auto& [key, value] : doc.items())
      values[key] = value.is_string() ? value.get<std::string>() : value.dump();
  } else {
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.resize(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\"");
        const auto b = s.find_last_not_of(" \t\r\"");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!key.empty()) values[key] = value;
    }
  }

  const auto as_flag = [](const std::string& v) {
    return v == "true" || v == "1" || v == "yes";
  };
  const std::map<std::string, std::function<void(const std::string&)>> apply = {
      {"data", [&](const std::string& v) { opt.data_dir = v; }},
      {"algo", [&](const std::string& v) { opt.algo = v; }},
      {"setting", [&](const std::string& v) { opt.setting = v; }},
      {"neighborhood", [&](const std::string& v) { opt.neighborhood = v; }},
      {"scheme", [&](const std::string& v) { opt.scheme = v; }},
      {"t0", [&](const std::string& v) { opt.t0 = parse_double(v); }},
      {"alpha", [&](const std::string& v) { opt.alpha = parse_double(v); }},
      {"log-offset", [&](const std::string& v) { opt.log_offset = (int)parse_int(v); }},
      {"repeats", [&](const std::string& v) { opt.repeats = (int)parse_int(v); }},
      {"k", [&](const std::string& v) { opt.k_spec = v; }},
      {"seed", [&](const std::string& v) { opt.seed = (std::uint64_t)parse_int(v); }},
      {"out", [&](const std::string& v) { opt.out = v; }},
      {"guide-metric", [&](const std::string& v) { opt.guide_metric = v; }},
      {"ndcg-k", [&](const std::string& v) { opt.ndcg_k = (int)parse_int(v); }},
      {"map-cutoff", [&](const std::string& v) { opt.map_cutoff = (int)parse_int(v); }},
      {"guide-split", [&](const std::string& v) { opt.guide_split = v; }},
      {"skip-zero-idcg", [&](const std::string& v) { opt.skip_zero_idcg = as_flag(v); }},
      {"ranker", [&](const std::string& v) { opt.ranker = v; }},
      {"ca-rounds", [&](const std::string& v) { opt.ca_rounds = (int)parse_int(v); }},
      {"accept-quota", [&](const std::string& v) { opt.accept_quota = (int)parse_int(v); }},
      {"max-steps-per-temp",
       [&](const std::string& v) { opt.max_steps_per_temp = (int)parse_int(v); }},
      {"progress", [&](const std::string& v) { opt.progress = (int)parse_int(v); }},
      {"t-min", [&](const std::string& v) { opt.t_min = parse_double(v); }},
      {"hill-climb", [&](const std::string& v) { opt.hill_climb = as_flag(v); }},
      {"calibrate-t0", [&](const std::string& v) { opt.calibrate_t0 = as_flag(v); }},
      {"beam-width", [&](const std::string& v) { opt.beam_width = (int)parse_int(v); }},
      {"lbs-steps", [&](const std::string& v) { opt.lbs_steps = (std::size_t)parse_int(v); }},
      {"full-expansion", [&](const std::string& v) { opt.full_expansion = as_flag(v); }},
      {"budget-c", [&](const std::string& v) { opt.budget_c = parse_double(v); }},
      {"budget-cap", [&](const std::string& v) { opt.budget_cap = (std::size_t)parse_int(v); }},
      {"budget", [&](const std::string& v) { opt.budget = (std::size_t)parse_int(v); }},
      {"jobs", [&](const std::string& v) { opt.jobs = (int)parse_int(v); }},
      {"no-resume", [&](const std::string& v) { opt.no_resume = as_flag(v); }},
      {"cache", [&](const std::string& v) { opt.cache_file = v; }},
      {"trace-dir", [&](const std::string& v) { opt.trace_dir = v; }},
  };
  for (const auto& [key, value] : values) {
    const auto it = apply.find(key);
    if (it == apply.end())
      throw std::invalid_argument("unknown config key: " + key);
    if (cmd->count("--" + key) > 0) continue;  // command line wins
    it->second(value);
  }
}

void add_sweep_flags(CLI::App* cmd, SweepCliOptions& opt) {
  cmd->add_option("--config", opt.config_file,
                  "TOML-style or JSON config file; flags override");
  cmd->add_option("--data", opt.data_dir, "Fold directory (train.txt/vali.txt/test.txt)");
  cmd->add_option("--algo", opt.algo, "Search algorithm: sa | lbs");
  cmd->add_option("--setting", opt.setting,
                  "Named setting n1s1..n2s3 (overrides --neighborhood/--scheme)");
  cmd->add_option("--neighborhood", opt.neighborhood, "swap | insertion");
  cmd->add_option("--scheme", opt.scheme, "geometric | logarithmic | fast");
  cmd->add_option("--t0", opt.t0, "Initial temperature");
  cmd->add_option("--alpha", opt.alpha, "Geometric cool-down factor");
  cmd->add_option("--log-offset", opt.log_offset, "Logarithmic schedule offset");
  cmd->add_option("--repeats", opt.repeats, "Runs per k");
  cmd->add_option("--k", opt.k_spec, "k values: 'lo..hi' or 'a,b,c' (default 1..n-1)");
  cmd->add_option("--seed", opt.seed, "Base seed; per-run seeds derive from it");
  cmd->add_option("--out", opt.out, "Results CSV path");
  cmd->add_option("--guide-metric", opt.guide_metric, "ndcg | map");
  cmd->add_option("--ndcg-k", opt.ndcg_k, "NDCG cutoff");
  cmd->add_option("--map-cutoff", opt.map_cutoff, "MAP cutoff (0 = untruncated)");
  cmd->add_option("--guide-split", opt.guide_split,
                  "Split steering the search: validation | test");
  cmd->add_flag("--skip-zero-idcg", opt.skip_zero_idcg,
                "Skip queries with no relevant documents instead of scoring 0");
  cmd->add_option("--ranker", opt.ranker, "coordinate_ascent | synthetic");
  cmd->add_option("--ca-rounds", opt.ca_rounds, "Coordinate-ascent passes");
  cmd->add_option("--accept-quota", opt.accept_quota,
                  "Accepted moves per temperature before cooling");
  cmd->add_option("--max-steps-per-temp", opt.max_steps_per_temp,
                  "Step cap per temperature");
  cmd->add_option("--progress", opt.progress,
                  "Stagnant iterations before restarting from best (0 = off)");
  cmd->add_option("--t-min", opt.t_min, "Temperature floor");
  cmd->add_flag("--hill-climb", opt.hill_climb, "Reject all non-improving moves");
  cmd->add_flag("--calibrate-t0", opt.calibrate_t0,
                "Sample transitions to pick t0 (consumes budget)");
  cmd->add_option("--beam-width", opt.beam_width, "LBS beam width");
  cmd->add_option("--lbs-steps", opt.lbs_steps, "LBS steps (0 = match SA budget)");
  cmd->add_flag("--full-expansion", opt.full_expansion,
                "LBS: expand all neighbors instead of drawing one");
  cmd->add_option("--budget-c", opt.budget_c, "Budget multiplier c in c*k*(n-k)");
  cmd->add_option("--budget-cap", opt.budget_cap, "Budget hard cap");
  cmd->add_option("--budget", opt.budget, "Fixed budget (overrides c/cap)");
  cmd->add_option("--jobs", opt.jobs, "Parallel (k, repeat) workers");
  cmd->add_flag("--no-resume", opt.no_resume, "Ignore the existing run store");
  cmd->add_option("--cache", opt.cache_file, "Evaluator cache file to load/save");
  cmd->add_option("--trace-dir", opt.trace_dir, "Write per-run trace CSVs here");
}

int do_sweep(const SweepCliOptions& opt) {
  const SweepConfig cfg = to_sweep_config(opt);
  const SweepResult result = run_sweep(cfg);
  if (!opt.trace_dir.empty()) {
    std::filesystem::create_directories(opt.trace_dir);
    for (const RunSummary& run : result.runs) {
      const auto path = std::filesystem::path(opt.trace_dir) /
                        ("trace_k" + std::to_string(run.k) + "_r" +
                         std::to_string(run.repeat) + ".csv");
      std::ofstream out(path);
      write_trace_csv(run.trace, out);
    }
  }
  std::cout << "wrote " << result.rows.size() << " rows to " << opt.out;
  if (result.resumed > 0) std::cout << " (" << result.resumed << " runs resumed)";
  std::cout << "\ntotal wall time: " << fmt_double(result.total_wall_ms / 1000.0)
            << " s\n";
  return kExitOk;
}

int do_synth(int n, int queries, std::uint64_t seed, int docs_per_query,
             int informative, const std::string& out_dir) {
  SyntheticCorpusSpec spec;
  spec.n_features = n;
  spec.queries = queries;
  spec.seed = seed;
  spec.docs_per_query = docs_per_query;
  spec.informative = informative;
  const SyntheticCorpus corpus = make_synthetic(spec);
  write_synthetic_dir(corpus, out_dir);
  std::cout << "wrote synthetic fold (n=" << n << ", queries=" << queries
            << ") to " << out_dir << "\nplanted features:";
  for (int f : corpus.planted) std::cout << ' ' << f;
  std::cout << '\n';
  return kExitOk;
}

int do_eval(const std::string& data_dir, const std::string& subset_hex,
            const std::string& guide_metric, int ndcg_k, int map_cutoff,
            const std::string& guide_split, std::uint64_t seed) {
  EvaluatorConfig cfg;
  cfg.guide_metric = guide_metric == "map" ? GuideMetric::map : GuideMetric::ndcg;
  cfg.ndcg_k = ndcg_k;
  cfg.map_cutoff = map_cutoff;
  cfg.guide_split =
      guide_split == "test" ? GuideSplit::test : GuideSplit::validation;
  cfg.seed = seed;
  const FoldData folds = load_split_dir(data_dir);
  const Evaluator evaluator(folds, cfg);
  const auto n = evaluator.n_features();
  const FeatureSubset subset = subset_hex == "all"
                                   ? FeatureSubset::all_features(n)
                                   : FeatureSubset::from_hex(subset_hex, n);
  const ScoreCard card = evaluator.evaluate(subset);
  std::cout << "subset=" << subset.to_hex() << " k=" << subset.count() << "/"
            << n << '\n'
            << "guide_score=" << fmt_double(card.guide_score) << " ("
            << to_string(cfg.guide_metric) << " on "
            << to_string(cfg.guide_split) << ")\n"
            << "test_ndcg10=" << fmt_double(card.test_ndcg10) << '\n'
            << "test_map=" << fmt_double(card.test_map) << '\n'
            << "train_ms=" << fmt_double(card.train_ms) << '\n';
  return kExitOk;
}

double timing_total_from_sidecar(const std::filesystem::path& results_csv) {
  std::filesystem::path sidecar = results_csv;
  sidecar += ".timing.csv";
  std::ifstream in(sidecar);
  if (!in) return 0.0;
  double total = 0.0;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() == 4)
      total += parse_double(fields[2]) * static_cast<double>(parse_int(fields[3]));
  }
  return total;
}

int do_compare(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<SweepTable> tables;
  for (const auto& input : inputs) {
    SweepTable table;
    table.rows = read_sweep_csv(input);
    if (table.rows.empty()) throw DataError("no rows in " + input);
    const auto& first = table.rows.front();
    table.label = first.algorithm + "-" + first.neighborhood;
    if (first.scheme != "-") table.label += "-" + first.scheme;
    table.total_wall_ms = timing_total_from_sidecar(input);
    for (const auto& existing : tables)
      if (existing.label == table.label) {
        table.label += "@" + std::filesystem::path(input).stem().string();
        break;
      }
    tables.push_back(std::move(table));
  }
  const CompareResult result = compare_settings(tables);

  const auto write_file = [](const std::filesystem::path& path,
                             const std::string& content) {
    std::ofstream stream(path);
    if (!stream) throw DataError("cannot write " + path.string());
    stream << content;
  };
  const std::filesystem::path wide_path(out);
  std::filesystem::path long_path = wide_path;
  long_path += ".long.csv";
  std::filesystem::path timing_path = wide_path;
  timing_path += ".timing.csv";
  write_file(wide_path, result.wide_csv);
  write_file(long_path, result.long_csv);
  write_file(timing_path, result.timing_csv);
  std::cout << "wrote " << wide_path.string() << ", " << long_path.string()
            << ", " << timing_path.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-anneal: metaheuristic feature selection for learning-to-rank"};
  app.require_subcommand(1);

  SweepCliOptions sweep_opt;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Run a k-sweep of SA or beam search");
  add_sweep_flags(sweep_cmd, sweep_opt);

  int synth_n = 12, synth_queries = 50, synth_docs = 20, synth_informative = 0;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic LETOR fold");
  synth_cmd->add_option("--n", synth_n, "Feature count");
  synth_cmd->add_option("--queries", synth_queries, "Total queries across splits");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--docs-per-query", synth_docs, "Documents per query");
  synth_cmd->add_option("--informative", synth_informative,
                        "Planted informative features (0 = n/3)");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string eval_data, eval_subset, eval_metric = "ndcg",
                          eval_split = "validation";
  int eval_ndcg_k = 10, eval_map_cutoff = 0;
  std::uint64_t eval_seed = 0;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score one feature subset on a fold");
  eval_cmd->add_option("--data", eval_data, "Fold directory")->required();
  eval_cmd->add_option("--subset", eval_subset, "Subset hex, or 'all'")->required();
  eval_cmd->add_option("--guide-metric", eval_metric, "ndcg | map");
  eval_cmd->add_option("--ndcg-k", eval_ndcg_k, "NDCG cutoff");
  eval_cmd->add_option("--map-cutoff", eval_map_cutoff, "MAP cutoff");
  eval_cmd->add_option("--guide-split", eval_split, "validation | test");
  eval_cmd->add_option("--seed", eval_seed, "Trainer seed");

  std::vector<std::string> compare_inputs;
  std::string compare_out = "grid.csv";
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Merge sweep CSVs into comparison grids");
  compare_cmd->add_option("inputs", compare_inputs, "Sweep result CSVs")
      ->required()
      ->expected(2, -1);
  compare_cmd->add_option("--out", compare_out, "Wide grid CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sweep_cmd->parsed()) {
      apply_config_file(sweep_cmd, sweep_opt);
      return do_sweep(sweep_opt);
    }
    if (synth_cmd->parsed())
      return do_synth(synth_n, synth_queries, synth_seed, synth_docs,
                      synth_informative, synth_out);
    if (eval_cmd->parsed())
      return do_eval(eval_data, eval_subset, eval_metric, eval_ndcg_k,
                     eval_map_cutoff, eval_split, eval_seed);
    if (compare_cmd->parsed()) return do_compare(compare_inputs, compare_out);
  } catch (const rankanneal::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
