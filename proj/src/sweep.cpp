#include "rankanneal/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "rankanneal/rng.hpp"
#include "rankanneal/synthetic.hpp"
#include "rankanneal/util.hpp"

namespace rankanneal {

namespace {

using nlohmann::json;

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 0x517cc1b727220a95ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i)
      h = SplitRng::mix(h, static_cast<unsigned char>(buf[i]) + (h << 1));
    if (!in) break;
  }
  return h;
}

json trace_to_json(const std::vector<TraceRow>& trace) {
  json arr = json::array();
  for (const auto& row : trace)
    arr.push_back({row.iteration, row.temperature, row.current_score,
                   row.best_score, row.accepted ? 1 : 0, row.restarted ? 1 : 0});
  return arr;
}

std::vector<TraceRow> trace_from_json(const json& arr) {
  std::vector<TraceRow> trace;
  trace.reserve(arr.size());
  for (const auto& row : arr) {
    trace.push_back({row.at(0).get<std::size_t>(), row.at(1).get<double>(),
                     row.at(2).get<double>(), row.at(3).get<double>(),
                     row.at(4).get<int>() != 0, row.at(5).get<int>() != 0});
  }
  return trace;
}

json summary_to_json(const RunSummary& run, std::uint64_t dataset_hash,
                     std::uint64_t config_hash) {
  json doc;
  doc["ds"] = dataset_hash;
  doc["cfg"] = config_hash;
  doc["k"] = run.k;
  doc["rep"] = run.repeat;
  doc["seed"] = run.seed;
  doc["subset"] = run.subset_hex;
  doc["guide"] = run.guide;
  doc["test"] = run.test_score;
  doc["ndcg10"] = run.test_ndcg10;
  doc["map"] = run.test_map;
  doc["evals"] = run.evaluations;
  doc["wall_ms"] = run.wall_ms;
  doc["trace"] = trace_to_json(run.trace);
  return doc;
}

RunSummary summary_from_json(const json& doc) {
  RunSummary run;
  run.k = doc.at("k").get<int>();
  run.repeat = doc.at("rep").get<int>();
  run.seed = doc.at("seed").get<std::uint64_t>();
  run.subset_hex = doc.at("subset").get<std::string>();
  run.guide = doc.at("guide").get<double>();
  run.test_score = doc.at("test").get<double>();
  run.test_ndcg10 = doc.at("ndcg10").get<double>();
  run.test_map = doc.at("map").get<double>();
  run.evaluations = doc.at("evals").get<std::size_t>();
  run.wall_ms = doc.at("wall_ms").get<double>();
  run.trace = trace_from_json(doc.at("trace"));
  return run;
}

double sample_stderr(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean =
      std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return stdev / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

std::string to_string(Algo algo) { return algo == Algo::sa ? "sa" : "lbs"; }

Algo algo_from_string(const std::string& name) {
  if (name == "sa") return Algo::sa;
  if (name == "lbs") return Algo::lbs;
  throw std::invalid_argument("unknown algorithm: " + name);
}

Setting parse_setting(const std::string& name) {
  if (name.size() != 4 || name[0] != 'n' || name[2] != 's')
    throw std::invalid_argument("setting must look like n1s3, got: " + name);
  Setting s{};
  switch (name[1]) {
    case '1': s.neighborhood = NeighborhoodKind::swap; break;
    case '2': s.neighborhood = NeighborhoodKind::insertion; break;
    default: throw std::invalid_argument("unknown neighborhood in " + name);
  }
  switch (name[3]) {
    case '1': s.scheme = CoolingScheme::Kind::geometric; break;
    case '2': s.scheme = CoolingScheme::Kind::logarithmic; break;
    case '3': s.scheme = CoolingScheme::Kind::fast; break;
    default: throw std::invalid_argument("unknown scheme in " + name);
  }
  return s;
}

std::string setting_name(NeighborhoodKind neighborhood,
                         CoolingScheme::Kind scheme) {
  std::string name = "n";
  name += neighborhood == NeighborhoodKind::swap ? '1' : '2';
  name += 's';
  switch (scheme) {
    case CoolingScheme::Kind::geometric: name += '1'; break;
    case CoolingScheme::Kind::logarithmic: name += '2'; break;
    case CoolingScheme::Kind::fast: name += '3'; break;
  }
  return name;
}

std::uint64_t SweepConfig::config_hash() const {
  std::uint64_t h = 0x73776565705f6331ULL;
  const auto mix = [&h](std::uint64_t v) { h = SplitRng::mix(h, v); };
  const auto mixd = [&](double v) { mix(std::bit_cast<std::uint64_t>(v)); };
  mix(static_cast<std::uint64_t>(algo));
  mix(static_cast<std::uint64_t>(neighborhood));
  mix(static_cast<std::uint64_t>(scheme.kind));
  mixd(scheme.t0);
  mixd(scheme.alpha);
  mix(static_cast<std::uint64_t>(scheme.log_offset));
  mix(eval.hash());
  mix(static_cast<std::uint64_t>(accept_quota));
  mix(static_cast<std::uint64_t>(max_steps_per_temp));
  mix(static_cast<std::uint64_t>(progress_threshold));
  mixd(t_min);
  mix(hill_climb ? 1 : 0);
  mix(calibrate_t0 ? 1 : 0);
  mix(static_cast<std::uint64_t>(beam_width));
  mix(lbs_steps);
  mix(full_expansion ? 1 : 0);
  mixd(budget_c);
  mix(budget_cap);
  mix(budget_override);
  mix(base_seed);
  return h;
}

std::string SweepConfig::setting_label() const {
  if (algo == Algo::lbs)
    return "lbs-" + std::string(neighborhood == NeighborhoodKind::swap ? "n1" : "n2");
  return "sa-" + setting_name(neighborhood, scheme.kind);
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = static_cast<int>(parse_int(text.substr(0, dots)));
    const int hi = static_cast<int>(parse_int(text.substr(dots + 2)));
    if (lo < 1 || hi < lo)
      throw std::invalid_argument("bad k range: " + text);
    for (int k = lo; k <= hi; ++k) ks.push_back(k);
    return ks;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos
                                           ? std::string::npos
                                           : comma - pos);
    if (item.empty()) throw std::invalid_argument("bad k list: " + text);
    const int k = static_cast<int>(parse_int(item));
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    ks.push_back(k);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

std::vector<RunSummary> read_run_store(const std::filesystem::path& path,
                                       std::uint64_t dataset_hash,
                                       std::uint64_t config_hash) {
  std::vector<RunSummary> runs;
  std::ifstream in(path);
  if (!in) return runs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) continue;  // torn tail line from an interrupt
    if (doc.value("ds", std::uint64_t{0}) != dataset_hash ||
        doc.value("cfg", std::uint64_t{0}) != config_hash)
      continue;
    runs.push_back(summary_from_json(doc));
  }
  return runs;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  // Data plane: LETOR folds for the trained ranker, a landscape file for the
  // closed-form one.
  std::unique_ptr<Evaluator> evaluator;
  std::uint64_t dataset_hash = 0;
  if (cfg.eval.ranker == RankerKind::synthetic) {
    const auto landscape_path = cfg.data_dir / "landscape.json";
    evaluator = std::make_unique<Evaluator>(load_landscape(landscape_path), cfg.eval);
    dataset_hash = file_hash(landscape_path);
  } else {
    evaluator = std::make_unique<Evaluator>(load_split_dir(cfg.data_dir), cfg.eval);
    dataset_hash = fold_content_hash(cfg.data_dir);
  }
  const auto n = evaluator->n_features();

  if (!cfg.cache_file.empty() && std::filesystem::exists(cfg.cache_file))
    evaluator->load_cache(cfg.cache_file);

  std::vector<int> ks = cfg.ks;
  if (ks.empty())
    for (int k = 1; k + 1 <= static_cast<int>(n); ++k) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks)
    if (k < 1 || k + 1 > static_cast<int>(n))
      throw std::invalid_argument("k=" + std::to_string(k) +
                                  " outside [1, n-1] for n=" + std::to_string(n));

  const std::uint64_t config_hash = cfg.config_hash();

  struct Cell {
    int k;
    int repeat;
  };
  std::vector<Cell> cells;
  std::vector<RunSummary> results(ks.size() * static_cast<std::size_t>(cfg.repeats));
  std::vector<char> done(results.size(), 0);

  const auto cell_index = [&](int k, int repeat) {
    const auto row = std::lower_bound(ks.begin(), ks.end(), k) - ks.begin();
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cfg.repeats) +
           static_cast<std::size_t>(repeat);
  };

  std::filesystem::path store_path;
  std::size_t resumed = 0;
  if (!cfg.out.empty()) {
    store_path = cfg.out;
    store_path += ".runs.jsonl";
    if (cfg.resume) {
      for (RunSummary& run : read_run_store(store_path, dataset_hash, config_hash)) {
        if (!std::binary_search(ks.begin(), ks.end(), run.k)) continue;
        if (run.repeat < 0 || run.repeat >= cfg.repeats) continue;
        const auto idx = cell_index(run.k, run.repeat);
        if (done[idx]) continue;
        results[idx] = std::move(run);
        done[idx] = 1;
        ++resumed;
      }
    }
  }

  for (int k : ks)
    for (int r = 0; r < cfg.repeats; ++r)
      if (!done[cell_index(k, r)]) cells.push_back({k, r});

  std::ofstream store;
  std::mutex store_mutex;
  if (!store_path.empty()) {
    store.open(store_path, std::ios::app);
    if (!store) throw DataError("cannot open run store: " + store_path.string());
  }

  const auto run_cell = [&](const Cell& cell) {
    const std::uint64_t seed =
        derive_seed(cfg.base_seed, static_cast<std::uint64_t>(cell.k),
                    static_cast<std::uint64_t>(cell.repeat));
    const std::size_t budget =
        cfg.budget_override > 0
            ? cfg.budget_override
            : default_budget(n, static_cast<std::size_t>(cell.k), cfg.budget_c,
                             cfg.budget_cap);
    RunRecord rec;
    if (cfg.algo == Algo::sa) {
      AnnealerConfig ac;
      ac.scheme = cfg.scheme;
      ac.neighborhood = cfg.neighborhood;
      ac.budget = budget;
      ac.accept_quota = cfg.accept_quota;
      ac.max_steps_per_temp = cfg.max_steps_per_temp;
      ac.progress_threshold = cfg.progress_threshold;
      ac.t_min = cfg.t_min;
      ac.seed = seed;
      ac.hill_climb = cfg.hill_climb;
      ac.calibrate_t0 = cfg.calibrate_t0;
      rec = anneal(static_cast<std::size_t>(cell.k), *evaluator, ac);
    } else {
      BeamConfig bc;
      bc.beam_width = cfg.beam_width;
      bc.steps = cfg.lbs_steps;
      bc.neighborhood = cfg.neighborhood;
      bc.seed = seed;
      bc.full_expansion = cfg.full_expansion;
      bc.budget_c = cfg.budget_c;
      bc.budget_cap = cfg.budget_cap;
      rec = beam_search(static_cast<std::size_t>(cell.k), *evaluator, bc);
    }
    RunSummary summary;
    summary.k = cell.k;
    summary.repeat = cell.repeat;
    summary.seed = seed;
    summary.subset_hex = rec.best_subset.to_hex();
    summary.guide = rec.best_guide_score;
    summary.test_score = rec.best_test_score;
    summary.test_ndcg10 = rec.best_test_ndcg10;
    summary.test_map = rec.best_test_map;
    summary.evaluations = rec.evaluations_used;
    summary.wall_ms = rec.wall_ms;
    summary.trace = std::move(rec.trace);

    if (store.is_open()) {
      const std::string line =
          summary_to_json(summary, dataset_hash, config_hash).dump();
      std::lock_guard lock(store_mutex);
      store << line << '\n';
      store.flush();  // keep the store valid if the sweep is interrupted
    }
    results[cell_index(cell.k, cell.repeat)] = std::move(summary);
  };

  const auto sweep_start = std::chrono::steady_clock::now();
  if (cfg.jobs == 1 || cells.size() <= 1) {
    for (const Cell& cell : cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int workers = std::min<int>(cfg.jobs, static_cast<int>(cells.size()));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) break;
          try {
            run_cell(cells[i]);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(cells.size());  // drain remaining work
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  SweepResult result;
  result.resumed = resumed;
  result.total_wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - sweep_start)
                             .count();

  const std::string scheme_label =
      cfg.algo == Algo::sa ? to_string(cfg.scheme.kind) : "-";
  for (std::size_t row = 0; row < ks.size(); ++row) {
    SweepRow out;
    out.k = ks[row];
    out.algorithm = to_string(cfg.algo);
    out.neighborhood = to_string(cfg.neighborhood);
    out.scheme = scheme_label;
    out.repeats = cfg.repeats;
    std::vector<double> guides;
    double best_guide = -1.0;
    for (int r = 0; r < cfg.repeats; ++r) {
      const RunSummary& run = results[row * static_cast<std::size_t>(cfg.repeats) +
                                      static_cast<std::size_t>(r)];
      guides.push_back(run.guide);
      out.mean_test_ndcg10 += run.test_ndcg10;
      out.mean_test_map += run.test_map;
      out.mean_wall_ms += run.wall_ms;
      if (run.guide > best_guide) {
        best_guide = run.guide;
        out.best_subset_hex = run.subset_hex;
      }
    }
    const auto rd = static_cast<double>(cfg.repeats);
    out.mean_guide = std::accumulate(guides.begin(), guides.end(), 0.0) / rd;
    out.stderr_guide = sample_stderr(guides);
    out.mean_test_ndcg10 /= rd;
    out.mean_test_map /= rd;
    out.mean_wall_ms /= rd;
    result.rows.push_back(std::move(out));
  }
  result.runs = std::move(results);

  if (!cfg.out.empty()) {
    std::ofstream csv(cfg.out);
    if (!csv) throw DataError("cannot write " + cfg.out.string());
    write_sweep_csv(result.rows, csv);
    std::filesystem::path timing_path = cfg.out;
    timing_path += ".timing.csv";
    std::ofstream timing(timing_path);
    if (!timing) throw DataError("cannot write " + timing_path.string());
    write_timing_csv(result.rows, timing);
  }
  if (!cfg.cache_file.empty()) evaluator->save_cache(cfg.cache_file);
  return result;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "# rank-anneal sweep v1\n";
  out << "k,algorithm,neighborhood,scheme,mean_guide,stderr_guide,"
         "mean_test_ndcg10,mean_test_map,best_subset_hex,repeats\n";
  for (const auto& row : rows) {
    out << row.k << ',' << row.algorithm << ',' << row.neighborhood << ','
        << row.scheme << ',' << fmt_double(row.mean_guide) << ','
        << fmt_double(row.stderr_guide) << ','
        << fmt_double(row.mean_test_ndcg10) << ','
        << fmt_double(row.mean_test_map) << ',' << row.best_subset_hex << ','
        << row.repeats << '\n';
  }
}

void write_timing_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "# rank-anneal timing v1\n";
  out << "k,setting,mean_wall_ms,repeats\n";
  for (const auto& row : rows) {
    out << row.k << ',' << row.algorithm << '-' << row.neighborhood << '-'
        << row.scheme << ',' << fmt_double(row.mean_wall_ms) << ','
        << row.repeats << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<SweepRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (!line.starts_with("k,algorithm,"))
        throw DataError("unrecognized sweep CSV header in " + path.string());
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      throw DataError("malformed sweep CSV row in " + path.string());
    SweepRow row;
    row.k = static_cast<int>(parse_int(fields[0]));
    row.algorithm = fields[1];
    row.neighborhood = fields[2];
    row.scheme = fields[3];
    row.mean_guide = parse_double(fields[4]);
    row.stderr_guide = parse_double(fields[5]);
    row.mean_test_ndcg10 = parse_double(fields[6]);
    row.mean_test_map = parse_double(fields[7]);
    row.best_subset_hex = fields[8];
    row.repeats = static_cast<int>(parse_int(fields[9]));
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw DataError("empty sweep CSV: " + path.string());
  return rows;
}

CompareResult compare_settings(const std::vector<SweepTable>& tables) {
  if (tables.size() < 2)
    throw std::invalid_argument("compare needs at least two sweeps");
  const auto& reference = tables.front().rows;
  for (const auto& table : tables) {
    if (table.rows.size() != reference.size())
      throw std::invalid_argument("sweeps cover different k ranges");
    for (std::size_t i = 0; i < reference.size(); ++i)
      if (table.rows[i].k != reference[i].k)
        throw std::invalid_argument("sweeps cover different k ranges");
  }

  CompareResult out;
  {
    std::ostringstream wide;
    wide << "# rank-anneal compare v1\nk";
    for (const auto& table : tables) wide << ',' << table.label;
    wide << '\n';
    for (std::size_t i = 0; i < reference.size(); ++i) {
      wide << reference[i].k;
      for (const auto& table : tables)
        wide << ',' << fmt_double(table.rows[i].mean_guide);
      wide << '\n';
    }
    out.wide_csv = wide.str();
  }
  {
    std::ostringstream lng;
    lng << "# rank-anneal compare-long v1\nk,setting,mean_guide,stderr_guide\n";
    for (const auto& table : tables)
      for (const auto& row : table.rows)
        lng << row.k << ',' << table.label << ',' << fmt_double(row.mean_guide)
            << ',' << fmt_double(row.stderr_guide) << '\n';
    out.long_csv = lng.str();
  }
  {
    std::ostringstream timing;
    timing << "# rank-anneal compare-timing v1\nsetting,total_wall_ms\n";
    for (const auto& table : tables) {
      double total = table.total_wall_ms;
      if (total == 0.0)
        for (const auto& row : table.rows)
          total += row.mean_wall_ms * row.repeats;
      timing << table.label << ',' << fmt_double(total) << '\n';
    }
    out.timing_csv = timing.str();
  }
  return out;
}

}  // namespace rankanneal
