#include "rankanneal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "rankanneal/rng.hpp"
#include "rankanneal/util.hpp"

namespace rankanneal {

namespace {
using nlohmann::json;
}

SyntheticLandscape make_landscape(std::vector<double> utilities) {
  SyntheticLandscape l;
  const auto n = static_cast<Eigen::Index>(utilities.size());
  l.utility = Eigen::Map<Eigen::VectorXd>(utilities.data(), n);
  l.redundancy = Eigen::MatrixXd::Zero(n, n);
  if ((l.utility.array() < 0).any())
    throw std::invalid_argument("utilities must be non-negative");
  return l;
}

void add_redundancy(SyntheticLandscape& landscape, std::size_t i,
                    std::size_t j, double penalty) {
  if (i == j) throw std::invalid_argument("redundancy needs i != j");
  if (penalty < 0) throw std::invalid_argument("penalty must be >= 0");
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  landscape.redundancy(a, b) = penalty;
  landscape.redundancy(b, a) = penalty;
}

double synthetic_objective(const FeatureSubset& subset,
                           const SyntheticLandscape& landscape) {
  if (subset.size() != landscape.n_features())
    throw std::invalid_argument("subset length does not match landscape");
  const auto selected = subset.indices();
  double total = 0.0;
  for (std::size_t a = 0; a < selected.size(); ++a) {
    total += landscape.utility(static_cast<Eigen::Index>(selected[a]));
    for (std::size_t b = a + 1; b < selected.size(); ++b)
      total -= landscape.redundancy(static_cast<Eigen::Index>(selected[a]),
                                    static_cast<Eigen::Index>(selected[b]));
  }
  const double denom = landscape.utility.sum();
  if (denom <= 0.0) return 0.0;
  return clamp01(total / denom);
}

void save_landscape(const SyntheticLandscape& landscape,
                    const std::filesystem::path& path) {
  json doc;
  doc["format"] = "rank-anneal-landscape";
  doc["version"] = 1;
  doc["utility"] = std::vector<double>(
      landscape.utility.data(), landscape.utility.data() + landscape.utility.size());
  json pairs = json::array();
  const auto n = landscape.utility.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (landscape.redundancy(i, j) != 0.0)
        pairs.push_back({i, j, landscape.redundancy(i, j)});
  doc["redundancy"] = std::move(pairs);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

SyntheticLandscape load_landscape(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read landscape file: " + path.string());
  json doc = json::parse(in, nullptr, true, true);
  if (doc.value("format", "") != "rank-anneal-landscape")
    throw DataError("not a landscape file: " + path.string());
  auto utilities = doc.at("utility").get<std::vector<double>>();
  SyntheticLandscape l = make_landscape(std::move(utilities));
  for (const auto& entry : doc.at("redundancy")) {
    add_redundancy(l, entry.at(0).get<std::size_t>(),
                   entry.at(1).get<std::size_t>(), entry.at(2).get<double>());
  }
  return l;
}

namespace {

// Relevance is a noisy rank of the mean of the planted features, so a model
// needs most of them to rank well: small subsets underfit, the full planted
// set plateaus, and the label noise keeps even a perfect model off 1.0.
RankingDataset build_split(const SyntheticCorpusSpec& spec,
                           const std::vector<int>& planted, Split split,
                           int first_query, int query_count, SplitRng& rng) {
  const int n = spec.n_features;
  const int p = static_cast<int>(planted.size());
  const double latent_sigma = 0.2887 / std::sqrt(static_cast<double>(p));
  const double noise_amp = 0.4 * latent_sigma * 1.7321;  // sd 0.4 * latent
  RankingDataset ds;
  ds.n_features = n;
  ds.split = split;
  ds.groups.reserve(static_cast<std::size_t>(query_count));
  for (int q = 0; q < query_count; ++q) {
    QueryGroup group;
    group.query_id = std::to_string(first_query + q);
    const auto docs = static_cast<Eigen::Index>(spec.docs_per_query);
    group.features.resize(docs, n);
    group.relevance.resize(docs);
    std::vector<std::pair<double, Eigen::Index>> scored;
    scored.reserve(static_cast<std::size_t>(docs));
    for (Eigen::Index d = 0; d < docs; ++d) {
      double latent = 0.0;
      for (int f = 0; f < n; ++f) {
        double value;
        if (f < p) {
          value = rng.uniform();
          latent += value;
        } else if (f < 2 * p) {
          // Noisy copy of the informative feature it shadows.
          value = clamp01(group.features(d, f - p) +
                          0.08 * (rng.uniform() - 0.5));
        } else {
          value = rng.uniform();
        }
        group.features(d, f) = value;
      }
      latent /= p;
      scored.emplace_back(latent + noise_amp * (2.0 * rng.uniform() - 1.0), d);
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto top = static_cast<std::size_t>(std::ceil(0.2 * docs));
    const auto mid = static_cast<std::size_t>(std::ceil(0.3 * docs));
    for (std::size_t rank = 0; rank < scored.size(); ++rank) {
      int grade = 0;
      if (rank < top) grade = std::min(2, spec.max_grade);
      else if (rank < top + mid) grade = std::min(1, spec.max_grade);
      group.relevance(scored[rank].second) = grade;
    }
    group.doc_ids.reserve(static_cast<std::size_t>(docs));
    for (Eigen::Index d = 0; d < docs; ++d)
      group.doc_ids.push_back(group.query_id + "-" + std::to_string(d));
    ds.groups.push_back(std::move(group));
  }
  return ds;
}

}  // namespace

SyntheticCorpus make_synthetic(const SyntheticCorpusSpec& spec) {
  if (spec.n_features < 2)
    throw std::invalid_argument("synthetic corpus needs n >= 2");
  if (spec.queries < 0 || spec.docs_per_query < 1)
    throw std::invalid_argument("invalid synthetic corpus shape");

  const int p = spec.informative > 0
                    ? std::min(spec.informative, spec.n_features)
                    : std::max(2, spec.n_features / 3);

  SyntheticCorpus corpus;
  for (int f = 1; f <= p; ++f) corpus.planted.push_back(f);

  // Analytic stand-in for the corpus: planted features carry the utility,
  // copies are worth less and penalized against their originals, noise is
  // worth almost nothing.
  std::vector<double> u(static_cast<std::size_t>(spec.n_features), 0.05);
  for (int f = 0; f < p; ++f) u[static_cast<std::size_t>(f)] = 1.0;
  for (int f = p; f < std::min(2 * p, spec.n_features); ++f)
    u[static_cast<std::size_t>(f)] = 0.45;
  corpus.landscape = make_landscape(std::move(u));
  for (int f = p; f < std::min(2 * p, spec.n_features); ++f)
    add_redundancy(corpus.landscape, static_cast<std::size_t>(f - p),
                   static_cast<std::size_t>(f), 0.4);

  SplitRng rng(spec.seed);
  SplitRng train_rng = rng.split(1);
  SplitRng vali_rng = rng.split(2);
  SplitRng test_rng = rng.split(3);
  const int train_q = spec.queries * 6 / 10;
  const int vali_q = spec.queries * 2 / 10;
  const int test_q = spec.queries - train_q - vali_q;
  corpus.folds.train = build_split(spec, corpus.planted, Split::train, 1,
                                   train_q, train_rng);
  corpus.folds.validation = build_split(spec, corpus.planted, Split::validation,
                                        1 + train_q, vali_q, vali_rng);
  corpus.folds.test = build_split(spec, corpus.planted, Split::test,
                                  1 + train_q + vali_q, test_q, test_rng);
  return corpus;
}

SyntheticCorpus make_synthetic(int n, int queries, std::uint64_t seed) {
  SyntheticCorpusSpec spec;
  spec.n_features = n;
  spec.queries = queries;
  spec.seed = seed;
  return make_synthetic(spec);
}

void write_synthetic_dir(const SyntheticCorpus& corpus,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const RankingDataset*> parts[] = {
      {"train.txt", &corpus.folds.train},
      {"vali.txt", &corpus.folds.validation},
      {"test.txt", &corpus.folds.test},
  };
  for (auto& [name, ds] : parts) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    serialize_letor(*ds, out);
  }
  save_landscape(corpus.landscape, dir / "landscape.json");
  json meta;
  meta["format"] = "rank-anneal-synth";
  meta["version"] = 1;
  meta["n_features"] = corpus.folds.n_features();
  meta["planted_features"] = corpus.planted;
  std::ofstream meta_out(dir / "meta.json");
  if (!meta_out) throw DataError("cannot write " + (dir / "meta.json").string());
  meta_out << meta.dump(2) << '\n';
}

}  // namespace rankanneal
