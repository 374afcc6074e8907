#include "rankanneal/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <numeric>
#include <span>

#include "rankanneal/rng.hpp"
#include "rankanneal/util.hpp"

namespace rankanneal {

namespace {

using nlohmann::json;
using FlatSplit = EvaluatorFlatSplit;

FlatSplit flatten(const RankingDataset& ds) {
  FlatSplit flat;
  const auto total = static_cast<Eigen::Index>(ds.doc_count());
  flat.x.resize(total, ds.n_features);
  flat.grades.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (const auto& group : ds.groups) {
    const std::size_t begin = static_cast<std::size_t>(row);
    flat.x.middleRows(row, group.doc_count()) = group.features;
    for (Eigen::Index d = 0; d < group.doc_count(); ++d)
      flat.grades.push_back(group.relevance(d));
    row += group.doc_count();
    flat.groups.emplace_back(begin, static_cast<std::size_t>(row));
  }
  return flat;
}

void normalize_in_place(FlatSplit& split, const Eigen::VectorXd& feat_min,
                        const Eigen::VectorXd& feat_range) {
  for (Eigen::Index f = 0; f < split.x.cols(); ++f) {
    if (feat_range(f) == 0.0) {
      split.x.col(f).setZero();
    } else {
      split.x.col(f) = (split.x.col(f).array() - feat_min(f)) / feat_range(f);
    }
  }
}

double group_metric(std::span<const int> ranked, GuideMetric metric,
                    int ndcg_k, int map_cutoff) {
  if (metric == GuideMetric::ndcg)
    return ndcg_at_k(ranked, static_cast<std::size_t>(ndcg_k));
  return average_precision(ranked, static_cast<std::size_t>(map_cutoff));
}

double flat_metric(const FlatSplit& split, const Eigen::VectorXd& scores,
                   GuideMetric metric, int ndcg_k, int map_cutoff,
                   ZeroIdcgPolicy policy, std::vector<double>* per_query) {
  std::vector<double> kept;
  kept.reserve(split.groups.size());
  std::vector<std::size_t> order;
  std::vector<int> ranked;
  for (const auto& [begin, end] : split.groups) {
    const std::size_t m = end - begin;
    order.resize(m);
    std::iota(order.begin(), order.end(), begin);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return scores(static_cast<Eigen::Index>(a)) >
                              scores(static_cast<Eigen::Index>(b));
                     });
    ranked.resize(m);
    for (std::size_t i = 0; i < m; ++i) ranked[i] = split.grades[order[i]];
    const bool flagged = !has_relevant(ranked);
    if (flagged && policy == ZeroIdcgPolicy::skip) continue;
    const double value = group_metric(ranked, metric, ndcg_k, map_cutoff);
    kept.push_back(value);
    if (per_query) per_query->push_back(value);
  }
  if (kept.empty()) return 0.0;  // every query was skipped
  return mean_over_queries(kept);
}

// Candidate weight values tried per coordinate; signs matter because a
// feature may be inversely related to relevance.
constexpr double kCoarseGrid[] = {-4.0, -2.0,  -1.0, -0.5, -0.25, 0.0,
                                  0.25, 0.5,   1.0,  2.0,  4.0};
constexpr double kRefineSteps[] = {-0.125, -0.0625, 0.0625, 0.125};

Eigen::VectorXd ca_train_flat(const FlatSplit& train,
                              const std::vector<std::size_t>& active,
                              std::uint64_t seed, const EvaluatorConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(active.size());
  if (k < 1) throw std::invalid_argument("coordinate ascent needs >= 1 feature");
  Eigen::MatrixXd xa(train.x.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i)
    xa.col(i) = train.x.col(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)]));

  std::vector<char> frozen(static_cast<std::size_t>(k), 0);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (xa.rows() == 0 || xa.col(i).maxCoeff() == xa.col(i).minCoeff()) {
      frozen[static_cast<std::size_t>(i)] = 1;  // constant on train
      w(i) = 0.0;
    }
  }

  Eigen::VectorXd scores = xa * w;
  Eigen::VectorXd trial(scores.size());
  const auto metric_of = [&](const Eigen::VectorXd& s) {
    return flat_metric(train, s, cfg.guide_metric, cfg.ndcg_k, cfg.map_cutoff,
                       cfg.zero_idcg, nullptr);
  };
  double best_metric = metric_of(scores);

  SplitRng rng(seed);
  std::vector<std::size_t> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int round = 0; round < cfg.ca.max_rounds; ++round) {
    if (cfg.ca.shuffle_order) {
      SplitRng round_rng = rng.split(static_cast<std::uint64_t>(round));
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[round_rng.uniform_index(i)]);
    }
    bool improved = false;
    for (std::size_t f : order) {
      if (frozen[f]) continue;
      const auto fi = static_cast<Eigen::Index>(f);
      double best_v = w(fi);
      const auto consider = [&](double v) {
        if (v == w(fi) && best_v == w(fi)) return;
        trial = scores + (v - w(fi)) * xa.col(fi);
        const double m = metric_of(trial);
        if (m > best_metric + cfg.ca.min_improvement) {
          best_metric = m;
          best_v = v;
        }
      };
      for (double v : kCoarseGrid) consider(v);
      const double anchor = best_v;
      for (double step : kRefineSteps) consider(anchor + step);
      if (best_v != w(fi)) {
        scores += (best_v - w(fi)) * xa.col(fi);
        w(fi) = best_v;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return w;
}

}  // namespace

std::string to_string(GuideMetric metric) {
  return metric == GuideMetric::ndcg ? "ndcg" : "map";
}

std::string to_string(GuideSplit split) {
  return split == GuideSplit::validation ? "validation" : "test";
}

std::uint64_t EvaluatorConfig::hash() const {
  std::uint64_t h = 0x72616e6b616e6eULL;
  const auto mix = [&h](std::uint64_t v) { h = SplitRng::mix(h, v); };
  mix(static_cast<std::uint64_t>(guide_metric));
  mix(static_cast<std::uint64_t>(ndcg_k));
  mix(static_cast<std::uint64_t>(map_cutoff));
  mix(static_cast<std::uint64_t>(guide_split));
  mix(static_cast<std::uint64_t>(zero_idcg));
  mix(seed);
  mix(static_cast<std::uint64_t>(ranker));
  mix(static_cast<std::uint64_t>(ca.max_rounds));
  mix(ca.shuffle_order ? 1 : 0);
  std::uint64_t bits;
  static_assert(sizeof bits == sizeof ca.min_improvement);
  std::memcpy(&bits, &ca.min_improvement, sizeof bits);
  mix(bits);
  mix(record_per_query ? 1 : 0);
  return h;
}

Eigen::VectorXd train_coordinate_ascent(const RankingDataset& train,
                                        const std::vector<std::size_t>& active,
                                        std::uint64_t seed,
                                        const EvaluatorConfig& cfg) {
  FlatSplit flat = flatten(train);
  Eigen::VectorXd feat_min = flat.x.colwise().minCoeff();
  Eigen::VectorXd feat_range =
      flat.x.colwise().maxCoeff().transpose() - feat_min;
  normalize_in_place(flat, feat_min, feat_range);
  return ca_train_flat(flat, active, seed, cfg);
}

Evaluator::Evaluator(const FoldData& folds, EvaluatorConfig cfg)
    : cfg_(std::move(cfg)),
      n_features_(static_cast<std::size_t>(folds.n_features())) {
  if (cfg_.ranker != RankerKind::coordinate_ascent)
    throw std::invalid_argument(
        "synthetic ranker needs a landscape, not fold data");
  if (folds.train.groups.empty() || folds.validation.groups.empty() ||
      folds.test.groups.empty())
    throw DataError("evaluator needs nonempty train/validation/test splits");
  train_ = flatten(folds.train);
  validation_ = flatten(folds.validation);
  test_ = flatten(folds.test);
  feat_min_ = train_.x.colwise().minCoeff();
  feat_range_ = train_.x.colwise().maxCoeff().transpose() - feat_min_;
  normalize_in_place(train_, feat_min_, feat_range_);
  normalize_in_place(validation_, feat_min_, feat_range_);
  normalize_in_place(test_, feat_min_, feat_range_);
}

Evaluator::Evaluator(SyntheticLandscape landscape, EvaluatorConfig cfg)
    : cfg_(std::move(cfg)),
      n_features_(landscape.n_features()),
      landscape_(std::move(landscape)) {
  cfg_.ranker = RankerKind::synthetic;
}

Evaluator::~Evaluator() = default;

ScoreCard Evaluator::compute(const FeatureSubset& subset) const {
  if (landscape_) {
    const double score = synthetic_objective(subset, *landscape_);
    ScoreCard card;
    card.guide_score = card.test_score = score;
    card.test_ndcg10 = card.test_map = score;
    return card;
  }

  const auto start = std::chrono::steady_clock::now();
  const auto active = subset.indices();
  const Eigen::VectorXd w = ca_train_flat(train_, active, cfg_.seed, cfg_);

  const auto score_split = [&](const FlatSplit& split) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(split.x.rows());
    for (std::size_t i = 0; i < active.size(); ++i)
      s += w(static_cast<Eigen::Index>(i)) *
           split.x.col(static_cast<Eigen::Index>(active[i]));
    return s;
  };

  ScoreCard card;
  const FlatSplit& guide =
      cfg_.guide_split == GuideSplit::validation ? validation_ : test_;
  const Eigen::VectorXd guide_scores = score_split(guide);
  std::vector<double> per_query;
  card.guide_score = flat_metric(
      guide, guide_scores, cfg_.guide_metric, cfg_.ndcg_k, cfg_.map_cutoff,
      cfg_.zero_idcg, cfg_.record_per_query ? &per_query : nullptr);
  if (cfg_.record_per_query) card.per_query = std::move(per_query);

  const Eigen::VectorXd test_scores =
      cfg_.guide_split == GuideSplit::test ? guide_scores : score_split(test_);
  card.test_ndcg10 = flat_metric(test_, test_scores, GuideMetric::ndcg, 10, 0,
                                 cfg_.zero_idcg, nullptr);
  card.test_map = flat_metric(test_, test_scores, GuideMetric::map, 0,
                              cfg_.map_cutoff, cfg_.zero_idcg, nullptr);
  card.test_score =
      cfg_.guide_metric == GuideMetric::ndcg && cfg_.ndcg_k == 10
          ? card.test_ndcg10
          : flat_metric(test_, test_scores, cfg_.guide_metric, cfg_.ndcg_k,
                        cfg_.map_cutoff, cfg_.zero_idcg, nullptr);
  card.train_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return card;
}

ScoreCard Evaluator::evaluate(const FeatureSubset& subset) const {
  calls_.fetch_add(1, std::memory_order_relaxed);
  if (subset.count() == 0)
    throw std::invalid_argument("cannot evaluate an empty feature subset");
  if (subset.size() != n_features_)
    throw std::invalid_argument("subset length " + std::to_string(subset.size()) +
                                " does not match n_features " +
                                std::to_string(n_features_));

  if (cfg_.cache_cap == 0) {
    {
      std::shared_lock lock(cache_mutex_);
      if (auto it = cache_.find(subset); it != cache_.end())
        return it->second.card;
    }
  } else {
    std::unique_lock lock(cache_mutex_);
    if (auto it = cache_.find(subset); it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.lru_it);
      return it->second.card;
    }
  }

  const ScoreCard card = compute(subset);
  trainings_.fetch_add(1, std::memory_order_relaxed);
  insert_cached(subset, card);
  // Racing computations of the same subset produce identical cards, and a
  // capped cache may already have evicted the entry again.
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(subset); it != cache_.end())
      return it->second.card;
  }
  return card;
}

void Evaluator::insert_cached(const FeatureSubset& subset,
                              const ScoreCard& card) const {
  std::unique_lock lock(cache_mutex_);
  if (cache_.contains(subset)) return;
  lru_.push_front(subset);
  cache_.emplace(subset, CacheEntry{card, lru_.begin()});
  if (cfg_.cache_cap > 0 && cache_.size() > cfg_.cache_cap) {
    cache_.erase(lru_.back());
    lru_.pop_back();
  }
}

std::size_t Evaluator::cache_size() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

void Evaluator::save_cache(const std::filesystem::path& path) const {
  std::vector<std::pair<std::string, ScoreCard>> entries;
  {
    std::shared_lock lock(cache_mutex_);
    entries.reserve(cache_.size());
    for (const auto& [subset, entry] : cache_)
      entries.emplace_back(subset.to_hex(), entry.card);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  json doc;
  doc["format"] = "rank-anneal-cache";
  doc["version"] = 1;
  doc["config_hash"] = cfg_.hash();
  doc["n_features"] = n_features_;
  json items = json::array();
  for (const auto& [hex, card] : entries)
    items.push_back({hex, card.guide_score, card.test_score, card.test_ndcg10,
                     card.test_map, card.train_ms});
  doc["entries"] = std::move(items);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write cache file: " + path.string());
  out << doc.dump() << '\n';
}

void Evaluator::load_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read cache file: " + path.string());
  json doc = json::parse(in);
  if (doc.value("format", "") != "rank-anneal-cache" ||
      doc.value("version", 0) != 1)
    throw DataError("unrecognized cache file: " + path.string());
  if (doc.at("config_hash").get<std::uint64_t>() != cfg_.hash())
    throw DataError("cache file was built with a different evaluator config");
  if (doc.at("n_features").get<std::size_t>() != n_features_)
    throw DataError("cache file dimensionality mismatch");
  for (const auto& item : doc.at("entries")) {
    ScoreCard card;
    const auto hex = item.at(0).get<std::string>();
    card.guide_score = item.at(1).get<double>();
    card.test_score = item.at(2).get<double>();
    card.test_ndcg10 = item.at(3).get<double>();
    card.test_map = item.at(4).get<double>();
    card.train_ms = item.at(5).get<double>();
    insert_cached(FeatureSubset::from_hex(hex, n_features_), card);
  }
}

}  // namespace rankanneal
