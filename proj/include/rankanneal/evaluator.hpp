#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "rankanneal/letor.hpp"
#include "rankanneal/metrics.hpp"
#include "rankanneal/subset.hpp"
#include "rankanneal/synthetic.hpp"

namespace rankanneal {

enum class GuideMetric { ndcg, map };
enum class GuideSplit { validation, test };
enum class RankerKind { coordinate_ascent, synthetic };
enum class ZeroIdcgPolicy { count_as_zero, skip };

std::string to_string(GuideMetric metric);
std::string to_string(GuideSplit split);

struct CoordinateAscentOptions {
  int max_rounds = 4;
  bool shuffle_order = true;
  double min_improvement = 1e-9;
};

struct EvaluatorConfig {
  GuideMetric guide_metric = GuideMetric::ndcg;
  int ndcg_k = 10;
  int map_cutoff = 0;  // 0 = untruncated
  GuideSplit guide_split = GuideSplit::validation;
  ZeroIdcgPolicy zero_idcg = ZeroIdcgPolicy::count_as_zero;
  std::uint64_t seed = 0;
  RankerKind ranker = RankerKind::coordinate_ascent;
  CoordinateAscentOptions ca;
  std::size_t cache_cap = 0;  // 0 = unbounded
  bool record_per_query = false;

  // Hash over everything that changes scores; cache files are keyed by it.
  std::uint64_t hash() const;
};

struct ScoreCard {
  double guide_score = 0.0;
  double test_score = 0.0;
  double test_ndcg10 = 0.0;
  double test_map = 0.0;
  double train_ms = 0.0;  // wall time; excluded from determinism guarantees
  std::optional<std::vector<double>> per_query;
};

// One split flattened for training: docs stacked into a single matrix with
// per-query row ranges alongside.
struct EvaluatorFlatSplit {
  Eigen::MatrixXd x;  // docs x n, normalized by train statistics
  std::vector<int> grades;
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
};

// Cyclic coordinate line search over a fixed candidate grid, maximizing the
// configured metric on the train split. Deterministic given the seed.
Eigen::VectorXd train_coordinate_ascent(const RankingDataset& train,
                                        const std::vector<std::size_t>& active,
                                        std::uint64_t seed,
                                        const EvaluatorConfig& cfg = {});

// Maps a feature subset to ranking quality: trains the configured ranker on
// the train split restricted to the subset and scores guide/test splits.
// Results are memoized by exact bit pattern; repeated calls return the cached
// ScoreCard. Thread-safe: lookups take a shared lock, writes an exclusive one.
class Evaluator {
 public:
  Evaluator(const FoldData& folds, EvaluatorConfig cfg);
  Evaluator(SyntheticLandscape landscape, EvaluatorConfig cfg);
  ~Evaluator();

  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  ScoreCard evaluate(const FeatureSubset& subset) const;

  std::size_t n_features() const { return n_features_; }
  const EvaluatorConfig& config() const { return cfg_; }

  // evaluate() invocations, including cache hits.
  std::size_t calls() const { return calls_.load(); }
  // Cache misses, i.e. actual trainings.
  std::size_t trainings() const { return trainings_.load(); }
  std::size_t cache_size() const;

  void save_cache(const std::filesystem::path& path) const;
  // Loads entries written by save_cache; rejects mismatched config or shape.
  void load_cache(const std::filesystem::path& path);

 private:
  ScoreCard compute(const FeatureSubset& subset) const;
  void insert_cached(const FeatureSubset& subset, const ScoreCard& card) const;

  EvaluatorConfig cfg_;
  std::size_t n_features_ = 0;

  // coordinate-ascent mode
  EvaluatorFlatSplit train_, validation_, test_;
  Eigen::VectorXd feat_min_, feat_range_;

  // synthetic mode
  std::optional<SyntheticLandscape> landscape_;

  struct CacheEntry {
    ScoreCard card;
    std::list<FeatureSubset>::iterator lru_it;
  };
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<FeatureSubset, CacheEntry, FeatureSubsetHash> cache_;
  mutable std::list<FeatureSubset> lru_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::atomic<std::size_t> trainings_{0};
};

}  // namespace rankanneal
