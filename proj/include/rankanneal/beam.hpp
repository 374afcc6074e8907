#pragma once

#include <cstdint>
#include <vector>

#include "rankanneal/annealer.hpp"
#include "rankanneal/evaluator.hpp"
#include "rankanneal/subset.hpp"

namespace rankanneal {

struct BeamConfig {
  int beam_width = 10;
  std::size_t steps = 0;  // 0 -> sized so q + q*steps matches default_budget
  NeighborhoodKind neighborhood = NeighborhoodKind::swap;
  std::uint64_t seed = 0;
  // Expand every distinct neighbor of each member instead of drawing one.
  // Changes the evaluation count; the literal one-neighbor rule is default.
  bool full_expansion = false;
  double budget_c = 2.0;
  std::size_t budget_cap = 1000;
};

// Fixed-capacity pool of the best scored subsets seen, kept sorted by score
// descending. Ties resolve to the earlier insertion, then to the
// lexicographically smaller bit pattern.
class BeamPool {
 public:
  struct Entry {
    FeatureSubset subset;
    ScoreCard card;
    double score = 0.0;  // card.guide_score, kept for the sort key
    std::uint64_t arrival = 0;
  };

  explicit BeamPool(std::size_t capacity);

  // Inserts unless the bit pattern is already present, re-sorts, truncates to
  // capacity. Returns true if the candidate is in the pool afterwards.
  bool update(const FeatureSubset& subset, const ScoreCard& card);

  bool contains(const FeatureSubset& subset) const;
  const Entry& best() const { return entries_.front(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::vector<Entry> entries_;
  std::size_t capacity_;
  std::uint64_t next_arrival_ = 0;
};

// Local beam search over fixed-size subsets: q random distinct starts, one
// neighbor per pool member per step, a candidate enters the pool only when it
// strictly beats the member it came from. Uses exactly q + q*steps evaluator
// calls (without full expansion).
RunRecord beam_search(std::size_t k, const Evaluator& evaluator,
                      const BeamConfig& cfg);

}  // namespace rankanneal
