#include "rankanneal/beam.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace rankanneal {

BeamPool::BeamPool(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("beam width must be >= 1");
  entries_.reserve(capacity + 1);
}

bool BeamPool::contains(const FeatureSubset& subset) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.subset == subset; });
}

bool BeamPool::update(const FeatureSubset& subset, const ScoreCard& card) {
  if (contains(subset)) return false;
  entries_.push_back({subset, card, card.guide_score, next_arrival_++});
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.arrival != b.arrival) return a.arrival < b.arrival;
              return a.subset.lex_less(b.subset);
            });
  bool kept = true;
  if (entries_.size() > capacity_) {
    kept = !(entries_.back().subset == subset);
    entries_.pop_back();
  }
  return kept;
}

namespace {

std::vector<FeatureSubset> expand_all(const FeatureSubset& state,
                                      NeighborhoodKind kind) {
  if (kind == NeighborhoodKind::swap) return enumerate_swap_neighbors(state);
  std::vector<FeatureSubset> out;
  const std::size_t n = state.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      FeatureSubset next = insertion_apply(state, i, j);
      if (std::find(out.begin(), out.end(), next) == out.end())
        out.push_back(std::move(next));
    }
  return out;
}

}  // namespace

RunRecord beam_search(std::size_t k, const Evaluator& evaluator,
                      const BeamConfig& cfg) {
  const std::size_t n = evaluator.n_features();
  if (k < 1 || k >= n)
    throw std::invalid_argument("beam_search needs 1 <= k <= n-1");
  const auto q = static_cast<std::size_t>(cfg.beam_width);
  if (cfg.beam_width < 1)
    throw std::invalid_argument("beam width must be >= 1");
  if (binomial_capped(n, k, q) < q)
    throw std::invalid_argument("beam width exceeds the number of k-subsets");

  std::size_t steps = cfg.steps;
  if (steps == 0) {
    const std::size_t budget = default_budget(n, k, cfg.budget_c, cfg.budget_cap);
    steps = budget > q ? (budget - q) / q : 1;
    steps = std::max<std::size_t>(steps, 1);
  }

  const auto start = std::chrono::steady_clock::now();
  SplitRng rng(cfg.seed);
  RunRecord record;

  BeamPool pool(q);
  while (pool.size() < q) {
    FeatureSubset candidate = random_subset(n, k, rng);
    if (pool.contains(candidate)) continue;  // redraw duplicates
    const ScoreCard card = evaluator.evaluate(candidate);
    record.evaluations_used += 1;
    pool.update(candidate, card);
  }

  for (std::size_t step = 0; step < steps; ++step) {
    // Snapshot so every member of this generation expands exactly once.
    const std::vector<BeamPool::Entry> generation = pool.entries();
    bool any_inserted = false;
    for (const auto& member : generation) {
      if (cfg.full_expansion) {
        for (const FeatureSubset& next : expand_all(member.subset, cfg.neighborhood)) {
          const ScoreCard card = evaluator.evaluate(next);
          record.evaluations_used += 1;
          if (card.guide_score > member.score)
            any_inserted |= pool.update(next, card);
        }
      } else {
        const FeatureSubset next = neighbor(member.subset, cfg.neighborhood, rng);
        const ScoreCard card = evaluator.evaluate(next);
        record.evaluations_used += 1;
        if (card.guide_score > member.score)
          any_inserted |= pool.update(next, card);
      }
    }
    record.trace.push_back({step, 0.0, pool.best().score, pool.best().score,
                            any_inserted, false});
  }

  const BeamPool::Entry& winner = pool.best();
  record.best_subset = winner.subset;
  record.best_guide_score = winner.score;
  record.best_test_score = winner.card.test_score;
  record.best_test_ndcg10 = winner.card.test_ndcg10;
  record.best_test_map = winner.card.test_map;
  record.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return record;
}

}  // namespace rankanneal
