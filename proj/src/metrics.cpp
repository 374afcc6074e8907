#include "rankanneal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rankanneal {

std::vector<int> ranked_grades(std::span<const double> scores,
                               std::span<const int> grades) {
  if (scores.size() != grades.size())
    throw std::invalid_argument("scores and grades must have equal length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  std::vector<int> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = grades[order[i]];
  return out;
}

double dcg_at_k(std::span<const int> ranked, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::size_t depth = std::min(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    const double gain = std::exp2(static_cast<double>(ranked[i])) - 1.0;
    dcg += gain / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

double ndcg_at_k(std::span<const int> ranked, std::size_t k) {
  std::vector<int> ideal(ranked.begin(), ranked.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg == 0.0) return 0.0;
  return dcg_at_k(ranked, k) / idcg;
}

bool has_relevant(std::span<const int> grades) {
  return std::any_of(grades.begin(), grades.end(),
                     [](int g) { return g >= 1; });
}

double average_precision(std::span<const int> ranked, std::size_t cutoff) {
  const std::size_t depth =
      cutoff == 0 ? ranked.size() : std::min(cutoff, ranked.size());
  std::size_t total_relevant = 0;
  for (int g : ranked)
    if (g >= 1) ++total_relevant;
  if (total_relevant == 0) return 0.0;
  double sum = 0.0;
  std::size_t seen_relevant = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (ranked[i] < 1) continue;
    ++seen_relevant;
    sum += static_cast<double>(seen_relevant) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(total_relevant);
}

double mean_over_queries(std::span<const double> per_query_scores) {
  if (per_query_scores.empty())
    throw std::invalid_argument("mean over an empty score sequence");
  const double sum =
      std::accumulate(per_query_scores.begin(), per_query_scores.end(), 0.0);
  return sum / static_cast<double>(per_query_scores.size());
}

}  // namespace rankanneal
