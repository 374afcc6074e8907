#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rankanneal {

// Relevance grades in predicted-score order, best-scored first. Prediction
// ties keep the original document order.
std::vector<int> ranked_grades(std::span<const double> scores,
                               std::span<const int> grades);

double dcg_at_k(std::span<const int> ranked, std::size_t k);

// NDCG@k with gain 2^rel - 1 and discount log2(i+1). Queries with no
// relevant document (IDCG = 0) score 0.
double ndcg_at_k(std::span<const int> ranked, std::size_t k);

bool has_relevant(std::span<const int> grades);

// AP with binarization at grade >= 1; 0 when nothing is relevant.
// cutoff = 0 means untruncated; cutoff = m truncates the ranking at m.
double average_precision(std::span<const int> ranked, std::size_t cutoff = 0);

// Arithmetic mean; throws on an empty sequence.
double mean_over_queries(std::span<const double> per_query_scores);

}  // namespace rankanneal
