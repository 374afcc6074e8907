#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rankanneal/metrics.hpp"
#include "rankanneal/rng.hpp"

using namespace rankanneal;

TEST_CASE("ndcg of an ideal ordering is exactly 1") {
  const std::vector<int> ranked = {2, 1, 0};
  CHECK(ndcg_at_k(ranked, 3) == 1.0);
  const std::vector<int> longer = {4, 3, 3, 1, 0, 0};
  CHECK(ndcg_at_k(longer, 10) == 1.0);
}

TEST_CASE("ndcg of a reversed ordering matches the hand computation") {
  // DCG = 1/log2(3) + 3/log2(4) = 2.1309298, IDCG = 3 + 1/log2(3) = 3.6309298
  const double dcg = 1.0 / std::log2(3.0) + 3.0 / 2.0;
  const double idcg = 3.0 + 1.0 / std::log2(3.0);
  const std::vector<int> ranked = {0, 1, 2};
  CHECK(ndcg_at_k(ranked, 3) == doctest::Approx(dcg / idcg).epsilon(1e-12));
  CHECK(ndcg_at_k(ranked, 3) == doctest::Approx(0.5868827).epsilon(1e-6));
}

TEST_CASE("ndcg is 0 when no document is relevant") {
  const std::vector<int> ranked = {0, 0, 0, 0};
  CHECK(ndcg_at_k(ranked, 10) == 0.0);
  CHECK_FALSE(has_relevant(ranked));
}

TEST_CASE("ndcg truncates at k") {
  const std::vector<int> ranked = {0, 0, 2};
  // Top-2 holds nothing; the relevant doc sits outside the cutoff.
  CHECK(ndcg_at_k(ranked, 2) == 0.0);
  CHECK(ndcg_at_k(ranked, 3) > 0.0);
}

TEST_CASE("average precision hand values") {
  CHECK(average_precision(std::vector<int>{1, 0, 1, 0}) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(average_precision(std::vector<int>{1, 1, 1}) == 1.0);
  CHECK(average_precision(std::vector<int>{0, 0, 0}) == 0.0);
  // Graded input binarizes at grade >= 1.
  CHECK(average_precision(std::vector<int>{2, 0, 1, 0}) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("truncated average precision counts only the prefix") {
  const std::vector<int> ranked = {1, 0, 0, 1};
  CHECK(average_precision(ranked, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(average_precision(ranked, 0) ==
        doctest::Approx((1.0 + 2.0 / 4.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("mean over queries") {
  CHECK(mean_over_queries(std::vector<double>{0.5, 0.7}) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(mean_over_queries(std::vector<double>{0.123}) == 0.123);
  CHECK_THROWS_AS(mean_over_queries(std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("mean matches an independent compensated sum") {
  SplitRng rng(7);
  std::vector<double> scores;
  for (int i = 0; i < 46; ++i) scores.push_back(rng.uniform());
  long double sum = 0.0L;
  for (double s : scores) sum += s;
  const double expect = static_cast<double>(sum / scores.size());
  CHECK(mean_over_queries(scores) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ranked_grades sorts by score descending, ties keep file order") {
  const std::vector<double> scores = {0.4, 0.9, 0.4, 0.1};
  const std::vector<int> grades = {3, 0, 1, 2};
  CHECK(ranked_grades(scores, grades) == std::vector<int>{0, 3, 1, 2});
}

TEST_CASE("metrics depend only on the ranking, not score magnitudes") {
  SplitRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(20);
    std::vector<double> scores(m);
    std::vector<double> doubled(m);
    std::vector<int> grades(m);
    for (std::size_t i = 0; i < m; ++i) {
      scores[i] = rng.uniform();
      doubled[i] = 2.0 * scores[i];
      grades[i] = static_cast<int>(rng.uniform_index(3));
    }
    const auto a = ranked_grades(scores, grades);
    const auto b = ranked_grades(doubled, grades);
    REQUIRE(a == b);
    CHECK(ndcg_at_k(a, 10) == ndcg_at_k(b, 10));
    CHECK(average_precision(a) == average_precision(b));
  }
}

TEST_CASE("metric values stay in [0,1]") {
  SplitRng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(15);
    std::vector<int> ranked(m);
    for (auto& g : ranked) g = static_cast<int>(rng.uniform_index(5));
    const double n = ndcg_at_k(ranked, 1 + rng.uniform_index(12));
    const double a = average_precision(ranked);
    CHECK(n >= 0.0);
    CHECK(n <= 1.0);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("moving a more relevant document upward never hurts ndcg") {
  SplitRng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + rng.uniform_index(12);
    std::vector<int> ranked(m);
    for (auto& g : ranked) g = static_cast<int>(rng.uniform_index(3));
    const std::size_t i = rng.uniform_index(m - 1);
    if (ranked[i] >= ranked[i + 1]) continue;
    const std::size_t k = 1 + rng.uniform_index(m);
    const double before = ndcg_at_k(ranked, k);
    std::swap(ranked[i], ranked[i + 1]);
    CHECK(ndcg_at_k(ranked, k) >= before);
  }
}
