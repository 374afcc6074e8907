#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <unistd.h>

#include "rankanneal/evaluator.hpp"
#include "rankanneal/metrics.hpp"
#include "rankanneal/rng.hpp"
#include "rankanneal/synthetic.hpp"

using namespace rankanneal;

namespace {

// Fold where every split draws from the same generator; feature values are a
// caller-supplied function of the relevance grade.
template <typename FeatureFn>
FoldData make_fold(int n_features, int queries_per_split, int docs_per_query,
                   std::uint64_t seed, FeatureFn&& fn) {
  FoldData fold;
  RankingDataset* splits[] = {&fold.train, &fold.validation, &fold.test};
  const Split tags[] = {Split::train, Split::validation, Split::test};
  SplitRng rng(seed);
  for (int s = 0; s < 3; ++s) {
    splits[s]->n_features = n_features;
    splits[s]->split = tags[s];
    for (int q = 0; q < queries_per_split; ++q) {
      QueryGroup group;
      group.query_id = std::to_string(s * 1000 + q);
      group.features.resize(docs_per_query, n_features);
      group.relevance.resize(docs_per_query);
      for (int d = 0; d < docs_per_query; ++d) {
        const int rel = d % 3;  // every group has relevant docs
        group.relevance(d) = rel;
        for (int f = 0; f < n_features; ++f)
          group.features(d, f) = fn(f, rel, rng);
        group.doc_ids.push_back(group.query_id + "-" + std::to_string(d));
      }
      splits[s]->groups.push_back(std::move(group));
    }
  }
  return fold;
}

FeatureSubset single_feature(std::size_t n, std::size_t f) {
  FeatureSubset s(n);
  s.set(f, true);
  return s;
}

std::filesystem::path temp_file(const std::string& tag) {
  return std::filesystem::temp_directory_path() /
         ("rankanneal_eval_" + tag + "_" + std::to_string(::getpid()) + ".json");
}

}  // namespace

TEST_CASE("synthetic objective closed-form values") {
  SyntheticLandscape l = make_landscape({3.0, 2.0, 1.0});
  add_redundancy(l, 0, 1, 4.0);

  FeatureSubset s12(3);
  s12.set(0, true);
  s12.set(1, true);
  CHECK(synthetic_objective(s12, l) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  CHECK(synthetic_objective(single_feature(3, 0), l) ==
        doctest::Approx(0.5).epsilon(1e-12));  // u_max / sum(u)

  SyntheticLandscape clean = make_landscape({3.0, 2.0, 1.0});
  CHECK(synthetic_objective(FeatureSubset::all_features(3), clean) == 1.0);
}

TEST_CASE("synthetic objective clamps into [0,1]") {
  SyntheticLandscape l = make_landscape({1.0, 1.0});
  add_redundancy(l, 0, 1, 10.0);
  FeatureSubset both = FeatureSubset::all_features(2);
  CHECK(synthetic_objective(both, l) == 0.0);
}

TEST_CASE("evaluate memoizes by bit pattern") {
  Evaluator evaluator(make_landscape({1.0, 2.0, 3.0, 4.0}), {});
  const FeatureSubset s = single_feature(4, 2);
  const ScoreCard first = evaluator.evaluate(s);
  const ScoreCard second = evaluator.evaluate(s);
  CHECK(first.guide_score == second.guide_score);
  CHECK(first.test_score == second.test_score);
  CHECK(evaluator.calls() == 2);
  CHECK(evaluator.trainings() == 1);
  // With no redundancy the full set is the analytic maximum.
  CHECK(evaluator.evaluate(FeatureSubset::all_features(4)).guide_score == 1.0);
}

TEST_CASE("evaluate rejects empty or mismatched subsets") {
  Evaluator evaluator(make_landscape({1.0, 1.0, 1.0}), {});
  CHECK_THROWS_AS(evaluator.evaluate(FeatureSubset(3)), std::invalid_argument);
  CHECK_THROWS_AS(evaluator.evaluate(single_feature(5, 0)),
                  std::invalid_argument);
}

TEST_CASE("a feature equal to the grade trains to a perfect ranking") {
  const FoldData fold = make_fold(
      3, 6, 9, 99, [](int f, int rel, SplitRng& rng) {
        if (f == 0) return static_cast<double>(rel);
        return rng.uniform();
      });
  Evaluator evaluator(fold, {});
  const ScoreCard card = evaluator.evaluate(single_feature(3, 0));
  CHECK(card.guide_score == 1.0);
  CHECK(card.test_ndcg10 == 1.0);
}

TEST_CASE("a negated grade feature trains to a negative weight") {
  const FoldData fold = make_fold(
      2, 6, 9, 17, [](int f, int rel, SplitRng& rng) {
        if (f == 0) return -static_cast<double>(rel);
        return rng.uniform();
      });
  const std::vector<std::size_t> active = {0};
  const Eigen::VectorXd w = train_coordinate_ascent(fold.train, active, 0);
  CHECK(w(0) < 0.0);
  Evaluator evaluator(fold, {});
  CHECK(evaluator.evaluate(single_feature(2, 0)).guide_score == 1.0);
}

TEST_CASE("a constant feature is frozen at weight zero") {
  const FoldData fold = make_fold(
      2, 4, 6, 23, [](int f, int rel, SplitRng& rng) {
        if (f == 1) return 0.375;
        return static_cast<double>(rel) + 0.01 * rng.uniform();
      });
  const Eigen::VectorXd w = train_coordinate_ascent(fold.train, {0, 1}, 0);
  CHECK(w(1) == 0.0);
  CHECK(w(0) != 0.0);
}

TEST_CASE("coordinate ascent reaches the two-feature grid-search optimum") {
  // Two noisy views of the grade; blending them ranks better than either.
  const FoldData fold = make_fold(
      2, 12, 12, 4242, [](int f, int rel, SplitRng& rng) {
        const double noise = rng.uniform() - 0.5;
        return static_cast<double>(rel) + (f == 0 ? 1.1 : 1.3) * noise;
      });

  // Independent oracle: exhaustive sweep over the weight angle on the same
  // normalized train matrix the trainer sees.
  Eigen::MatrixXd x(fold.train.doc_count(), 2);
  std::vector<int> grades;
  std::vector<std::pair<std::size_t, std::size_t>> bounds;
  {
    Eigen::Index row = 0;
    for (const auto& g : fold.train.groups) {
      const auto begin = static_cast<std::size_t>(row);
      x.middleRows(row, g.doc_count()) = g.features;
      for (Eigen::Index d = 0; d < g.doc_count(); ++d)
        grades.push_back(g.relevance(d));
      row += g.doc_count();
      bounds.emplace_back(begin, static_cast<std::size_t>(row));
    }
    for (int f = 0; f < 2; ++f) {
      const double lo = x.col(f).minCoeff();
      const double hi = x.col(f).maxCoeff();
      x.col(f) = (x.col(f).array() - lo) / (hi - lo);
    }
  }
  const auto train_ndcg10 = [&](const Eigen::Vector2d& w) {
    const Eigen::VectorXd scores = x * w;
    std::vector<double> per_query;
    for (const auto& [begin, end] : bounds) {
      std::vector<double> s(scores.data() + begin, scores.data() + end);
      std::vector<int> g(grades.begin() + static_cast<long>(begin),
                         grades.begin() + static_cast<long>(end));
      per_query.push_back(ndcg_at_k(ranked_grades(s, g), 10));
    }
    return mean_over_queries(per_query);
  };

  double oracle_best = 0.0;
  for (int step = 0; step < 720; ++step) {
    const double theta = step * (2.0 * M_PI / 720.0);
    oracle_best = std::max(
        oracle_best, train_ndcg10({std::cos(theta), std::sin(theta)}));
  }

  const Eigen::VectorXd w = train_coordinate_ascent(fold.train, {0, 1}, 0);
  const double trained = train_ndcg10({w(0), w(1)});
  CHECK(trained >= oracle_best - 0.01);
}

TEST_CASE("evaluation is deterministic across evaluator instances") {
  const FoldData fold = make_fold(
      4, 5, 8, 7, [](int f, int rel, SplitRng& rng) {
        return 0.3 * rel + rng.uniform() * (f + 1);
      });
  EvaluatorConfig cfg;
  cfg.seed = 123;
  Evaluator a(fold, cfg);
  Evaluator b(fold, cfg);
  const FeatureSubset subset = FeatureSubset::from_indices(4, {0, 2});
  const ScoreCard ca = a.evaluate(subset);
  const ScoreCard cb = b.evaluate(subset);
  CHECK(ca.guide_score == cb.guide_score);
  CHECK(ca.test_score == cb.test_score);
  CHECK(ca.test_ndcg10 == cb.test_ndcg10);
  CHECK(ca.test_map == cb.test_map);
}

TEST_CASE("cached and fresh evaluations agree") {
  const FoldData fold = make_fold(
      5, 4, 7, 55, [](int, int rel, SplitRng& rng) {
        return 0.4 * rel + rng.uniform();
      });
  EvaluatorConfig cfg;
  Evaluator cached(fold, cfg);
  SplitRng rng(9);
  std::vector<FeatureSubset> subsets;
  for (int i = 0; i < 8; ++i) subsets.push_back(random_subset(5, 2, rng));
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& s : subsets) {
      Evaluator fresh(fold, cfg);
      CHECK(cached.evaluate(s).guide_score == fresh.evaluate(s).guide_score);
    }
  }
}

TEST_CASE("cache persists through a versioned file") {
  SyntheticLandscape l = make_landscape({1.0, 2.0, 3.0, 4.0, 5.0});
  EvaluatorConfig cfg;
  cfg.seed = 5;
  Evaluator first(std::move(l), cfg);
  SplitRng rng(3);
  std::vector<FeatureSubset> subsets;
  for (int i = 0; i < 6; ++i) {
    subsets.push_back(random_subset(5, 2, rng));
    first.evaluate(subsets.back());
  }
  const auto path = temp_file("cache");
  first.save_cache(path);

  Evaluator second(make_landscape({1.0, 2.0, 3.0, 4.0, 5.0}), cfg);
  second.load_cache(path);
  for (const auto& s : subsets) {
    const ScoreCard card = second.evaluate(s);
    CHECK(card.guide_score == first.evaluate(s).guide_score);
  }
  CHECK(second.trainings() == 0);

  EvaluatorConfig other = cfg;
  other.seed = 6;
  Evaluator mismatched(make_landscape({1.0, 2.0, 3.0, 4.0, 5.0}), other);
  CHECK_THROWS_AS(mismatched.load_cache(path), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("capped cache evicts least recently used entries") {
  EvaluatorConfig cfg;
  cfg.cache_cap = 2;
  Evaluator evaluator(make_landscape({1.0, 2.0, 3.0}), cfg);
  const FeatureSubset a = single_feature(3, 0);
  const FeatureSubset b = single_feature(3, 1);
  const FeatureSubset c = single_feature(3, 2);
  evaluator.evaluate(a);
  evaluator.evaluate(b);
  evaluator.evaluate(c);  // evicts a
  CHECK(evaluator.cache_size() == 2);
  CHECK(evaluator.trainings() == 3);
  evaluator.evaluate(a);  // recompute
  CHECK(evaluator.trainings() == 4);
  evaluator.evaluate(c);  // still cached
  CHECK(evaluator.trainings() == 4);
}

TEST_CASE("synthetic corpus planted subset beats random subsets") {
  SyntheticCorpusSpec spec;
  spec.n_features = 12;
  spec.queries = 30;
  spec.seed = 21;
  const SyntheticCorpus corpus = make_synthetic(spec);
  REQUIRE(corpus.planted == std::vector<int>{1, 2, 3, 4});

  Evaluator evaluator(corpus.folds, {});
  std::vector<std::size_t> planted_idx;
  for (int f : corpus.planted)
    planted_idx.push_back(static_cast<std::size_t>(f - 1));
  const double planted_score =
      evaluator.evaluate(FeatureSubset::from_indices(12, planted_idx)).guide_score;

  SplitRng rng(77);
  double total = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t)
    total += evaluator.evaluate(random_subset(12, 4, rng)).guide_score;
  CHECK(planted_score > total / trials);
}
