#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rankanneal/letor.hpp"
#include "rankanneal/subset.hpp"

namespace rankanneal {

// Closed-form, trainer-free objective over subsets: per-feature utilities
// minus pairwise redundancy penalties, scaled into [0,1]. Exhaustive
// enumeration stays cheap, which makes it the oracle for search-level tests.
struct SyntheticLandscape {
  Eigen::VectorXd utility;     // u_i >= 0
  Eigen::MatrixXd redundancy;  // symmetric, zero diagonal, r_ij >= 0

  std::size_t n_features() const {
    return static_cast<std::size_t>(utility.size());
  }
};

SyntheticLandscape make_landscape(std::vector<double> utilities);
void add_redundancy(SyntheticLandscape& landscape, std::size_t i,
                    std::size_t j, double penalty);

// clamp01((sum_{i in S} u_i - sum_{i<j in S} r_ij) / sum_i u_i)
double synthetic_objective(const FeatureSubset& subset,
                           const SyntheticLandscape& landscape);

void save_landscape(const SyntheticLandscape& landscape,
                    const std::filesystem::path& path);
SyntheticLandscape load_landscape(const std::filesystem::path& path);

// Desk-scale LETOR corpus with a planted informative feature subset, noisy
// redundant copies of it, and pure-noise features.
struct SyntheticCorpusSpec {
  int n_features = 12;
  int queries = 50;
  std::uint64_t seed = 1;
  int docs_per_query = 20;
  int informative = 0;  // 0 -> max(2, n/3)
  int max_grade = 2;
};

struct SyntheticCorpus {
  FoldData folds;
  std::vector<int> planted;  // informative feature ids, 1-based
  SyntheticLandscape landscape;
};

SyntheticCorpus make_synthetic(const SyntheticCorpusSpec& spec);
SyntheticCorpus make_synthetic(int n, int queries, std::uint64_t seed);

// Writes train.txt / vali.txt / test.txt plus landscape.json and meta.json.
void write_synthetic_dir(const SyntheticCorpus& corpus,
                         const std::filesystem::path& dir);

}  // namespace rankanneal
