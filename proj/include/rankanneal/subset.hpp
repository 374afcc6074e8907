#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rankanneal/rng.hpp"

namespace rankanneal {

// Search state: a fixed-length bit array over n features. Bit i set means
// feature i+1 is included. The set-bit count is cached.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  explicit FeatureSubset(std::size_t n_features);

  static FeatureSubset all_features(std::size_t n_features);
  static FeatureSubset from_indices(std::size_t n_features,
                                    const std::vector<std::size_t>& indices);

  std::size_t size() const { return n_; }
  std::size_t count() const { return k_; }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool value);
  void flip(std::size_t i);

  // Selected feature indices (0-based), ascending.
  std::vector<std::size_t> indices() const;

  // Lowercase hex, MSB-first: bit 0 is the high bit of the first nibble,
  // zero-padded to ceil(n/4) digits.
  std::string to_hex() const;
  static FeatureSubset from_hex(const std::string& hex, std::size_t n_features);

  bool operator==(const FeatureSubset& other) const = default;
  bool lex_less(const FeatureSubset& other) const;

  std::uint64_t hash() const;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
};

struct FeatureSubsetHash {
  std::size_t operator()(const FeatureSubset& s) const {
    return static_cast<std::size_t>(s.hash());
  }
};

enum class NeighborhoodKind { swap, insertion };

std::string to_string(NeighborhoodKind kind);
NeighborhoodKind neighborhood_from_string(const std::string& name);

// Uniformly random k-subset of n features. Requires 1 <= k <= n-1.
FeatureSubset random_subset(std::size_t n, std::size_t k, SplitRng& rng);

// Clear one random set bit and set one random clear bit. Hamming distance
// from the input is exactly 2; the set-bit count is preserved.
FeatureSubset swap_neighbor(const FeatureSubset& state, SplitRng& rng);

// Move the bit at position j to position i, shifting the window between them
// by one: a cyclic rotation of [min(i,j)..max(i,j)].
FeatureSubset insertion_apply(const FeatureSubset& state, std::size_t i,
                              std::size_t j);

struct InsertionMove {
  FeatureSubset state;
  std::size_t i = 0;
  std::size_t j = 0;
};

// Random insertion move with i != j (equal positions are redrawn).
InsertionMove insertion_neighbor_move(const FeatureSubset& state,
                                      SplitRng& rng);
FeatureSubset insertion_neighbor(const FeatureSubset& state, SplitRng& rng);

FeatureSubset neighbor(const FeatureSubset& state, NeighborhoodKind kind,
                       SplitRng& rng);

// All distinct swap neighbors; size is k*(n-k).
std::vector<FeatureSubset> enumerate_swap_neighbors(const FeatureSubset& state);

// C(n, k), saturating at cap.
std::uint64_t binomial_capped(std::size_t n, std::size_t k,
                              std::uint64_t cap = ~std::uint64_t{0});

}  // namespace rankanneal
