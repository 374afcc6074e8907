#include "rankanneal/subset.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace rankanneal {

namespace {

std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

}  // namespace

FeatureSubset::FeatureSubset(std::size_t n_features)
    : words_(word_count(n_features), 0), n_(n_features) {}

FeatureSubset FeatureSubset::all_features(std::size_t n_features) {
  FeatureSubset s(n_features);
  for (std::size_t i = 0; i < n_features; ++i) s.set(i, true);
  return s;
}

FeatureSubset FeatureSubset::from_indices(
    std::size_t n_features, const std::vector<std::size_t>& indices) {
  FeatureSubset s(n_features);
  for (std::size_t i : indices) {
    if (i >= n_features) throw std::out_of_range("feature index out of range");
    s.set(i, true);
  }
  return s;
}

void FeatureSubset::set(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  std::uint64_t& w = words_[i >> 6];
  const bool was = w & mask;
  if (was == value) return;
  w ^= mask;
  k_ += value ? 1 : std::size_t(-1);
}

void FeatureSubset::flip(std::size_t i) { set(i, !test(i)); }

std::vector<std::size_t> FeatureSubset::indices() const {
  std::vector<std::size_t> out;
  out.reserve(k_);
  for (std::size_t i = 0; i < n_; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

std::string FeatureSubset::to_hex() const {
  static const char digits[] = "0123456789abcdef";
  const std::size_t n_digits = (n_ + 3) / 4;
  std::string out(n_digits, '0');
  for (std::size_t d = 0; d < n_digits; ++d) {
    unsigned nibble = 0;
    for (unsigned b = 0; b < 4; ++b) {
      const std::size_t pos = 4 * d + b;
      if (pos < n_ && test(pos)) nibble |= 8u >> b;
    }
    out[d] = digits[nibble];
  }
  return out;
}

FeatureSubset FeatureSubset::from_hex(const std::string& hex,
                                      std::size_t n_features) {
  const std::size_t n_digits = (n_features + 3) / 4;
  if (hex.size() != n_digits)
    throw std::invalid_argument("subset hex has wrong length for n=" +
                                std::to_string(n_features));
  FeatureSubset s(n_features);
  for (std::size_t d = 0; d < n_digits; ++d) {
    const char c = hex[d];
    unsigned nibble;
    if (c >= '0' && c <= '9')
      nibble = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f')
      nibble = static_cast<unsigned>(c - 'a') + 10;
    else
      throw std::invalid_argument("invalid hex digit in subset string");
    for (unsigned b = 0; b < 4; ++b) {
      if (!(nibble & (8u >> b))) continue;
      const std::size_t pos = 4 * d + b;
      if (pos >= n_features)
        throw std::invalid_argument("subset hex sets bits beyond n");
      s.set(pos, true);
    }
  }
  return s;
}

bool FeatureSubset::lex_less(const FeatureSubset& other) const {
  const std::size_t n = std::min(n_, other.n_);
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = test(i), b = other.test(i);
    if (a != b) return b;  // '0' sorts before '1'
  }
  return n_ < other.n_;
}

std::uint64_t FeatureSubset::hash() const {
  std::uint64_t h = SplitRng::mix(0x243f6a8885a308d3ULL, n_);
  for (std::uint64_t w : words_) h = SplitRng::mix(h, w);
  return h;
}

std::string to_string(NeighborhoodKind kind) {
  return kind == NeighborhoodKind::swap ? "swap" : "insertion";
}

NeighborhoodKind neighborhood_from_string(const std::string& name) {
  if (name == "swap" || name == "n1") return NeighborhoodKind::swap;
  if (name == "insertion" || name == "n2") return NeighborhoodKind::insertion;
  throw std::invalid_argument("unknown neighborhood: " + name);
}

FeatureSubset random_subset(std::size_t n, std::size_t k, SplitRng& rng) {
  if (k < 1 || k >= n)
    throw std::invalid_argument("subset size k must satisfy 1 <= k <= n-1");
  // Partial Fisher-Yates; the first k slots are a uniform k-subset.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  FeatureSubset s(n);
  for (std::size_t i = 0; i < k; ++i) s.set(idx[i], true);
  return s;
}

FeatureSubset swap_neighbor(const FeatureSubset& state, SplitRng& rng) {
  const std::size_t n = state.size();
  const std::size_t k = state.count();
  if (k < 1 || k >= n)
    throw std::invalid_argument("swap_neighbor needs a set and a clear bit");
  std::size_t one_rank = rng.uniform_index(k);
  std::size_t zero_rank = rng.uniform_index(n - k);
  FeatureSubset next = state;
  for (std::size_t i = 0; i < n; ++i) {
    if (state.test(i)) {
      if (one_rank-- == 0) next.set(i, false);
    } else {
      if (zero_rank-- == 0) next.set(i, true);
    }
  }
  return next;
}

FeatureSubset insertion_apply(const FeatureSubset& state, std::size_t i,
                              std::size_t j) {
  const std::size_t n = state.size();
  if (i >= n || j >= n) throw std::out_of_range("insertion position out of range");
  FeatureSubset next = state;
  if (i < j) {
    // Right rotation of [i..j]: the bit at j lands on i.
    next.set(i, state.test(j));
    for (std::size_t p = i; p < j; ++p) next.set(p + 1, state.test(p));
  } else if (i > j) {
    // Left rotation of [j..i]: the bit at j lands on i.
    for (std::size_t p = j; p < i; ++p) next.set(p, state.test(p + 1));
    next.set(i, state.test(j));
  }
  return next;
}

InsertionMove insertion_neighbor_move(const FeatureSubset& state,
                                      SplitRng& rng) {
  const std::size_t n = state.size();
  if (n < 2) throw std::invalid_argument("insertion needs n >= 2");
  const std::size_t i = rng.uniform_index(n);
  std::size_t j = rng.uniform_index(n);
  while (j == i) j = rng.uniform_index(n);
  return {insertion_apply(state, i, j), i, j};
}

FeatureSubset insertion_neighbor(const FeatureSubset& state, SplitRng& rng) {
  return insertion_neighbor_move(state, rng).state;
}

FeatureSubset neighbor(const FeatureSubset& state, NeighborhoodKind kind,
                       SplitRng& rng) {
  return kind == NeighborhoodKind::swap ? swap_neighbor(state, rng)
                                        : insertion_neighbor(state, rng);
}

std::vector<FeatureSubset> enumerate_swap_neighbors(
    const FeatureSubset& state) {
  const std::size_t n = state.size();
  std::vector<FeatureSubset> out;
  out.reserve(state.count() * (n - state.count()));
  for (std::size_t one = 0; one < n; ++one) {
    if (!state.test(one)) continue;
    for (std::size_t zero = 0; zero < n; ++zero) {
      if (state.test(zero)) continue;
      FeatureSubset next = state;
      next.set(one, false);
      next.set(zero, true);
      out.push_back(std::move(next));
    }
  }
  return out;
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  using u128 = unsigned __int128;
  u128 result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > cap) return cap;
  }
  return static_cast<std::uint64_t>(result);
}

}  // namespace rankanneal
