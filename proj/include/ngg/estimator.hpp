#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "special_fn.hpp"
#include "spectral.hpp"

namespace ngg {

// Order in which the R+2 blocks {Z, d_0, ..., d_R} occupy the descending
// spectrum. Symbol -1 is the zero block; symbol l >= 0 is the d_l block.
struct BlockOrdering {
  static constexpr int kZero = -1;
  std::vector<int> sequence;

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < sequence.size(); ++i) {
      if (i) s += ",";
      s += sequence[i] == kZero ? std::string("Z") : "d" + std::to_string(sequence[i]);
    }
    return s + "]";
  }

  friend bool operator==(const BlockOrdering&, const BlockOrdering&) = default;
};

inline constexpr int kDefaultOrderingCap = 7;

// All (R+2)! orderings in lexicographic order of the symbol codes (Z first).
inline std::vector<BlockOrdering> enumerate_orderings(int R, int cap = kDefaultOrderingCap) {
  if (R < 0) throw ArgumentError("resolution must be non-negative");
  if (R > cap)
    throw LimitError("resolution " + std::to_string(R) + " exceeds the ordering cap " +
                     std::to_string(cap));
  std::vector<int> symbols(R + 2);
  std::iota(symbols.begin(), symbols.end(), BlockOrdering::kZero);
  std::vector<BlockOrdering> out;
  do {
    out.push_back({symbols});
  } while (std::next_permutation(symbols.begin(), symbols.end()));
  return out;
}

struct StageFit {
  std::vector<double> stage_values;  // p^_0..p^_R
  double score = 0.0;
};

struct SpectrumEstimate {
  int R = 0;
  std::vector<double> stage_values;
  BlockOrdering ordering;
  double score = 0.0;
  std::int64_t n = 0;
};

namespace detail {

struct RunCost {
  double stage = 0.0;
  double cost = 0.0;
};

// Stage mean and squared deviation of values[start, start+len); the zero
// block has stage 0 and cost sum of squares.
inline RunCost run_cost(std::span<const double> values, std::size_t start, std::size_t len,
                        bool zero_block) {
  RunCost rc;
  if (zero_block) {
    for (std::size_t k = start; k < start + len; ++k) rc.cost += values[k] * values[k];
    return rc;
  }
  double sum = 0.0;
  for (std::size_t k = start; k < start + len; ++k) sum += values[k];
  rc.stage = sum / static_cast<double>(len);
  for (std::size_t k = start; k < start + len; ++k) {
    const double e = values[k] - rc.stage;
    rc.cost += e * e;
  }
  return rc;
}

inline std::size_t block_length(int symbol, std::size_t n, std::int64_t cum,
                                std::span<const std::int64_t> dims) {
  return symbol == BlockOrdering::kZero ? n - static_cast<std::size_t>(cum)
                                        : static_cast<std::size_t>(dims[symbol]);
}

inline std::int64_t cumulative(std::span<const std::int64_t> dims, int R) {
  if (R < 0 || static_cast<std::size_t>(R) >= dims.size())
    throw ArgumentError("not enough multiplicities for resolution " + std::to_string(R));
  std::int64_t cum = 0;
  for (int l = 0; l <= R; ++l) cum += dims[l];
  return cum;
}

// Score in canonical order: stage blocks d_0..d_R, then the zero block.
inline double canonical_score(std::span<const double> stage_costs, double zero_cost) {
  double score = 0.0;
  for (double c : stage_costs) score += c;
  return score + zero_cost;
}

}  // namespace detail

// Fits one ordering: the descending spectrum is cut into consecutive runs with
// lengths given by the ordering; each d_l run yields its mean as p^_l and the
// zero run is scored against 0.
inline StageFit score_ordering(std::span<const double> sorted_desc, const BlockOrdering& ordering,
                               std::span<const std::int64_t> dims) {
  const int R = static_cast<int>(ordering.sequence.size()) - 2;
  const std::int64_t cum = detail::cumulative(dims, R);
  const std::size_t n = sorted_desc.size();
  if (static_cast<std::int64_t>(n) < cum) throw ArgumentError("spectrum shorter than R~");
  StageFit fit;
  fit.stage_values.assign(R + 1, 0.0);
  std::vector<double> costs(R + 1, 0.0);
  double zero_cost = 0.0;
  std::size_t start = 0;
  for (int symbol : ordering.sequence) {
    const std::size_t len = detail::block_length(symbol, n, cum, dims);
    const auto rc = detail::run_cost(sorted_desc, start, len, symbol == BlockOrdering::kZero);
    if (symbol == BlockOrdering::kZero) {
      zero_cost = rc.cost;
    } else {
      fit.stage_values[symbol] = rc.stage;
      costs[symbol] = rc.cost;
    }
    start += len;
  }
  if (start != n) throw std::logic_error("block lengths do not cover the spectrum");
  fit.score = detail::canonical_score(costs, zero_cost);
  return fit;
}

// Minimizer over the admissible stage spectra of resolution R: the best of
// the (R+2)! block orderings (first in enumeration order on ties). Run costs
// depend only on (set of blocks before, block), so they are memoized.
inline SpectrumEstimate fit_resolution(std::span<const double> sorted_desc,
                                       std::span<const std::int64_t> dims, int R,
                                       int cap = kDefaultOrderingCap) {
  if (R < 0) throw ArgumentError("resolution must be non-negative");
  const std::int64_t cum = detail::cumulative(dims, R);
  const std::size_t n = sorted_desc.size();
  if (static_cast<std::int64_t>(n) < cum)
    throw ArgumentError("need n >= R~ (n = " + std::to_string(n) + ", R~ = " + std::to_string(cum) + ")");
  if (!std::is_sorted(sorted_desc.begin(), sorted_desc.end(), std::greater<>()))
    throw ArgumentError("spectrum must be sorted in decreasing order");

  const auto orderings = enumerate_orderings(R, cap);
  const int blocks = R + 2;
  const std::size_t masks = std::size_t{1} << blocks;
  // memo[mask * blocks + slot], slot = symbol + 1
  std::vector<detail::RunCost> memo(masks * blocks);
  std::vector<char> known(masks * blocks, 0);
  std::vector<std::size_t> offset(masks, 0);
  for (std::size_t mask = 1; mask < masks; ++mask) {
    const int low = std::countr_zero(mask);
    offset[mask] = offset[mask & (mask - 1)] + detail::block_length(low - 1, n, cum, dims);
  }

  SpectrumEstimate best;
  best.R = R;
  best.n = static_cast<std::int64_t>(n);
  bool have_best = false;
  std::vector<double> costs(R + 1), stages(R + 1);
  for (const auto& ordering : orderings) {
    std::size_t mask = 0;
    double zero_cost = 0.0;
    for (int symbol : ordering.sequence) {
      const int slot = symbol + 1;
      const std::size_t key = mask * blocks + slot;
      if (!known[key]) {
        memo[key] = detail::run_cost(sorted_desc, offset[mask], detail::block_length(symbol, n, cum, dims),
                                     symbol == BlockOrdering::kZero);
        known[key] = 1;
      }
      if (symbol == BlockOrdering::kZero) {
        zero_cost = memo[key].cost;
      } else {
        costs[symbol] = memo[key].cost;
        stages[symbol] = memo[key].stage;
      }
      mask |= std::size_t{1} << slot;
    }
    const double score = detail::canonical_score(costs, zero_cost);
    if (!have_best || score < best.score) {
      have_best = true;
      best.score = score;
      best.stage_values = stages;
      best.ordering = ordering;
    }
  }
  return best;
}

inline SpectrumEstimate fit_resolution(const Spectrum& spectrum, const HarmonicBasis& basis, int R,
                                       int cap = kDefaultOrderingCap) {
  if (R > basis.max_degree()) throw ArgumentError("resolution exceeds the basis degree");
  return fit_resolution(spectrum.values, basis.dims(), R, cap);
}

// lambda^R: stage values repeated with multiplicities d_l (length R~).
inline std::vector<double> estimate_vector(std::span<const double> stage_values,
                                           std::span<const std::int64_t> dims) {
  if (stage_values.size() > dims.size()) throw ArgumentError("not enough multiplicities");
  std::vector<double> out;
  for (std::size_t l = 0; l < stage_values.size(); ++l) out.insert(out.end(), dims[l], stage_values[l]);
  return out;
}

inline std::vector<double> estimate_vector(const SpectrumEstimate& est, std::span<const std::int64_t> dims) {
  return estimate_vector(est.stage_values, dims);
}

}  // namespace ngg
