#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "envelope.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "special_fn.hpp"
#include "spectral.hpp"

namespace ngg {

struct AdaptConfig {
  int r_max = 4;
  double kappa = 0.25;
  std::int64_t n = 0;
  bool include_zero = false;  // adds R = 0 to the candidate set

  // Candidate resolutions {1, ..., r_max} (or {0, ..., r_max}).
  std::vector<int> resolutions() const {
    std::vector<int> out;
    for (int R = include_zero ? 0 : 1; R <= r_max; ++R) out.push_back(R);
    return out;
  }

  // strict: 2 R~(r_max) <= n; otherwise only n >= R~(r_max).
  void validate(const HarmonicBasis& basis, bool strict = true) const {
    if (!(kappa > 0)) throw ArgumentError("kappa must be positive");
    if (r_max < (include_zero ? 0 : 1)) throw ArgumentError("r_max must be at least 1");
    if (r_max > basis.max_degree()) throw ArgumentError("r_max exceeds the basis degree");
    const std::int64_t cum = basis.cumulative_dim(r_max);
    if (strict && 2 * cum > n)
      throw ArgumentError("need 2 R~(r_max) <= n (R~ = " + std::to_string(cum) + ", n = " +
                          std::to_string(n) + ")");
    if (cum > n)
      throw ArgumentError("need R~(r_max) <= n (R~ = " + std::to_string(cum) + ", n = " +
                          std::to_string(n) + ")");
  }
};

// kappa * sqrt(R~ log n / n), natural log.
inline double gl_penalty(std::int64_t cum_dim, std::int64_t n, double kappa) {
  const double nn = static_cast<double>(n);
  return kappa * std::sqrt(static_cast<double>(cum_dim) * std::log(nn) / nn);
}

struct AdaptRow {
  int R = 0;
  double bias = 0.0;     // B(R)
  double penalty = 0.0;  // kappa sqrt(R~ log n / n)
  double objective = 0.0;
};

struct AdaptResult {
  int selected_R = 0;
  std::vector<AdaptRow> per_R;
  std::map<int, SpectrumEstimate> estimates;
  Envelope envelope;
};

// B(R) = max_{R'} [ delta2(lambda^{R'}, lambda^{min(R', R)}) - kappa sqrt(R~' log n / n) ]
// over expanded estimate vectors; not floored at zero.
inline double bias_proxy(const std::map<int, std::vector<double>>& expanded,
                         const std::map<int, std::int64_t>& cum_dims, int R, double kappa,
                         std::int64_t n) {
  if (!expanded.contains(R)) throw ArgumentError("missing estimate for R = " + std::to_string(R));
  double best = -INFINITY;
  for (const auto& [r_other, vec] : expanded) {
    const int low = std::min(r_other, R);
    const auto it = expanded.find(low);
    if (it == expanded.end()) throw ArgumentError("missing estimate for R = " + std::to_string(low));
    const auto cum = cum_dims.find(r_other);
    if (cum == cum_dims.end()) throw ArgumentError("missing R~ for R = " + std::to_string(r_other));
    best = std::max(best, delta2(vec, it->second) - gl_penalty(cum->second, n, kappa));
  }
  return best;
}

namespace detail {

inline void expand_all(const std::map<int, SpectrumEstimate>& estimates, const AdaptConfig& config,
                       const HarmonicBasis& basis, std::map<int, std::vector<double>>& expanded,
                       std::map<int, std::int64_t>& cum) {
  for (int R : config.resolutions()) {
    const auto it = estimates.find(R);
    if (it == estimates.end()) throw ArgumentError("missing estimate for R = " + std::to_string(R));
    expanded[R] = estimate_vector(it->second, basis.dims());
    cum[R] = basis.cumulative_dim(R);
  }
}

}  // namespace detail

inline double bias_proxy(const std::map<int, SpectrumEstimate>& estimates, int R,
                         const AdaptConfig& config, const HarmonicBasis& basis) {
  std::map<int, std::vector<double>> expanded;
  std::map<int, std::int64_t> cum;
  detail::expand_all(estimates, config, basis, expanded, cum);
  return bias_proxy(expanded, cum, R, config.kappa, config.n);
}

// Step 8 reconstruction: t -> clamp(sum_l p^_l c_l G_l(t), 0, 1).
inline Envelope reconstruct_envelope(const SpectrumEstimate& est, const HarmonicBasis& basis,
                                     bool clamp = true) {
  if (est.R > basis.max_degree()) throw ArgumentError("resolution exceeds the basis degree");
  auto stages = est.stage_values;
  auto eval = [basis, stages, clamp](double t) {
    std::vector<double> z(stages.size());
    basis.zonal_all(t, z);
    double v = 0.0;
    for (std::size_t l = 0; l < stages.size(); ++l) v += stages[l] * z[l];
    return clamp ? std::clamp(v, 0.0, 1.0) : v;
  };
  // Only the unclamped reconstruction is exactly the stage expansion.
  std::optional<std::vector<std::pair<int, double>>> known;
  if (!clamp) {
    known.emplace();
    for (std::size_t l = 0; l < stages.size(); ++l) known->emplace_back(static_cast<int>(l), stages[l]);
  }
  return {std::move(eval), "estimate(R=" + std::to_string(est.R) + ")", std::move(known), {},
          basis.space()};
}

// R^ = argmin_R { B(R) + penalty(R) }, ties to the smallest R.
inline AdaptResult select_resolution(const std::map<int, SpectrumEstimate>& estimates,
                                     const AdaptConfig& config, const HarmonicBasis& basis) {
  std::map<int, std::vector<double>> expanded;
  std::map<int, std::int64_t> cum;
  detail::expand_all(estimates, config, basis, expanded, cum);
  AdaptResult result;
  bool first = true;
  double best = 0.0;
  for (const auto& [R, vec] : expanded) {
    AdaptRow row;
    row.R = R;
    row.bias = bias_proxy(expanded, cum, R, config.kappa, config.n);
    row.penalty = gl_penalty(cum[R], config.n, config.kappa);
    row.objective = row.bias + row.penalty;
    result.per_R.push_back(row);
    if (first || row.objective < best) {
      first = false;
      best = row.objective;
      result.selected_R = R;
    }
    result.estimates.emplace(R, estimates.at(R));
  }
  result.envelope = reconstruct_envelope(result.estimates.at(result.selected_R), basis);
  return result;
}

// Steps 2-8 on an observed spectrum of A/n.
inline AdaptResult adaptive_estimate(const Spectrum& spectrum, const HarmonicBasis& basis,
                                     const AdaptConfig& config) {
  std::map<int, SpectrumEstimate> estimates;
  for (int R : config.resolutions()) estimates.emplace(R, fit_resolution(spectrum, basis, R));
  return select_resolution(estimates, config, basis);
}

}  // namespace ngg
