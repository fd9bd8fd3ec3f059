#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "adapt.hpp"
#include "envelope.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "special_fn.hpp"
#include "spectral.hpp"

#ifndef NGG_BUILD_ID
#define NGG_BUILD_ID "unknown"
#endif

namespace ngg {

inline constexpr const char* build_id() { return NGG_BUILD_ID; }

// Worker count: explicit request, else NGG_THREADS, else hardware concurrency.
// NGG_THREADS also caps explicit requests.
inline int resolve_threads(int requested = 0) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int cap = 0;
  if (const char* env = std::getenv("NGG_THREADS")) cap = std::atoi(env);
  int n = requested > 0 ? requested : (cap > 0 ? cap : hw);
  if (cap > 0) n = std::min(n, cap);
  return std::max(1, n);
}

// Runs body(k) for k in [0, count) on up to `threads` workers. Results must be
// written to per-k slots; the caller merges them in index order.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = next++; k < count; k = next++) body(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Latent points from seed, edges from an independent stream of the same seed.
inline GraphSample simulate_graph(const LatentSpace& space, const Envelope& p, Eigen::Index n,
                                  std::uint64_t seed, bool keep_theta0) {
  const auto latent = sample_latent(space, n, seed);
  auto g = generate_graph(latent, p, derive_seed(seed, 1), keep_theta0);
  g.seed = seed;
  return g;
}

// True coefficients p*_0..p*_L: analytic when the envelope carries them for
// this space, otherwise by quadrature up to max_degree, truncated at the first
// L whose tail mass sum_{l > L} d_l p*_l^2 is below tail_tol.
struct TruthSpectrum {
  std::vector<double> coefficients;
  bool analytic = false;
  double tail_mass = 0.0;
};

inline TruthSpectrum true_coefficients(const LatentSpace& space, const Envelope& p, int max_degree = 64,
                                       double tail_tol = 1e-12) {
  TruthSpectrum truth;
  if (p.has_known_coeffs_for(space)) {
    truth.analytic = true;
    int top = 0;
    for (auto [l, v] : *p.known_coeffs) top = std::max(top, l);
    truth.coefficients.assign(top + 1, 0.0);
    for (auto [l, v] : *p.known_coeffs) truth.coefficients[l] = v;
    return truth;
  }
  HarmonicBasis basis(space, max_degree);
  const auto c = envelope_coefficients(basis, p, max_degree);
  std::vector<double> tail(max_degree + 2, 0.0);  // tail[L] = sum_{l >= L}
  for (int l = max_degree; l >= 0; --l)
    tail[l] = tail[l + 1] + static_cast<double>(basis.dim(l)) * c[l] * c[l];
  int L = max_degree;
  for (int k = 0; k <= max_degree; ++k)
    if (tail[k + 1] < tail_tol) {
      L = k;
      break;
    }
  truth.coefficients.assign(c.begin(), c.begin() + L + 1);
  truth.tail_mass = tail[L + 1];
  return truth;
}

// lambda* expanded with multiplicities, optionally truncated at resolution R.
inline std::vector<double> truth_vector(const LatentSpace& space, const TruthSpectrum& truth,
                                        std::optional<int> R = std::nullopt) {
  const int top = static_cast<int>(truth.coefficients.size()) - 1;
  const int upto = R ? std::min(*R, top) : top;
  std::vector<double> out;
  for (int l = 0; l <= upto; ++l)
    out.insert(out.end(), dim_of_degree(space, l), truth.coefficients[l]);
  return out;
}

struct ExperimentConfig {
  LatentSpace space = LatentSpace::sphere(3);
  Envelope envelope = builtin_envelope(5);
  std::string envelope_spec = "p5";
  std::vector<std::int64_t> n_values{2000};
  int replicates = 1;
  int r_max = 4;
  double kappa = 0.25;
  bool include_zero = false;
  std::optional<int> fixed_R;  // skip adaptation and fit only this R
  std::uint64_t base_seed = 0;
  int threads = 0;
  int truth_degree = 64;

  std::vector<int> resolutions() const {
    if (fixed_R) return {*fixed_R};
    return AdaptConfig{r_max, kappa, 0, include_zero}.resolutions();
  }

  void validate() const {
    space.validate();
    if (replicates < 1) throw ArgumentError("replicates must be at least 1");
    if (n_values.empty()) throw ArgumentError("at least one n is required");
    if (!(kappa > 0)) throw ArgumentError("kappa must be positive");
    if (fixed_R && *fixed_R < 0) throw ArgumentError("fixed R must be non-negative");
    if (!fixed_R && r_max < (include_zero ? 0 : 1)) throw ArgumentError("r_max must be at least 1");
    const int top = fixed_R ? *fixed_R : r_max;
    if (top > kDefaultOrderingCap) throw LimitError("resolution exceeds the ordering cap");
    const std::int64_t cum = cumulative_dim(space, top);
    for (auto n : n_values)
      if (n < 2 * cum)
        throw ArgumentError("every n must be at least 2 R~ = " + std::to_string(2 * cum) + " (got " +
                            std::to_string(n) + ")");
  }
};

struct PhaseTimes {
  double sample = 0, eigensolve = 0, fit = 0, adapt = 0;
};

struct ReplicateRecord {
  std::int64_t n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
  std::int64_t edges = 0;
  int selected_R = 0;
  std::map<int, SpectrumEstimate> estimates;
  std::vector<AdaptRow> per_R;        // empty for fixed-R runs
  std::map<int, double> risk_fixed;   // delta2^2(lambda^R, lambda*^R)
  std::map<int, double> risk_full;    // delta2^2(lambda^R, lambda*)
  double selected_risk = 0.0;         // delta2^2(lambda^{R^}, lambda*)
  std::vector<double> coef_error;     // p^_l - p*_l at R^
  PhaseTimes times;

  bool ok() const { return error.empty(); }
};

struct ResolutionSummary {
  int R = 0;
  double mean_risk_fixed = 0, mean_risk_full = 0;
  std::vector<double> mean_stage, bias, mean_abs_error;  // per degree l <= R
};

struct SizeSummary {
  std::int64_t n = 0;
  int succeeded = 0, failed = 0;
  std::map<int, int> selection_histogram;
  double mean_selected_risk = 0, median_selected_risk = 0;
  std::vector<ResolutionSummary> per_R;
};

struct ExperimentReport {
  ExperimentConfig config;
  TruthSpectrum truth;
  std::vector<ReplicateRecord> records;  // ordered by (n, replicate)
  std::vector<SizeSummary> summaries;
  std::optional<double> risk_slope;      // log-log slope of mean selected risk vs n
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return NAN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Least-squares slope of log y against log x; nullopt when undefined.
inline std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k)
    if (x[k] > 0 && y[k] > 0 && std::isfinite(y[k])) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  if (lx.size() < 2 || lx.size() != x.size()) return std::nullopt;
  const double mx = mean_of(lx), my = mean_of(ly);
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double sq(double x) { return x * x; }

inline void run_replicate(const ExperimentConfig& cfg, const HarmonicBasis& basis, const TruthSpectrum& truth,
                          ReplicateRecord& rec) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const auto g = simulate_graph(cfg.space, cfg.envelope, rec.n, rec.seed, false);
  rec.edges = g.adjacency.edge_count();
  rec.times.sample = seconds_since(t0);

  t0 = clock::now();
  const auto spectrum = eigenvalues_symmetric(g.adjacency.to_dense(1.0 / static_cast<double>(rec.n)));
  rec.times.eigensolve = seconds_since(t0);

  t0 = clock::now();
  for (int R : cfg.resolutions()) rec.estimates.emplace(R, fit_resolution(spectrum, basis, R));
  rec.times.fit = seconds_since(t0);

  t0 = clock::now();
  if (cfg.fixed_R) {
    rec.selected_R = *cfg.fixed_R;
  } else {
    AdaptConfig ac{cfg.r_max, cfg.kappa, rec.n, cfg.include_zero};
    const auto result = select_resolution(rec.estimates, ac, basis);
    rec.selected_R = result.selected_R;
    rec.per_R = result.per_R;
  }
  rec.times.adapt = seconds_since(t0);

  const auto full = truth_vector(cfg.space, truth);
  for (const auto& [R, est] : rec.estimates) {
    const auto v = estimate_vector(est, basis.dims());
    rec.risk_fixed[R] = sq(delta2(v, truth_vector(cfg.space, truth, R)));
    rec.risk_full[R] = sq(delta2(v, full));
  }
  rec.selected_risk = rec.risk_full.at(rec.selected_R);
  const auto& sel = rec.estimates.at(rec.selected_R).stage_values;
  for (std::size_t l = 0; l < sel.size(); ++l) {
    const double t = l < truth.coefficients.size() ? truth.coefficients[l] : 0.0;
    rec.coef_error.push_back(sel[l] - t);
  }
}

inline SizeSummary summarize(const ExperimentConfig& cfg, const TruthSpectrum& truth,
                             const std::vector<const ReplicateRecord*>& recs, std::int64_t n) {
  SizeSummary s;
  s.n = n;
  std::vector<double> sel;
  for (const auto* r : recs) {
    if (!r->ok()) {
      ++s.failed;
      continue;
    }
    ++s.succeeded;
    ++s.selection_histogram[r->selected_R];
    sel.push_back(r->selected_risk);
  }
  s.mean_selected_risk = mean_of(sel);
  s.median_selected_risk = median_of(sel);
  for (int R : cfg.resolutions()) {
    ResolutionSummary rs;
    rs.R = R;
    std::vector<double> fixed, full;
    rs.mean_stage.assign(R + 1, 0.0);
    rs.bias.assign(R + 1, 0.0);
    rs.mean_abs_error.assign(R + 1, 0.0);
    for (const auto* r : recs) {
      if (!r->ok()) continue;
      fixed.push_back(r->risk_fixed.at(R));
      full.push_back(r->risk_full.at(R));
      const auto& st = r->estimates.at(R).stage_values;
      for (int l = 0; l <= R; ++l) {
        const double t = l < static_cast<int>(truth.coefficients.size()) ? truth.coefficients[l] : 0.0;
        rs.mean_stage[l] += st[l];
        rs.mean_abs_error[l] += std::abs(st[l] - t);
      }
    }
    const double k = static_cast<double>(fixed.size());
    for (int l = 0; l <= R; ++l) {
      const double t = l < static_cast<int>(truth.coefficients.size()) ? truth.coefficients[l] : 0.0;
      rs.mean_stage[l] = k > 0 ? rs.mean_stage[l] / k : NAN;
      rs.bias[l] = rs.mean_stage[l] - t;
      rs.mean_abs_error[l] = k > 0 ? rs.mean_abs_error[l] / k : NAN;
    }
    rs.mean_risk_fixed = mean_of(fixed);
    rs.mean_risk_full = mean_of(full);
    s.per_R.push_back(std::move(rs));
  }
  return s;
}

}  // namespace detail

// For each n and replicate r (seed = base_seed + r, shared across n so sizes
// are paired): sample, generate, eigensolve A/n, fit every candidate R, adapt,
// and score against the true spectrum. A failing replicate keeps its error
// message and is excluded from the aggregates.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  report.truth = true_coefficients(config.space, config.envelope, config.truth_degree);
  const auto res = config.resolutions();
  const HarmonicBasis basis(config.space, *std::max_element(res.begin(), res.end()));

  for (auto n : config.n_values)
    for (int r = 0; r < config.replicates; ++r) {
      ReplicateRecord rec;
      rec.n = n;
      rec.replicate = r;
      rec.seed = config.base_seed + static_cast<std::uint64_t>(r);
      report.records.push_back(std::move(rec));
    }
  parallel_for(report.records.size(), resolve_threads(config.threads), [&](std::size_t k) {
    auto& rec = report.records[k];
    try {
      detail::run_replicate(config, basis, report.truth, rec);
    } catch (const std::exception& e) {
      rec.error = e.what();
      if (rec.error.empty()) rec.error = "unknown error";
    }
  });

  std::vector<double> ns, risks;
  for (auto n : config.n_values) {
    std::vector<const ReplicateRecord*> recs;
    for (const auto& r : report.records)
      if (r.n == n) recs.push_back(&r);
    report.summaries.push_back(detail::summarize(config, report.truth, recs, n));
    ns.push_back(static_cast<double>(n));
    risks.push_back(report.summaries.back().mean_selected_risk);
  }
  report.risk_slope = loglog_slope(ns, risks);
  return report;
}

// Mean fixed-R risks per (n, R): delta2^2 against lambda*^R and against lambda*.
struct RiskPoint {
  std::int64_t n = 0;
  int R = 0;
  double risk_truncated = 0;
  double risk_full = 0;
};

inline std::vector<RiskPoint> risk_table(const ExperimentReport& report) {
  std::vector<RiskPoint> out;
  for (const auto& s : report.summaries)
    for (const auto& r : s.per_R) out.push_back({s.n, r.R, r.mean_risk_fixed, r.mean_risk_full});
  return out;
}

inline std::vector<RiskPoint> risk_curve(const ExperimentConfig& config) {
  return risk_table(run_experiment(config));
}

struct ConcentrationRow {
  std::int64_t n = 0;
  std::vector<double> op_norm;    // ||A/n - Theta0/n||_op per replicate
  std::vector<double> delta2_sq;  // delta2(lambda(Theta0/n), lambda*)^2 per replicate
  double mean_op_norm = 0, mean_delta2_sq = 0;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  std::optional<double> op_norm_slope, delta2_slope;
};

// Empirical rates of ||T^_n - T_n||_op and delta2(lambda(T_n), lambda*) in n.
// Replicate r uses seed + r for every n (paired seeds).
inline ConcentrationReport concentration_check(const Envelope& p, const LatentSpace& space,
                                               const std::vector<std::int64_t>& n_values, int replicates,
                                               std::uint64_t seed, int threads = 0) {
  if (replicates < 1) throw ArgumentError("replicates must be at least 1");
  const auto truth = true_coefficients(space, p);
  const auto full = truth_vector(space, truth);
  ConcentrationReport report;
  for (auto n : n_values) {
    if (n < 1) throw ArgumentError("n must be positive");
    ConcentrationRow row;
    row.n = n;
    row.op_norm.assign(replicates, 0.0);
    row.delta2_sq.assign(replicates, 0.0);
    report.rows.push_back(std::move(row));
  }
  const std::size_t total = n_values.size() * static_cast<std::size_t>(replicates);
  parallel_for(total, resolve_threads(threads), [&](std::size_t k) {
    auto& row = report.rows[k / replicates];
    const int r = static_cast<int>(k % replicates);
    const auto g = simulate_graph(space, p, row.n, seed + static_cast<std::uint64_t>(r), true);
    const double inv_n = 1.0 / static_cast<double>(row.n);
    const Eigen::MatrixXd tn = *g.theta0 * inv_n;
    row.op_norm[r] = operator_norm_symmetric(g.adjacency.to_dense(inv_n) - tn);
    const auto lam = eigenvalues_symmetric(tn);
    row.delta2_sq[r] = detail::sq(delta2(lam.values, full));
  });
  std::vector<double> ns, ops, ds;
  for (auto& row : report.rows) {
    row.mean_op_norm = mean_of(row.op_norm);
    row.mean_delta2_sq = mean_of(row.delta2_sq);
    ns.push_back(static_cast<double>(row.n));
    ops.push_back(row.mean_op_norm);
    ds.push_back(row.mean_delta2_sq);
  }
  report.op_norm_slope = loglog_slope(ns, ops);
  report.delta2_slope = loglog_slope(ns, ds);
  return report;
}

}  // namespace ngg
