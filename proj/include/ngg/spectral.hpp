#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace ngg {

struct Spectrum {
  std::vector<double> values;  // descending
  Eigen::Index source_dim = 0;
  // A-posteriori consistency bound from the trace and Frobenius invariants.
  double residual_bound = 0.0;
};

// All eigenvalues of a dense symmetric matrix, sorted descending. Eigenvectors
// are never formed.
inline Spectrum eigenvalues_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("matrix must be square");
  const Eigen::Index n = m.rows();
  Spectrum s;
  s.source_dim = n;
  if (n == 0) return s;
  if (!m.allFinite()) throw DomainError("matrix has non-finite entries");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError("matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SolverError("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();  // ascending
  s.values.assign(ev.data(), ev.data() + n);
  std::reverse(s.values.begin(), s.values.end());

  double sum = 0.0, sum_sq = 0.0;
  for (double v : s.values) {
    sum += v;
    sum_sq += v * v;
  }
  const double fro = m.norm();
  const double trace_gap = std::abs(sum - m.trace());
  const double fro_gap = fro > 0 ? std::abs(sum_sq - fro * fro) / fro : std::sqrt(sum_sq);
  s.residual_bound = std::max(trace_gap, fro_gap);
  if (s.residual_bound > 1e-9 * static_cast<double>(n) * std::max(scale, 1e-300))
    throw SolverError("eigenvalues fail the trace/Frobenius consistency check");
  return s;
}

// Largest absolute eigenvalue of a symmetric matrix.
inline double operator_norm_symmetric(const Eigen::MatrixXd& m) {
  const auto s = eigenvalues_symmetric(m);
  if (s.values.empty()) return 0.0;
  return std::max(std::abs(s.values.front()), std::abs(s.values.back()));
}

// l2 rearrangement distance between two finite multisets, each padded with
// zeros. Non-negative parts are matched largest-to-largest, negative parts
// most-negative-to-most-negative, leftovers against zero. Exact zeros go to
// the non-negative side.
inline double delta2(std::span<const double> x, std::span<const double> y) {
  auto split = [](std::span<const double> v, std::vector<double>& pos, std::vector<double>& neg) {
    for (double a : v) (a >= 0 ? pos : neg).push_back(a);
    std::sort(pos.begin(), pos.end(), std::greater<>());
    std::sort(neg.begin(), neg.end());
  };
  std::vector<double> xp, xn, yp, yn;
  split(x, xp, xn);
  split(y, yp, yn);
  auto tail = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    const std::size_t len = std::max(a.size(), b.size());
    for (std::size_t k = 0; k < len; ++k) {
      const double u = k < a.size() ? a[k] : 0.0;
      const double v = k < b.size() ? b[k] : 0.0;
      acc += (u - v) * (u - v);
    }
    return acc;
  };
  return std::sqrt(tail(xp, yp) + tail(xn, yn));
}

}  // namespace ngg
