#pragma once

#include <Eigen/Core>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "envelope.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "special_fn.hpp"

namespace ngg {

struct LatentSample {
  LatentSpace space;
  Eigen::MatrixXd points;  // one unit vector per row, space.coordinate_dim() columns
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.rows(); }
};

// Uniform i.i.d. points. Sphere: normalized Gaussian vectors in R^d. Real
// projective space: the same sphere sample, identified with its antipode by
// the cosine map. Complex projective space: normalized complex Gaussian
// vectors in C^d stored as interleaved (re, im) pairs.
inline LatentSample sample_latent(const LatentSpace& space, Eigen::Index n, std::uint64_t seed) {
  space.validate();
  if (n < 1) throw ArgumentError("sample size must be positive");
  if (!space.samplable()) throw DomainError("latent sampling is not supported for " + space.to_string());
  const int cols = space.coordinate_dim();
  LatentSample sample{space, Eigen::MatrixXd(n, cols), seed};
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int k = 0; k < cols; ++k) {
        const double g = rng.normal();
        sample.points(i, k) = g;
        norm2 += g * g;
      }
    } while (norm2 == 0.0);
    sample.points.row(i) /= std::sqrt(norm2);
  }
  return sample;
}

namespace detail {

inline double pairwise_cosine_unchecked(SpaceKind kind, const double* x, const double* y, int cols) {
  double t = 0.0;
  switch (kind) {
    case SpaceKind::Sphere:
      for (int k = 0; k < cols; ++k) t += x[k] * y[k];
      break;
    case SpaceKind::RealProjective: {
      double ip = 0.0;
      for (int k = 0; k < cols; ++k) ip += x[k] * y[k];
      t = 2 * ip * ip - 1;
      break;
    }
    case SpaceKind::ComplexProjective: {
      // <x, y>_C = sum conj(x_k) y_k
      double re = 0.0, im = 0.0;
      for (int k = 0; k < cols; k += 2) {
        re += x[k] * y[k] + x[k + 1] * y[k + 1];
        im += x[k] * y[k + 1] - x[k + 1] * y[k];
      }
      t = 2 * (re * re + im * im) - 1;
      break;
    }
    default:
      throw DomainError("pairwise cosine is not available for this space");
  }
  return std::clamp(t, -1.0, 1.0);
}

inline void check_unit(std::span<const double> x) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw DomainError("latent point is not a unit vector");
}

}  // namespace detail

// cos gamma(x, y): <x,y> on the sphere, 2<x,y>^2 - 1 on RP, 2|<x,y>_C|^2 - 1 on CP.
inline double pairwise_cosine(const LatentSpace& space, std::span<const double> x,
                              std::span<const double> y) {
  if (x.size() != y.size() || static_cast<int>(x.size()) != space.coordinate_dim())
    throw DomainError("point dimension does not match the latent space");
  detail::check_unit(x);
  detail::check_unit(y);
  return detail::pairwise_cosine_unchecked(space.kind, x.data(), y.data(), static_cast<int>(x.size()));
}

// Symmetric 0/1 matrix with zero diagonal, one bit per entry (rows of 64-bit words).
class SymmetricBitMatrix {
 public:
  SymmetricBitMatrix() = default;
  explicit SymmetricBitMatrix(Eigen::Index n)
      : n_(n), words_((n + 63) / 64), bits_(static_cast<std::size_t>(n * words_), 0) {}

  Eigen::Index size() const { return n_; }

  bool operator()(Eigen::Index i, Eigen::Index j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
  }

  void set_edge(Eigen::Index i, Eigen::Index j) {
    if (i == j) throw ArgumentError("self-loops are not allowed");
    bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
    bits_[j * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::int64_t degree(Eigen::Index i) const {
    std::int64_t d = 0;
    for (Eigen::Index w = 0; w < words_; ++w) d += std::popcount(bits_[i * words_ + w]);
    return d;
  }

  std::int64_t edge_count() const {
    std::int64_t total = 0;
    for (auto w : bits_) total += std::popcount(w);
    return total / 2;
  }

  // Dense copy with every entry multiplied by scale (A/n for scale = 1/n).
  Eigen::MatrixXd to_dense(double scale = 1.0) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j)
        if ((*this)(i, j)) m(i, j) = scale;
    return m;
  }

  friend bool operator==(const SymmetricBitMatrix&, const SymmetricBitMatrix&) = default;

 private:
  Eigen::Index n_ = 0;
  Eigen::Index words_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct GraphSample {
  Eigen::Index n = 0;
  SymmetricBitMatrix adjacency;
  std::optional<Eigen::MatrixXd> theta0;
  std::optional<LatentSample> latent;
  std::uint64_t seed = 0;
};

namespace detail {

inline double checked_probability(const Envelope& p, double t) {
  const double v = p(t);
  if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
    throw ModelError("envelope " + p.name + " leaves [0, 1] at t = " + std::to_string(t));
  return std::clamp(v, 0.0, 1.0);
}

inline void check_points(const LatentSample& latent) {
  if (latent.points.cols() != latent.space.coordinate_dim())
    throw DomainError("latent sample has the wrong coordinate dimension");
  for (Eigen::Index i = 0; i < latent.size(); ++i) {
    if (std::abs(latent.points.row(i).norm() - 1.0) > 1e-9)
      throw DomainError("latent point is not a unit vector");
  }
}

// Theta_ij for i < j in row-major order; shared by probability_matrix and
// generate_graph so both see identical values.
template <class Visit>
void for_each_pair_probability(const LatentSample& latent, const Envelope& p, Visit&& visit) {
  check_points(latent);
  const Eigen::Index n = latent.size();
  const int cols = static_cast<int>(latent.points.cols());
  // row-major copy for contiguous per-point access
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts = latent.points;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = pts.row(i).data();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double t = pairwise_cosine_unchecked(latent.space.kind, xi, pts.row(j).data(), cols);
      visit(i, j, checked_probability(p, t));
    }
  }
}

}  // namespace detail

// Theta0_ij = p(cos gamma(X_i, X_j)) off the diagonal, 0 on it.
inline Eigen::MatrixXd probability_matrix(const LatentSample& latent, const Envelope& p) {
  const Eigen::Index n = latent.size();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, n);
  detail::for_each_pair_probability(latent, p, [&](Eigen::Index i, Eigen::Index j, double v) {
    theta(i, j) = v;
    theta(j, i) = v;
  });
  return theta;
}

// A_ij ~ Bernoulli(Theta0_ij) independently for i < j, mirrored. The pair
// loop consumes one uniform per pair in row-major order.
inline GraphSample generate_graph(const LatentSample& latent, const Envelope& p, std::uint64_t seed,
                                  bool keep_theta0 = true) {
  const Eigen::Index n = latent.size();
  GraphSample g;
  g.n = n;
  g.adjacency = SymmetricBitMatrix(n);
  g.seed = seed;
  if (keep_theta0) g.theta0 = Eigen::MatrixXd::Zero(n, n);
  Rng rng(seed);
  detail::for_each_pair_probability(latent, p, [&](Eigen::Index i, Eigen::Index j, double v) {
    if (rng.uniform() < v) g.adjacency.set_edge(i, j);
    if (keep_theta0) {
      (*g.theta0)(i, j) = v;
      (*g.theta0)(j, i) = v;
    }
  });
  g.latent = latent;
  return g;
}

}  // namespace ngg
