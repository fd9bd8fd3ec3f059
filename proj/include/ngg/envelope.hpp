#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "special_fn.hpp"

namespace ngg {

// Univariate envelope p on [-1, 1]; W(x, y) = p(cos gamma(x, y)).
struct Envelope {
  std::function<double(double)> eval;
  std::string name;
  // Exact expansion coefficients (l, p*_l) when known; unlisted degrees are 0.
  std::optional<std::vector<std::pair<int, double>>> known_coeffs;
  // Points in (-1, 1) where p jumps or loses smoothness; quadrature splits there.
  std::vector<double> jump_points;
  // Space whose basis known_coeffs refer to; empty means every space.
  std::optional<LatentSpace> known_space;

  double operator()(double t) const { return eval(t); }

  bool has_known_coeffs_for(const LatentSpace& space) const {
    return known_coeffs.has_value() && (!known_space || *known_space == space);
  }
};

// The six test envelopes p1..p6.
inline Envelope builtin_envelope(int id) {
  switch (id) {
    case 1:
      return {[](double t) { return std::pow((1 + t) / 2, 4); }, "p1", std::nullopt, {}, std::nullopt};
    case 2:
      return {[](double t) { return t > 0.7 ? 1.0 : 0.0; }, "p2", std::nullopt, {0.7}, std::nullopt};
    case 3:
      return {[](double t) { return std::exp(-(t - 1) * (t - 1)); }, "p3", std::nullopt, {}, std::nullopt};
    case 4:
      return {[](double t) { return 0.5 + 0.5 * std::sin(std::numbers::pi * t / 2); }, "p4",
              std::nullopt, {}, std::nullopt};
    case 5:
      return {[](double t) {
                const double t2 = t * t;
                return 1.0 / 3 + (35 * t2 * t2 - 30 * t2 + 3) / 12;
              },
              "p5", std::vector<std::pair<int, double>>{{0, 1.0 / 3}, {4, 2.0 / 27}}, {},
              LatentSpace::sphere(3)};
    case 6:
      return {[](double t) { return t > 0 ? std::pow(t, 10) : 0.0; }, "p6", std::nullopt, {0.0}, std::nullopt};
    default:
      throw ArgumentError("built-in envelope id must be in 1..6");
  }
}

inline Envelope constant_envelope(double a) {
  return {[a](double) { return a; }, "constant(" + std::to_string(a) + ")",
          std::vector<std::pair<int, double>>{{0, a}}, {}, std::nullopt};
}

// p(t) = sum_l u_l zonal_l(t): the envelope whose eigenvalues are u.
inline Envelope envelope_from_coefficients(const HarmonicBasis& basis, std::vector<double> coeffs,
                                           std::string name = "coefficients") {
  if (coeffs.empty()) coeffs.push_back(0.0);
  if (static_cast<int>(coeffs.size()) - 1 > basis.max_degree())
    throw DomainError("coefficient degree exceeds the basis range");
  std::vector<std::pair<int, double>> known;
  for (std::size_t l = 0; l < coeffs.size(); ++l)
    if (coeffs[l] != 0.0) known.emplace_back(static_cast<int>(l), coeffs[l]);
  auto eval = [basis, coeffs](double t) {
    std::vector<double> z(coeffs.size());
    basis.zonal_all(t, z);
    double v = 0.0;
    for (std::size_t l = 0; l < coeffs.size(); ++l) v += coeffs[l] * z[l];
    return v;
  };
  return {std::move(eval), std::move(name), std::move(known), {}, basis.space()};
}

inline std::vector<double> envelope_coefficients(const HarmonicBasis& basis, const Envelope& p,
                                                 int R, const QuadratureOptions& opt = {}) {
  return envelope_coefficients(basis, p.eval, R, p.jump_points, opt);
}

}  // namespace ngg
