#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace ngg {

// Rank-1 compact symmetric spaces: S^{d-1}, RP^{d-1}, CP^{d-1}, HP^{d-1}, OP^2.
enum class SpaceKind { Sphere, RealProjective, ComplexProjective, Quaternionic, Octonionic };

struct LatentSpace {
  SpaceKind kind = SpaceKind::Sphere;
  int dim = 3;  // ambient dimension d; the octonionic plane always uses 3

  static LatentSpace sphere(int d) { return checked({SpaceKind::Sphere, d}); }
  static LatentSpace real_projective(int d) { return checked({SpaceKind::RealProjective, d}); }
  static LatentSpace complex_projective(int d) { return checked({SpaceKind::ComplexProjective, d}); }
  static LatentSpace quaternionic(int d) { return checked({SpaceKind::Quaternionic, d}); }
  static LatentSpace octonionic() { return {SpaceKind::Octonionic, 3}; }

  static LatentSpace checked(LatentSpace s) {
    s.validate();
    return s;
  }

  void validate() const {
    switch (kind) {
      case SpaceKind::Sphere:
      case SpaceKind::RealProjective:
        // c_l = (2l+d-2)/(d-2) needs d >= 3
        if (dim < 3) throw DomainError("sphere and real projective space need d >= 3");
        break;
      case SpaceKind::ComplexProjective:
      case SpaceKind::Quaternionic:
        if (dim < 2) throw DomainError("complex and quaternionic projective space need d >= 2");
        break;
      case SpaceKind::Octonionic:
        if (dim != 3) throw DomainError("only the octonionic projective plane exists");
        break;
    }
  }

  // Shape parameters (alpha, beta) of the Beta law of t = cos(gamma(x, e)).
  std::pair<double, double> beta_shape() const {
    const double d = dim;
    switch (kind) {
      case SpaceKind::Sphere: return {(d - 1) / 2, (d - 1) / 2};
      case SpaceKind::RealProjective: return {(d - 1) / 2, 0.5};
      case SpaceKind::ComplexProjective: return {d - 1, 1.0};
      case SpaceKind::Quaternionic: return {2 * d - 2, 2.0};
      case SpaceKind::Octonionic: return {8.0, 4.0};
    }
    return {0, 0};
  }

  // Real coordinates per latent point when sampling is supported.
  int coordinate_dim() const {
    switch (kind) {
      case SpaceKind::Sphere:
      case SpaceKind::RealProjective: return dim;
      case SpaceKind::ComplexProjective: return 2 * dim;
      case SpaceKind::Quaternionic: return 4 * dim;
      case SpaceKind::Octonionic: return 24;
    }
    return 0;
  }

  bool samplable() const {
    return kind == SpaceKind::Sphere || kind == SpaceKind::RealProjective ||
           kind == SpaceKind::ComplexProjective;
  }

  std::string to_string() const {
    switch (kind) {
      case SpaceKind::Sphere: return "sphere:" + std::to_string(dim);
      case SpaceKind::RealProjective: return "rp:" + std::to_string(dim);
      case SpaceKind::ComplexProjective: return "cp:" + std::to_string(dim);
      case SpaceKind::Quaternionic: return "hp:" + std::to_string(dim);
      case SpaceKind::Octonionic: return "op";
    }
    return "?";
  }

  // "sphere:3", "rp:4", "cp:2", "hp:2", "op".
  static LatentSpace parse(std::string_view text) {
    if (text == "op" || text == "op:3") return octonionic();
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw DomainError("latent space must look like sphere:d");
    const std::string name(text.substr(0, colon));
    int d = 0;
    try {
      std::size_t used = 0;
      const std::string num(text.substr(colon + 1));
      d = std::stoi(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DomainError("bad dimension in latent space '" + std::string(text) + "'");
    }
    if (name == "sphere") return sphere(d);
    if (name == "rp") return real_projective(d);
    if (name == "cp") return complex_projective(d);
    if (name == "hp") return quaternionic(d);
    throw DomainError("unknown latent space '" + name + "'");
  }

  friend bool operator==(const LatentSpace&, const LatentSpace&) = default;
};

namespace detail {

__extension__ using u128 = unsigned __int128;

// Exact; each partial product C(n-k+i, i) is an integer.
inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < k) return 0;
  k = std::min(k, n - k);
  u128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<u128>(n - k + i) / static_cast<u128>(i);
    if (r > static_cast<u128>(INT64_MAX)) throw DomainError("binomial overflow");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace detail

// Multiplicity d_l of the degree-l eigenvalue. For the sphere this is
// C(l+d-1, l) - C(l+d-3, l-2); for the other rank-1 spaces it is Z_l(1)^2,
// the squared value at the pole of the orthonormal zonal polynomial. With
// integer Jacobi parameters a = alpha-1, b = beta-1 that value is
//   (2l+a+b+1) C(l+a, a) C(l+a+b, a) / ((a+b+1) C(a+b, a)),
// and real projective space carries the even-degree harmonics of the sphere.
inline std::int64_t dim_of_degree(const LatentSpace& space, int l) {
  space.validate();
  if (l < 0) throw DomainError("degree must be non-negative");
  if (l == 0) return 1;
  if (space.kind == SpaceKind::Sphere) {
    const std::int64_t d = space.dim;
    return detail::binomial(l + d - 1, l) - detail::binomial(l + d - 3, l - 2);
  }
  if (space.kind == SpaceKind::RealProjective) return dim_of_degree(LatentSpace{SpaceKind::Sphere, space.dim}, 2 * l);
  const auto [alpha, beta] = space.beta_shape();
  const std::int64_t a = std::llround(alpha - 1), b = std::llround(beta - 1);
  using detail::u128;
  const u128 limit = static_cast<u128>(INT64_MAX);
  auto mul = [&](u128 x, u128 y) {
    if (y != 0 && x > (~u128{0}) / y) throw DomainError("multiplicity overflow");
    return x * y;
  };
  const u128 num = mul(mul(static_cast<u128>(2 * l + a + b + 1), static_cast<u128>(detail::binomial(l + a, a))),
                       static_cast<u128>(detail::binomial(l + a + b, a)));
  const u128 den = static_cast<u128>(a + b + 1) * static_cast<u128>(detail::binomial(a + b, a));
  if (num % den != 0) throw DomainError("multiplicity is not an exact integer");
  const u128 q = num / den;
  if (q > limit) throw DomainError("multiplicity overflow");
  return static_cast<std::int64_t>(q);
}

// R~ = sum_{l <= R} d_l.
inline std::int64_t cumulative_dim(const LatentSpace& space, int R) {
  if (R < 0) throw DomainError("resolution must be non-negative");
  std::int64_t total = 0;
  for (int l = 0; l <= R; ++l) total += dim_of_degree(space, l);
  if (space.kind == SpaceKind::Sphere) {
    const std::int64_t d = space.dim;
    const std::int64_t closed = detail::binomial(R + d - 1, R) + detail::binomial(R + d - 2, R - 1);
    if (closed != total) throw DomainError("cumulative dimension disagrees with closed form");
  }
  return total;
}

// Dimensions, normalizers and evaluable zonal polynomials for one latent space.
//
// Three families are exposed for degree l:
//   eval(l, t)        G_l: Gegenbauer C_l^{(d-2)/2} on the sphere, Jacobi
//                     P_l^{(alpha-1, beta-1)} otherwise (unnormalized);
//   orthonormal(l, t) Z_l, orthonormal for the Beta(alpha, beta) law;
//   zonal(l, t)       sqrt(d_l) Z_l, which equals c_l G_l on the sphere.
// An envelope expands as p = sum_l p*_l zonal(l, .).
class HarmonicBasis {
 public:
  HarmonicBasis(LatentSpace space, int max_degree) : space_(space), max_degree_(max_degree) {
    space_.validate();
    if (max_degree < 0) throw DomainError("max degree must be non-negative");
    std::tie(alpha_, beta_) = space_.beta_shape();
    jacobi_a_ = alpha_ - 1;
    jacobi_b_ = beta_ - 1;
    dims_.reserve(max_degree + 1);
    cum_dims_.reserve(max_degree + 1);
    std::int64_t acc = 0;
    for (int l = 0; l <= max_degree; ++l) {
      dims_.push_back(dim_of_degree(space_, l));
      acc += dims_.back();
      cum_dims_.push_back(acc);
    }
    if (is_sphere()) {
      const double d = space_.dim;
      lambda_ = (d - 2) / 2;
      b_d_ = std::exp(std::lgamma(d / 2) - std::lgamma(0.5) - std::lgamma((d - 1) / 2));
      for (int l = 0; l <= max_degree; ++l) c_.push_back((2.0 * l + d - 2) / (d - 2));
    }
    // 1 / ||G_l|| under the probability law
    for (int l = 0; l <= max_degree; ++l) {
      if (is_sphere()) {
        inv_norm_.push_back(c_[l] / std::sqrt(static_cast<double>(dims_[l])));
      } else {
        const double a = jacobi_a_, b = jacobi_b_;
        const double log_h = std::lgamma(l + a + 1) + std::lgamma(l + b + 1) -
                             std::log(2.0 * l + a + b + 1) - std::lgamma(l + 1.0) -
                             std::lgamma(l + a + b + 1) -
                             (std::lgamma(a + 1) + std::lgamma(b + 1) - std::lgamma(a + b + 2));
        inv_norm_.push_back(std::exp(-0.5 * log_h));
      }
    }
  }

  const LatentSpace& space() const { return space_; }
  int max_degree() const { return max_degree_; }
  bool is_sphere() const { return space_.kind == SpaceKind::Sphere; }

  std::int64_t dim(int l) const { return dims_.at(l); }
  std::int64_t cumulative_dim(int R) const { return cum_dims_.at(R); }
  std::span<const std::int64_t> dims() const { return dims_; }
  std::span<const std::int64_t> cum_dims() const { return cum_dims_; }

  std::pair<double, double> beta_shape() const { return {alpha_, beta_}; }

  // c_l = (2l+d-2)/(d-2); sphere only.
  double c(int l) const {
    if (!is_sphere()) throw DomainError("c_l is defined for the sphere only");
    return c_.at(l);
  }
  // b_d = G(d/2) / (G(1/2) G((d-1)/2)); sphere only.
  double b_d() const {
    if (!is_sphere()) throw DomainError("b_d is defined for the sphere only");
    return b_d_;
  }

  // Beta(alpha, beta) probability density on [-1, 1].
  double density(double t) const {
    check_t(t);
    if (t == 1.0 && alpha_ < 1) return INFINITY;
    if (t == -1.0 && beta_ < 1) return INFINITY;
    const double log_norm = std::lgamma(alpha_ + beta_) - std::lgamma(alpha_) - std::lgamma(beta_) -
                            (alpha_ + beta_ - 1) * std::numbers::ln2;
    return std::exp(log_norm) * std::pow(1 - t, alpha_ - 1) * std::pow(1 + t, beta_ - 1);
  }

  double eval(int l, double t) const {
    check_degree(l);
    check_t(t);
    std::vector<double> out(l + 1);
    fill_raw(t, out);
    return out[l];
  }

  double orthonormal(int l, double t) const { return eval(l, t) * inv_norm_.at(l); }

  double zonal(int l, double t) const {
    return orthonormal(l, t) * std::sqrt(static_cast<double>(dims_.at(l)));
  }

  // G_0..G_L at t in one recurrence pass; out.size() - 1 is the top degree.
  void eval_all(double t, std::span<double> out) const {
    check_t(t);
    if (out.empty()) return;
    check_degree(static_cast<int>(out.size()) - 1);
    fill_raw(t, out);
  }

  // sqrt(d_l) Z_l for l = 0..out.size()-1.
  void zonal_all(double t, std::span<double> out) const {
    eval_all(t, out);
    for (std::size_t l = 0; l < out.size(); ++l)
      out[l] *= inv_norm_[l] * std::sqrt(static_cast<double>(dims_[l]));
  }

 private:
  static void check_t(double t) {
    if (!(t >= -1.0 && t <= 1.0)) throw DomainError("argument must lie in [-1, 1]");
  }
  void check_degree(int l) const {
    if (l < 0 || l > max_degree_) throw DomainError("degree outside the basis range");
  }

  void fill_raw(double t, std::span<double> out) const {
    const std::size_t top = out.size() - 1;
    out[0] = 1.0;
    if (top == 0) return;
    if (is_sphere()) {
      // n C_n = 2(n+lambda-1) t C_{n-1} - (n+2lambda-2) C_{n-2}
      out[1] = 2 * lambda_ * t;
      for (std::size_t n = 2; n <= top; ++n) {
        out[n] = (2 * (n + lambda_ - 1) * t * out[n - 1] - (n + 2 * lambda_ - 2) * out[n - 2]) / n;
      }
      return;
    }
    const double a = jacobi_a_, b = jacobi_b_;
    out[1] = (a + 1) + (a + b + 2) * (t - 1) / 2;
    for (std::size_t n = 2; n <= top; ++n) {
      const double s = 2.0 * n + a + b;
      const double lead = 2.0 * n * (n + a + b) * (s - 2);
      const double c1 = (s - 1) * (s * (s - 2) * t + a * a - b * b);
      const double c2 = 2.0 * (n + a - 1) * (n + b - 1) * s;
      out[n] = (c1 * out[n - 1] - c2 * out[n - 2]) / lead;
    }
  }

  LatentSpace space_;
  int max_degree_;
  double alpha_ = 0, beta_ = 0;
  double jacobi_a_ = 0, jacobi_b_ = 0;
  double lambda_ = 0;
  double b_d_ = 0;
  std::vector<std::int64_t> dims_;
  std::vector<std::int64_t> cum_dims_;
  std::vector<double> c_;
  std::vector<double> inv_norm_;
};

// p*_0..p*_R with p*_l = (1/d_l) E_w[p(T) zonal_l(T)], T ~ Beta(alpha, beta).
// On the sphere this is (c_l b_d / d_l) ∫ p G_l (1-t^2)^{(d-3)/2} dt.
inline std::vector<double> envelope_coefficients(const HarmonicBasis& basis,
                                                 const std::function<double(double)>& p, int R,
                                                 std::span<const double> jump_points = {},
                                                 const QuadratureOptions& opt = {}) {
  if (R < 0 || R > basis.max_degree()) throw DomainError("degree outside the basis range");
  const std::size_t m = static_cast<std::size_t>(R) + 1;
  std::vector<double> zon(m);
  auto integrand = [&](double t, std::span<double> out) {
    t = std::clamp(t, -1.0, 1.0);
    basis.zonal_all(t, zon);
    const double v = p(t);
    for (std::size_t l = 0; l < m; ++l) out[l] = v * zon[l];
  };
  const auto [alpha, beta] = basis.beta_shape();
  auto coeffs = integrate_beta(integrand, m, alpha, beta, jump_points, opt);
  for (std::size_t l = 0; l < m; ++l) coeffs[l] /= static_cast<double>(basis.dim(static_cast<int>(l)));
  return coeffs;
}

}  // namespace ngg
