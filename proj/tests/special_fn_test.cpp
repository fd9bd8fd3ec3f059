#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ngg/envelope.hpp"
#include "ngg/special_fn.hpp"

namespace {

using ngg::HarmonicBasis;
using ngg::LatentSpace;

// Composite Simpson in θ for ∫ f(cos θ) w(cos θ) sin θ dθ; independent of the
// library's Gauss–Legendre machinery.
template <class F>
double simpson_theta(F f, int panels = 20000) {
  const double h = std::numbers::pi / panels;
  double acc = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double th = i * h;
    const double coef = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += coef * f(th);
  }
  return acc * h / 3.0;
}

double legendre_explicit(int l, double t) {
  switch (l) {
    case 0: return 1.0;
    case 1: return t;
    case 2: return (3 * t * t - 1) / 2;
    case 3: return (5 * t * t * t - 3 * t) / 2;
    case 4: return (35 * std::pow(t, 4) - 30 * t * t + 3) / 8;
    default: {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= l; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      return p1;
    }
  }
}

std::vector<LatentSpace> all_spaces() {
  return {LatentSpace::sphere(3),          LatentSpace::sphere(4),
          LatentSpace::sphere(5),          LatentSpace::real_projective(3),
          LatentSpace::real_projective(4), LatentSpace::complex_projective(2),
          LatentSpace::complex_projective(3), LatentSpace::quaternionic(2),
          LatentSpace::quaternionic(3),    LatentSpace::octonionic()};
}

TEST(DimOfDegree, SphereExamples) {
  EXPECT_EQ(ngg::dim_of_degree(LatentSpace::sphere(3), 5), 11);
  for (int d = 3; d <= 9; ++d) EXPECT_EQ(ngg::dim_of_degree(LatentSpace::sphere(d), 0), 1);
  // d = 4: (l+1)^2
  for (int l = 0; l <= 30; ++l) EXPECT_EQ(ngg::dim_of_degree(LatentSpace::sphere(4), l), (l + 1) * (l + 1));
  EXPECT_EQ(ngg::dim_of_degree(LatentSpace::sphere(4), 2), 9);
  for (int l = 0; l <= 50; ++l) EXPECT_EQ(ngg::dim_of_degree(LatentSpace::sphere(3), l), 2 * l + 1);
}

TEST(DimOfDegree, MonotoneOnSpheres) {
  for (int d = 3; d <= 8; ++d)
    for (int l = 1; l < 60; ++l)
      EXPECT_LT(ngg::dim_of_degree(LatentSpace::sphere(d), l), ngg::dim_of_degree(LatentSpace::sphere(d), l + 1));
}

TEST(DimOfDegree, ProjectiveSpacesMatchKnownMultiplicities) {
  // RP^{d-1}: even-degree harmonics of S^{d-1}
  for (int d = 3; d <= 7; ++d)
    for (int l = 0; l <= 20; ++l)
      EXPECT_EQ(ngg::dim_of_degree(LatentSpace::real_projective(d), l),
                ngg::dim_of_degree(LatentSpace::sphere(d), 2 * l));
  // CP^{d-1}: (2l+d-1)/(d-1) C(l+d-2, d-2)^2
  for (int d = 2; d <= 6; ++d)
    for (int l = 0; l <= 20; ++l) {
      const std::int64_t b = ngg::detail::binomial(l + d - 2, d - 2);
      EXPECT_EQ(ngg::dim_of_degree(LatentSpace::complex_projective(d), l) * (d - 1), (2 * l + d - 1) * b * b);
    }
  // HP^1 = S^4, CP^1 = S^2
  for (int l = 0; l <= 20; ++l) {
    EXPECT_EQ(ngg::dim_of_degree(LatentSpace::quaternionic(2), l), ngg::dim_of_degree(LatentSpace::sphere(5), l));
    EXPECT_EQ(ngg::dim_of_degree(LatentSpace::complex_projective(2), l), 2 * l + 1);
  }
  // F4 spherical representations on OP^2
  const auto op = LatentSpace::octonionic();
  EXPECT_EQ(ngg::dim_of_degree(op, 0), 1);
  EXPECT_EQ(ngg::dim_of_degree(op, 1), 26);
  EXPECT_EQ(ngg::dim_of_degree(op, 2), 324);
  EXPECT_EQ(ngg::dim_of_degree(op, 3), 2652);
}

TEST(DimOfDegree, MatchesSquaredPoleValueFromGammaFunctions) {
  // Z_l(1)^2 = (2l+a+b+1) G(l+a+1) G(l+a+b+1) B(a+1,b+1) / (l! G(a+1)^2 G(l+b+1))
  for (const auto& s : all_spaces()) {
    const auto [alpha, beta] = s.beta_shape();
    const double a = alpha - 1, b = beta - 1;
    for (int l = 0; l <= 20; ++l) {
      const double log_v = std::log(2.0 * l + a + b + 1) + std::lgamma(l + a + 1) + std::lgamma(l + a + b + 1) +
                           std::lgamma(a + 1) + std::lgamma(b + 1) - std::lgamma(a + b + 2) -
                           std::lgamma(l + 1.0) - 2 * std::lgamma(a + 1) - std::lgamma(l + b + 1);
      const double v = std::exp(log_v);
      EXPECT_NEAR(static_cast<double>(ngg::dim_of_degree(s, l)), v, 1e-9 * v) << s.to_string() << " l=" << l;
    }
  }
}

TEST(DimOfDegree, LargeDegreesStayIntegral) {
  for (const auto& s : all_spaces())
    for (int l = 0; l <= 64; ++l) EXPECT_GT(ngg::dim_of_degree(s, l), 0) << s.to_string() << " l=" << l;
  EXPECT_EQ(ngg::dim_of_degree(LatentSpace::sphere(3), 200), 401);
  EXPECT_THROW(ngg::dim_of_degree(LatentSpace::octonionic(), 5000), ngg::DomainError);
}

TEST(DimOfDegree, Errors) {
  EXPECT_THROW(ngg::dim_of_degree(LatentSpace::sphere(3), -1), ngg::DomainError);
  EXPECT_THROW(LatentSpace::sphere(2), ngg::DomainError);
  EXPECT_THROW(LatentSpace::real_projective(2), ngg::DomainError);
  EXPECT_THROW(LatentSpace::complex_projective(1), ngg::DomainError);
  EXPECT_THROW((ngg::dim_of_degree({ngg::SpaceKind::Sphere, 2}, 1)), ngg::DomainError);
  EXPECT_NO_THROW(LatentSpace::complex_projective(2));
}

TEST(CumulativeDim, Examples) {
  EXPECT_EQ(ngg::cumulative_dim(LatentSpace::sphere(3), 1), 4);
  for (const auto& s : all_spaces()) EXPECT_EQ(ngg::cumulative_dim(s, 0), 1);
  EXPECT_EQ(ngg::cumulative_dim(LatentSpace::sphere(3), 4), 1 + 3 + 5 + 7 + 9);
  for (int d = 3; d <= 8; ++d)
    for (int R = 0; R <= 15; ++R) {
      std::int64_t direct = 0;
      for (int l = 0; l <= R; ++l) direct += ngg::dim_of_degree(LatentSpace::sphere(d), l);
      EXPECT_EQ(ngg::cumulative_dim(LatentSpace::sphere(d), R), direct);
    }
}

TEST(HarmonicBasis, StoresDimsAndNormalizers) {
  HarmonicBasis b(LatentSpace::sphere(3), 6);
  EXPECT_EQ(b.dims().size(), 7u);
  EXPECT_EQ(b.cumulative_dim(6), 49);
  EXPECT_DOUBLE_EQ(b.c(4), 9.0);
  EXPECT_NEAR(b.b_d(), 0.5, 1e-15);
  EXPECT_EQ(b.beta_shape(), std::make_pair(1.0, 1.0));
  HarmonicBasis rp(LatentSpace::real_projective(3), 3);
  EXPECT_THROW(rp.c(1), ngg::DomainError);
  EXPECT_EQ(rp.beta_shape(), std::make_pair(1.0, 0.5));
}

TEST(BasisEval, Examples) {
  HarmonicBasis b(LatentSpace::sphere(3), 10);
  for (double t : {-1.0, -0.3, 0.0, 0.8, 1.0}) EXPECT_EQ(b.eval(0, t), 1.0);
  EXPECT_NEAR(b.eval(2, 0.5), -0.125, 1e-15);
  EXPECT_NEAR(legendre_explicit(2, 0.5), -0.125, 1e-15);
  for (int l = 0; l <= 10; ++l)
    for (double t : {-0.9, -0.2, 0.35, 0.77}) EXPECT_NEAR(b.eval(l, t), legendre_explicit(l, t), 1e-13);
}

TEST(BasisEval, ValueAtPoleIsDimOverC) {
  for (int d = 3; d <= 8; ++d) {
    HarmonicBasis b(LatentSpace::sphere(d), 25);
    for (int l = 0; l <= 25; ++l) {
      const double expected = static_cast<double>(b.dim(l)) / b.c(l);
      EXPECT_NEAR(b.eval(l, 1.0), expected, 1e-10 * expected) << "d=" << d << " l=" << l;
    }
  }
}

TEST(BasisEval, GegenbauerMatchesChebyshevSecondKindForD4) {
  HarmonicBasis b(LatentSpace::sphere(4), 30);
  for (int l = 0; l <= 30; ++l)
    for (double th : {0.1, 0.7, 1.3, 2.2, 3.0}) {
      const double u = std::sin((l + 1) * th) / std::sin(th);
      EXPECT_NEAR(b.eval(l, std::cos(th)), u, 1e-10 * std::max(1.0, std::abs(u)));
    }
}

TEST(BasisEval, OutOfRangeArgument) {
  HarmonicBasis b(LatentSpace::sphere(3), 4);
  EXPECT_THROW(b.eval(2, 1.0000001), ngg::DomainError);
  EXPECT_THROW(b.eval(2, -1.5), ngg::DomainError);
  EXPECT_THROW(b.eval(5, 0.0), ngg::DomainError);
}

TEST(BasisEval, ZonalEqualsCTimesGOnSphere) {
  for (int d = 3; d <= 6; ++d) {
    HarmonicBasis b(LatentSpace::sphere(d), 15);
    for (int l = 0; l <= 15; ++l)
      for (double t : {-1.0, -0.4, 0.2, 0.9, 1.0})
        EXPECT_NEAR(b.zonal(l, t), b.c(l) * b.eval(l, t), 1e-10 * std::max(1.0, std::abs(b.zonal(l, t))));
  }
}

TEST(BasisEval, OrthonormalValueAtPoleSquaredIsMultiplicity) {
  for (const auto& s : all_spaces()) {
    HarmonicBasis b(s, 20);
    for (int l = 0; l <= 20; ++l) {
      const double z1 = b.orthonormal(l, 1.0);
      EXPECT_NEAR(z1 * z1, static_cast<double>(b.dim(l)), 1e-9 * b.dim(l)) << s.to_string() << " l=" << l;
    }
  }
}

TEST(BasisEval, CP1SharesTheS2Basis) {
  HarmonicBasis s2(LatentSpace::sphere(3), 8), cp1(LatentSpace::complex_projective(2), 8);
  for (int l = 0; l <= 8; ++l)
    for (double t : {-0.8, 0.1, 0.6}) EXPECT_NEAR(s2.orthonormal(l, t), cp1.orthonormal(l, t), 1e-12);
}

TEST(Quadrature, BetaDensityIntegratesToOne) {
  for (const auto& s : all_spaces()) {
    HarmonicBasis b(s, 0);
    const auto [alpha, beta] = b.beta_shape();
    const auto one = ngg::integrate_beta([](double, std::span<double> o) { o[0] = 1.0; }, 1, alpha, beta);
    EXPECT_NEAR(one[0], 1.0, 1e-10) << s.to_string();
    if (alpha >= 1 && beta >= 1) {
      // independent check of the density normalizer
      const double simpson = simpson_theta([&](double th) {
        return b.density(std::cos(th)) * std::sin(th);
      });
      EXPECT_NEAR(simpson, 1.0, 1e-8) << s.to_string();
    }
  }
}

TEST(Quadrature, GramMatrixIsIdentityForEverySpace) {
  for (const auto& s : all_spaces()) {
    const int L = 12;
    HarmonicBasis b(s, L);
    const auto [alpha, beta] = b.beta_shape();
    const std::size_t m = (L + 1) * (L + 1);
    std::vector<double> z(L + 1);
    auto gram = ngg::integrate_beta(
        [&](double t, std::span<double> out) {
          b.zonal_all(t, z);
          for (int i = 0; i <= L; ++i) z[i] /= std::sqrt(static_cast<double>(b.dim(i)));
          for (int i = 0; i <= L; ++i)
            for (int j = 0; j <= L; ++j) out[i * (L + 1) + j] = z[i] * z[j];
        },
        m, alpha, beta);
    for (int i = 0; i <= L; ++i)
      for (int j = 0; j <= L; ++j)
        EXPECT_NEAR(gram[i * (L + 1) + j], i == j ? 1.0 : 0.0, 1e-8) << s.to_string() << " " << i << "," << j;
  }
}

TEST(Quadrature, GramMatrixIndependentSimpsonCheck) {
  // Density written out by hand in θ: B(alpha,beta)^-1 sin^{2a-1}(θ/2) cos^{2b-1}(θ/2).
  for (const auto& s : {LatentSpace::sphere(3), LatentSpace::sphere(5), LatentSpace::complex_projective(3)}) {
    HarmonicBasis b(s, 6);
    const auto [alpha, beta] = b.beta_shape();
    const double inv_beta_fn = std::tgamma(alpha + beta) / (std::tgamma(alpha) * std::tgamma(beta));
    for (int i = 0; i <= 6; ++i)
      for (int j = i; j <= 6; ++j) {
        const double v = simpson_theta([&](double th) {
          const double t = std::cos(th);
          return b.orthonormal(i, t) * b.orthonormal(j, t) * inv_beta_fn *
                 std::pow(std::sin(th / 2), 2 * alpha - 1) * std::pow(std::cos(th / 2), 2 * beta - 1);
        });
        EXPECT_NEAR(v, i == j ? 1.0 : 0.0, 1e-8);
      }
  }
}

TEST(Quadrature, ToleranceErrorCarriesLastEstimate) {
  ngg::QuadratureOptions opt;
  opt.max_nodes = 32;
  opt.max_depth = 2;
  try {
    ngg::integrate([](double x, std::span<double> o) { o[0] = x > 0.123 ? 1.0 : 0.0; }, 1, 0.0, 1.0, opt);
    FAIL() << "expected ToleranceError";
  } catch (const ngg::ToleranceError& e) {
    ASSERT_EQ(e.last_estimate().size(), 1u);
    EXPECT_NEAR(e.last_estimate()[0], 0.877, 0.1);
  }
}

TEST(Quadrature, UndeclaredJumpFallsBackToBisection) {
  const auto v = ngg::integrate([](double x, std::span<double> o) { o[0] = x > 0.123 ? 1.0 : 0.0; }, 1, 0.0, 1.0);
  EXPECT_NEAR(v[0], 0.877, 1e-9);
}

TEST(EnvelopeCoefficients, Constant) {
  for (const auto& s : all_spaces()) {
    HarmonicBasis b(s, 5);
    const auto c = ngg::envelope_coefficients(b, ngg::constant_envelope(0.37), 5);
    EXPECT_NEAR(c[0], 0.37, 1e-12);
    for (int l = 1; l <= 5; ++l) EXPECT_NEAR(c[l], 0.0, 1e-12);
  }
}

TEST(EnvelopeCoefficients, P5OnS2) {
  HarmonicBasis b(LatentSpace::sphere(3), 6);
  const auto p5 = ngg::builtin_envelope(5);
  const auto c = ngg::envelope_coefficients(b, p5, 4);
  const std::vector<double> expected{1.0 / 3, 0, 0, 0, 2.0 / 27};
  for (int l = 0; l <= 4; ++l) EXPECT_NEAR(c[l], expected[l], 1e-12) << l;

  // Oracle: midpoint rule with 10^4 nodes, p*_l = (c_l b_d / d_l) ∫ p P_l dt = (1/2) ∫ p P_l dt.
  const int nodes = 10000;
  for (int l = 0; l <= 4; ++l) {
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double t = -1.0 + (i + 0.5) * 2.0 / nodes;
      acc += p5(t) * legendre_explicit(l, t);
    }
    acc *= 2.0 / nodes * 0.5;
    EXPECT_NEAR(acc, expected[l], 1e-6) << l;
  }
}

TEST(EnvelopeCoefficients, StepEnvelopeMatchesClosedForm) {
  // ∫_x^1 P_l = (P_{l-1}(x) - P_{l+1}(x)) / (2l+1)
  HarmonicBasis b(LatentSpace::sphere(3), 10);
  const auto c = ngg::envelope_coefficients(b, ngg::builtin_envelope(2), 10);
  EXPECT_NEAR(c[0], 0.15, 1e-12);
  bool any_negative = false;
  for (int l = 1; l <= 10; ++l) {
    const double exact = (legendre_explicit(l - 1, 0.7) - legendre_explicit(l + 1, 0.7)) / (2.0 * (2 * l + 1));
    EXPECT_NEAR(c[l], exact, 1e-11) << l;
    any_negative = any_negative || c[l] < 0;
  }
  EXPECT_TRUE(any_negative);
}

TEST(EnvelopeCoefficients, IndicatorAtDegree) {
  for (const auto& s : all_spaces()) {
    HarmonicBasis b(s, 8);
    for (int m = 0; m <= 8; ++m) {
      auto p = [&](double t) { return b.zonal(m, t); };
      const auto c = ngg::envelope_coefficients(b, p, 8);
      for (int l = 0; l <= 8; ++l) EXPECT_NEAR(c[l], l == m ? 1.0 : 0.0, 1e-9) << s.to_string();
    }
  }
}

TEST(EnvelopeCoefficients, RoundTripRandomCoefficients) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& s : all_spaces()) {
    HarmonicBasis b(s, 10);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> u(11);
      for (auto& x : u) x = unif(gen);
      const auto env = ngg::envelope_from_coefficients(b, u);
      const auto c = ngg::envelope_coefficients(b, env, 10);
      for (int l = 0; l <= 10; ++l) EXPECT_NEAR(c[l], u[l], 1e-9) << s.to_string() << " l=" << l;
    }
  }
}

TEST(EnvelopeCoefficients, DegreeOutOfRange) {
  HarmonicBasis b(LatentSpace::sphere(3), 3);
  EXPECT_THROW(ngg::envelope_coefficients(b, ngg::builtin_envelope(1), 4), ngg::DomainError);
}

}  // namespace
