#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "ngg/envelope.hpp"
#include "ngg/model.hpp"

namespace {

using ngg::LatentSpace;

std::span<const double> sp(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

// cosines between independent pairs (2k, 2k+1)
std::vector<double> pair_cosines(const LatentSpace& space, int pairs, std::uint64_t seed) {
  const auto s = ngg::sample_latent(space, 2 * pairs, seed);
  std::vector<double> t;
  for (int k = 0; k < pairs; ++k) {
    const Eigen::VectorXd x = s.points.row(2 * k), y = s.points.row(2 * k + 1);
    t.push_back(ngg::pairwise_cosine(space, sp(x), sp(y)));
  }
  return t;
}

TEST(BuiltinEnvelope, Examples) {
  EXPECT_EQ(ngg::builtin_envelope(1)(1.0), 1.0);
  EXPECT_EQ(ngg::builtin_envelope(2)(0.5), 0.0);
  EXPECT_EQ(ngg::builtin_envelope(2)(0.71), 1.0);
  EXPECT_NEAR(ngg::builtin_envelope(5)(1.0), 1.0, 1e-15);
  EXPECT_NEAR(ngg::builtin_envelope(3)(0.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(ngg::builtin_envelope(4)(-1.0), 0.0, 1e-15);
  EXPECT_NEAR(ngg::builtin_envelope(6)(0.5), std::pow(0.5, 10), 1e-18);
  EXPECT_EQ(ngg::builtin_envelope(6)(-0.5), 0.0);
}

TEST(BuiltinEnvelope, Metadata) {
  EXPECT_EQ(ngg::builtin_envelope(2).jump_points, std::vector<double>{0.7});
  const auto p5 = ngg::builtin_envelope(5);
  ASSERT_TRUE(p5.known_coeffs);
  EXPECT_EQ(p5.known_coeffs->size(), 2u);
  EXPECT_EQ((*p5.known_coeffs)[0], std::make_pair(0, 1.0 / 3));
  EXPECT_EQ((*p5.known_coeffs)[1], std::make_pair(4, 2.0 / 27));
  EXPECT_TRUE(p5.has_known_coeffs_for(LatentSpace::sphere(3)));
  EXPECT_FALSE(p5.has_known_coeffs_for(LatentSpace::sphere(4)));
  EXPECT_TRUE(ngg::constant_envelope(0.2).has_known_coeffs_for(LatentSpace::complex_projective(3)));
  for (int id = 1; id <= 6; ++id) EXPECT_EQ(ngg::builtin_envelope(id).name, "p" + std::to_string(id));
}

TEST(BuiltinEnvelope, OutOfRangeId) {
  EXPECT_THROW(ngg::builtin_envelope(0), ngg::ArgumentError);
  EXPECT_THROW(ngg::builtin_envelope(7), ngg::ArgumentError);
}

TEST(BuiltinEnvelope, ValuesInUnitInterval) {
  for (int id = 1; id <= 6; ++id) {
    const auto p = ngg::builtin_envelope(id);
    for (int k = 0; k <= 10000; ++k) {
      const double v = p(-1.0 + 2.0 * k / 10000);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-15);
    }
  }
}

TEST(SampleLatent, UnitNormsAndShape) {
  for (const auto& s : {LatentSpace::sphere(3), LatentSpace::sphere(6), LatentSpace::real_projective(4),
                        LatentSpace::complex_projective(3)}) {
    const auto x = ngg::sample_latent(s, 500, 11);
    EXPECT_EQ(x.points.rows(), 500);
    EXPECT_EQ(x.points.cols(), s.coordinate_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) EXPECT_NEAR(x.points.row(i).norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(LatentSpace::complex_projective(3).coordinate_dim(), 6);
}

TEST(SampleLatent, MeanOfLastCoordinate) {
  const int n = 100000, d = 3;
  const auto x = ngg::sample_latent(LatentSpace::sphere(d), n, 2024);
  EXPECT_NEAR(x.points.col(d - 1).mean(), 0.0, 4.0 / std::sqrt(d * static_cast<double>(n)));
}

TEST(SampleLatent, SecondMomentOfCoordinate) {
  // E[x_d^2] = 1/d; Var[x_d^2] = 3/(d(d+2)) - 1/d^2.
  const int n = 100000;
  for (int d : {3, 5, 8}) {
    const auto x = ngg::sample_latent(LatentSpace::sphere(d), n, 99 + d);
    const double m2 = x.points.col(d - 1).squaredNorm() / n;
    const double sd = std::sqrt((3.0 / (d * (d + 2.0)) - 1.0 / (d * d)) / n);
    EXPECT_NEAR(m2, 1.0 / d, 5 * sd) << "d=" << d;

    // independent Monte Carlo with the standard library generator
    std::mt19937_64 gen(d);
    std::normal_distribution<double> normal;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double norm2 = 0.0, last = 0.0;
      for (int k = 0; k < d; ++k) {
        last = normal(gen);
        norm2 += last * last;
      }
      acc += last * last / norm2;
    }
    EXPECT_NEAR(acc / n, 1.0 / d, 5 * sd);
    EXPECT_NEAR(m2, acc / n, 10 * sd);
  }
}

TEST(SampleLatent, Deterministic) {
  const auto a = ngg::sample_latent(LatentSpace::sphere(3), 1, 5);
  const auto b = ngg::sample_latent(LatentSpace::sphere(3), 1, 5);
  const auto c = ngg::sample_latent(LatentSpace::sphere(3), 1, 6);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
  EXPECT_EQ(a.seed, 5u);
}

TEST(SampleLatent, Errors) {
  EXPECT_THROW(ngg::sample_latent(LatentSpace::quaternionic(2), 10, 1), ngg::DomainError);
  EXPECT_THROW(ngg::sample_latent(LatentSpace::octonionic(), 10, 1), ngg::DomainError);
  EXPECT_THROW(ngg::sample_latent(LatentSpace::sphere(3), 0, 1), ngg::ArgumentError);
}

TEST(PairwiseCosine, SelfIsOne) {
  for (const auto& s : {LatentSpace::sphere(3), LatentSpace::real_projective(3), LatentSpace::complex_projective(3)}) {
    const auto x = ngg::sample_latent(s, 20, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Eigen::VectorXd v = x.points.row(i);
      EXPECT_NEAR(ngg::pairwise_cosine(s, sp(v), sp(v)), 1.0, 1e-12);
    }
  }
}

TEST(PairwiseCosine, SphereOrthogonalAndProjectiveIdentifications) {
  const std::vector<double> e1{1, 0, 0}, e2{0, 1, 0}, m1{-1, 0, 0};
  EXPECT_EQ(ngg::pairwise_cosine(LatentSpace::sphere(3), e1, e2), 0.0);
  EXPECT_EQ(ngg::pairwise_cosine(LatentSpace::sphere(3), e1, m1), -1.0);
  // antipodes are the same point of RP^2; orthogonal lines are at maximal distance
  EXPECT_EQ(ngg::pairwise_cosine(LatentSpace::real_projective(3), e1, m1), 1.0);
  EXPECT_EQ(ngg::pairwise_cosine(LatentSpace::real_projective(3), e1, e2), -1.0);
  // CP: x and e^{i phi} x are the same point
  const double phi = 0.7;
  const std::vector<double> z{std::sqrt(0.5), 0, 0.5, 0.5};
  std::vector<double> w(4);
  for (int k = 0; k < 4; k += 2) {
    w[k] = std::cos(phi) * z[k] - std::sin(phi) * z[k + 1];
    w[k + 1] = std::sin(phi) * z[k] + std::cos(phi) * z[k + 1];
  }
  EXPECT_NEAR(ngg::pairwise_cosine(LatentSpace::complex_projective(2), z, w), 1.0, 1e-14);
}

TEST(PairwiseCosine, RejectsNonUnitInput) {
  const std::vector<double> e1{1, 0, 0}, bad{1.1, 0, 0};
  EXPECT_THROW(ngg::pairwise_cosine(LatentSpace::sphere(3), e1, bad), ngg::DomainError);
  EXPECT_THROW(ngg::pairwise_cosine(LatentSpace::sphere(4), e1, e1), ngg::DomainError);
}

TEST(PairwiseCosine, DistributionMatchesBetaLaw) {
  // u = (1 - t)/2 ~ Beta(alpha, beta) (Jacobi weight (1-t)^{alpha-1}(1+t)^{beta-1});
  // closed-form CDFs for these shapes.
  struct Case {
    LatentSpace space;
    std::function<double(double)> cdf;
  };
  const std::vector<Case> cases{
      {LatentSpace::real_projective(3), [](double u) { return 1 - std::sqrt(1 - u); }},
      {LatentSpace::real_projective(5),
       [](double u) { return 1 - 1.5 * std::sqrt(1 - u) + 0.5 * std::pow(1 - u, 1.5); }},
      {LatentSpace::sphere(3), [](double u) { return u; }},
      {LatentSpace::complex_projective(2), [](double u) { return u; }},
      {LatentSpace::complex_projective(3), [](double u) { return u * u; }},
  };
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    auto t = pair_cosines(c.space, 100000, seed++);
    for (auto& v : t) v = (1 - v) / 2;
    EXPECT_LT(ks_distance(t, c.cdf), 0.01) << c.space.to_string();
  }
}

TEST(ProbabilityMatrix, ConstantEnvelopes) {
  const auto x = ngg::sample_latent(LatentSpace::sphere(3), 30, 1);
  EXPECT_TRUE(ngg::probability_matrix(x, ngg::constant_envelope(0.0)).isZero());
  const auto th = ngg::probability_matrix(x, ngg::constant_envelope(0.3));
  const Eigen::MatrixXd expected =
      0.3 * (Eigen::MatrixXd::Ones(30, 30) - Eigen::MatrixXd::Identity(30, 30));
  EXPECT_EQ(th, expected);
}

TEST(ProbabilityMatrix, CoincidentPoints) {
  ngg::LatentSample x{LatentSpace::sphere(3), Eigen::MatrixXd(2, 3), 0};
  x.points << 0, 0, 1, 0, 0, 1;
  const auto th = ngg::probability_matrix(x, ngg::builtin_envelope(1));
  EXPECT_EQ(th(0, 1), 1.0);
  EXPECT_EQ(th(1, 0), 1.0);
  EXPECT_EQ(th(0, 0), 0.0);
}

TEST(ProbabilityMatrix, MatchesDirectEvaluation) {
  const auto x = ngg::sample_latent(LatentSpace::complex_projective(3), 25, 4);
  const auto p = ngg::builtin_envelope(3);
  const auto th = ngg::probability_matrix(x, p);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 25; ++j) {
      if (i == j) continue;
      const Eigen::VectorXd a = x.points.row(i), b = x.points.row(j);
      EXPECT_DOUBLE_EQ(th(i, j), p(ngg::pairwise_cosine(x.space, sp(a), sp(b))));
    }
}

TEST(ProbabilityMatrix, OutOfRangeEnvelope) {
  const auto x = ngg::sample_latent(LatentSpace::sphere(3), 5, 1);
  EXPECT_THROW(ngg::probability_matrix(x, ngg::constant_envelope(1.5)), ngg::ModelError);
  EXPECT_THROW(ngg::probability_matrix(x, ngg::constant_envelope(-0.01)), ngg::ModelError);
  EXPECT_NO_THROW(ngg::probability_matrix(x, ngg::constant_envelope(1.0 + 1e-13)));
}

TEST(GenerateGraph, CompleteAndEmpty) {
  const auto x = ngg::sample_latent(LatentSpace::sphere(3), 40, 1);
  const auto full = ngg::generate_graph(x, ngg::constant_envelope(1.0), 2);
  EXPECT_EQ(full.adjacency.edge_count(), 40 * 39 / 2);
  for (int i = 0; i < 40; ++i) EXPECT_FALSE(full.adjacency(i, i));
  const auto empty = ngg::generate_graph(x, ngg::constant_envelope(0.0), 2);
  EXPECT_EQ(empty.adjacency.edge_count(), 0);
}

TEST(GenerateGraph, EdgeDensityForHalf) {
  const int n = 500;
  const double pairs = n * (n - 1) / 2.0;
  const auto x = ngg::sample_latent(LatentSpace::sphere(3), n, 10);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto g = ngg::generate_graph(x, ngg::constant_envelope(0.5), seed);
    EXPECT_NEAR(g.adjacency.edge_count() / pairs, 0.5, 3 * std::sqrt(0.25 / pairs));
  }
}

TEST(GenerateGraph, SymmetricZeroDiagonalAndStoresInputs) {
  const auto x = ngg::sample_latent(LatentSpace::real_projective(4), 120, 8);
  const auto p = ngg::builtin_envelope(4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = ngg::generate_graph(x, p, seed);
    const auto a = g.adjacency.to_dense();
    EXPECT_EQ(a, a.transpose());
    EXPECT_TRUE(a.diagonal().isZero());
    std::int64_t degree_sum = 0;
    for (int i = 0; i < 120; ++i) degree_sum += g.adjacency.degree(i);
    EXPECT_EQ(degree_sum, 2 * g.adjacency.edge_count());
    ASSERT_TRUE(g.theta0);
    EXPECT_EQ(*g.theta0, ngg::probability_matrix(x, p));
    ASSERT_TRUE(g.latent);
    EXPECT_EQ(g.latent->points, x.points);
    EXPECT_EQ(g.seed, seed);
  }
  EXPECT_FALSE(ngg::generate_graph(x, p, 0, false).theta0);
}

TEST(GenerateGraph, Deterministic) {
  const auto x = ngg::sample_latent(LatentSpace::sphere(4), 200, 8);
  const auto p = ngg::builtin_envelope(1);
  EXPECT_EQ(ngg::generate_graph(x, p, 77).adjacency, ngg::generate_graph(x, p, 77).adjacency);
  EXPECT_FALSE(ngg::generate_graph(x, p, 77).adjacency == ngg::generate_graph(x, p, 78).adjacency);
}

TEST(GenerateGraph, ConditionalEdgeFrequencyTracksEnvelope) {
  const int n = 2000, bins = 20;
  for (int id : {1, 3, 4}) {
    const auto p = ngg::builtin_envelope(id);
    const auto x = ngg::sample_latent(LatentSpace::sphere(3), n, 500 + id);
    const auto g = ngg::generate_graph(x, p, 600 + id, false);
    std::vector<double> edges(bins, 0), expected(bins, 0), count(bins, 0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double t = std::clamp(x.points.row(i).dot(x.points.row(j)), -1.0, 1.0);
        const int b = std::min(bins - 1, static_cast<int>((t + 1) / 2 * bins));
        count[b] += 1;
        expected[b] += p(t);
        edges[b] += g.adjacency(i, j);
      }
    double worst = 0.0;
    for (int b = 0; b < bins; ++b)
      if (count[b] > 0) worst = std::max(worst, std::abs(edges[b] - expected[b]) / count[b]);
    EXPECT_LT(worst, 0.05) << "p" << id;
  }
}

TEST(SymmetricBitMatrix, Basics) {
  ngg::SymmetricBitMatrix m(130);
  m.set_edge(0, 129);
  m.set_edge(64, 65);
  m.set_edge(65, 64);
  EXPECT_TRUE(m(129, 0));
  EXPECT_TRUE(m(0, 129));
  EXPECT_EQ(m.edge_count(), 2);
  EXPECT_EQ(m.degree(65), 1);
  EXPECT_THROW(m.set_edge(3, 3), ngg::ArgumentError);
  const auto d = m.to_dense(0.5);
  EXPECT_EQ(d(64, 65), 0.5);
  EXPECT_EQ(d.sum(), 2.0);
}

}  // namespace
