#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mhc/mhc.hpp"

using namespace mhc;

namespace {

Point random_point(std::mt19937_64& g, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Point x(d);
  for (double& v : x) v = n(g);
  return x;
}

TPSGeometry zero_bridge(int m, std::size_t ell = 1) {
  return TPSGeometry{m, ell, std::vector<double>(ell, 0.0), std::vector<double>(ell, 0.0)};
}

}  // namespace

TEST(Quadratic, ZeroPerturbation) {
  auto q = make_quadratic_model(3, 0.0);
  EXPECT_EQ(q.model.V(Point{1.0, 2.0, 3.0}), 0.0);
  EXPECT_EQ(*q.constants.k_capped, 1.0);
  EXPECT_EQ(q.constants.M, 1.0);
  EXPECT_EQ(q.constants.N, 0.0);
}

TEST(Quadratic, ConvexConstantIsCapped) {
  auto q = make_quadratic_model(1, 0.25);
  EXPECT_EQ(*q.constants.k_raw, 1.25);
  EXPECT_EQ(*q.constants.k_capped, 1.0);
  EXPECT_EQ(q.constants.M, 1.25);
  EXPECT_EQ(q.constants.C2, 0.25);
  const auto in = q.bound_inputs(2.0, 0.1);
  EXPECT_EQ(*in.K, 1.0);
  EXPECT_EQ(*in.C[0], 0.0);
  EXPECT_EQ(*in.C[2], 0.0);
  EXPECT_EQ(*in.C[3], 0.0);
  EXPECT_NO_THROW(in.validate());
}

TEST(Quadratic, ConcaveHasNoConvexity) {
  auto q = make_quadratic_model(1, -1.5);
  EXPECT_FALSE(q.constants.k_raw.has_value());
  EXPECT_FALSE(q.constants.k_capped.has_value());
  EXPECT_EQ(q.constants.M, 0.5);
  EXPECT_EQ(q.constants.N, 1.5);
  RandomStream rng(1);
  EXPECT_NO_THROW(mh_step(ProposalSpec(ProposalKind::ou, 0.1), q.model, Point{0.5}, rng));
}

TEST(Quadratic, DerivativesMatch) {
  auto q = make_quadratic_model(std::vector<double>{0.3, -0.2, 1.1});
  std::mt19937_64 g(2);
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(random_point(g, 3));
  EXPECT_LE(finite_difference_check([&](ConstPoint x) { return q.model.V(x); },
                                    [&](ConstPoint x) { return q.model.grad_V(x); }, pts),
            1e-8);
  Point out(3);
  q.model.hess_V_apply(pts[0], Point{1.0, 1.0, 1.0}, out);
  EXPECT_EQ(out, (Point{0.3, -0.2, 1.1}));
}

TEST(Schauder, SingleCoefficientMidpoint) {
  const auto g = zero_bridge(1);
  const Point y = schauder_to_path(g, Point{1.0});
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 0.5);
  EXPECT_EQ(y[2], 0.0);
}

TEST(Schauder, EndpointsAreAffinePart) {
  TPSGeometry g{2, 1, {-1.0}, {3.0}};
  const Point y = schauder_to_path(g, Point(3, 0.0));
  EXPECT_EQ(y, (Point{-1.0, 0.0, 1.0, 2.0, 3.0}));
}

TEST(Schauder, CoefficientIndexLayout) {
  TPSGeometry g{3, 2, {0.0, 0.0}, {0.0, 0.0}};
  EXPECT_EQ(g.dim(), 14u);
  EXPECT_EQ(g.coeff_index(0, 0, 0), 0u);
  EXPECT_EQ(g.coeff_index(0, 0, 1), 1u);
  EXPECT_EQ(g.coeff_index(1, 1, 0), 4u);
  EXPECT_EQ(g.coeff_index(2, 3, 1), 13u);
}

TEST(Schauder, RoundTripBothOrders) {
  std::mt19937_64 rng(3);
  for (int m : {1, 3, 6, 10}) {
    TPSGeometry g{m, 2, {0.4, -1.0}, {1.3, 0.2}};
    const Point x = random_point(rng, g.dim());
    const Point y = schauder_to_path(g, x);
    const Point interior(y.begin() + static_cast<std::ptrdiff_t>(g.ell), y.end() - static_cast<std::ptrdiff_t>(g.ell));
    const Point back = schauder_to_coeffs(g, interior);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(back[i], x[i], 1e-12);

    const Point yi = random_point(rng, g.dim());
    const Point yy = schauder_to_path(g, schauder_to_coeffs(g, yi));
    for (std::size_t i = 0; i < yi.size(); ++i) ASSERT_NEAR(yy[i + g.ell], yi[i], 1e-12);
  }
}

TEST(Schauder, LengthMismatchThrows) {
  const auto g = zero_bridge(3);
  EXPECT_THROW(schauder_to_path(g, Point(6, 0.0)), std::invalid_argument);
  EXPECT_THROW(schauder_to_coeffs(g, Point(8, 0.0)), std::invalid_argument);
}

TEST(Schauder, LinearPartIsLinear) {
  TPSGeometry g{5, 1, {0.7}, {-0.2}};
  std::mt19937_64 rng(4);
  const Point x = random_point(rng, g.dim()), z = random_point(rng, g.dim());
  const Point e = schauder_to_path(g, Point(g.dim(), 0.0));
  const double a = 1.7, b = -0.4;
  Point comb(g.dim());
  for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = a * x[i] + b * z[i];
  const Point tx = schauder_to_path(g, x), tz = schauder_to_path(g, z), tc = schauder_to_path(g, comb);
  for (std::size_t j = 0; j < tc.size(); ++j) {
    EXPECT_NEAR(tc[j] - e[j], a * (tx[j] - e[j]) + b * (tz[j] - e[j]), 1e-12);
  }
}

TEST(Schauder, BridgeCovariance) {
  for (int m = 1; m <= 5; ++m) {
    const auto g = zero_bridge(m);
    const std::size_t d = g.dim();
    const std::size_t N = g.intervals();
    // Column c of T is the interior path of the c-th unit coefficient.
    std::vector<Point> cols(d);
    for (std::size_t c = 0; c < d; ++c) {
      Point e(d, 0.0);
      e[c] = 1.0;
      cols[c] = schauder_to_path(g, e);
    }
    for (std::size_t j = 1; j < N; ++j) {
      for (std::size_t k = 1; k < N; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += cols[c][j] * cols[c][k];
        const double sj = static_cast<double>(j) / N, sk = static_cast<double>(k) / N;
        ASSERT_NEAR(s, std::min(sj, sk) - sj * sk, 1e-10) << "m=" << m;
      }
    }
  }
}

TEST(Schauder, AdjointIsTranspose) {
  TPSGeometry g{4, 2, {1.0, 2.0}, {-1.0, 0.5}};
  std::mt19937_64 rng(5);
  const Point x = random_point(rng, g.dim());
  const Point c = random_point(rng, g.nodes() * g.ell);
  const Point e = schauder_to_path(g, Point(g.dim(), 0.0));
  const Point tx = schauder_to_path(g, x);
  double lhs = 0.0;
  for (std::size_t j = 0; j < tx.size(); ++j) lhs += (tx[j] - e[j]) * c[j];
  EXPECT_NEAR(lhs, dot(x, schauder_adjoint(g, c)), 1e-11);
}

TEST(Tps, ZeroPotentialIsGaussian) {
  auto t = make_tps_model(zero_bridge(4), HSpec::zero());
  std::mt19937_64 rng(6);
  const Point x = random_point(rng, t.model.d);
  EXPECT_EQ(t.model.V(x), 0.0);
  for (double v : t.model.grad_V(x)) EXPECT_EQ(v, 0.0);
}

TEST(Tps, ConstantPhiQuadrature) {
  TPSGeometry g{5, 1, {2.0}, {-3.0}};
  auto t = make_tps_model(g, HSpec::linear(1.0));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) {
    const Point x = random_point(rng, t.model.d, 2.0);
    EXPECT_DOUBLE_EQ(t.model.V(x), 0.5);
    for (double v : t.model.grad_V(x)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Tps, DoubleWellGradientMatchesFiniteDifferences) {
  auto t = make_double_well_tps(4);
  std::mt19937_64 rng(8);
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(random_point(rng, t.model.d));
  EXPECT_LE(finite_difference_check([&](ConstPoint x) { return t.model.V(x); },
                                    [&](ConstPoint x) { return t.model.grad_V(x); }, pts),
            1e-6);
}

TEST(Tps, GradientAgreesWithNodewiseDirectionalDerivative) {
  for (auto spec : {HSpec::double_well(), HSpec::quadratic(0.7)}) {
    TPSGeometry g{4, 2, {-1.0, 0.5}, {1.0, 0.0}};
    auto t = make_tps_model(g, spec);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
      const Point x = random_point(rng, t.model.d), xi = random_point(rng, t.model.d);
      const double a = dot(t.model.grad_V(x), xi);
      const double b = tps_directional_derivative(t, x, xi);
      ASSERT_NEAR(a, b, 1e-11 * (1 + std::abs(b)));
      // Also against a directional central difference.
      const double eps = 1e-5;
      Point xp = x, xm = x;
      for (std::size_t k = 0; k < x.size(); ++k) {
        xp[k] += eps * xi[k];
        xm[k] -= eps * xi[k];
      }
      const double fd = (t.model.V(xp) - t.model.V(xm)) / (2 * eps);
      ASSERT_NEAR(a, fd, 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST(Tps, HessianMatchesGradientDifferences) {
  auto t = make_double_well_tps(3);
  std::mt19937_64 rng(10);
  const Point x = random_point(rng, t.model.d), eta = random_point(rng, t.model.d);
  Point hv(t.model.d);
  t.model.hess_V_apply(x, eta, hv);
  const double eps = 1e-5;
  Point xp = x, xm = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xp[k] += eps * eta[k];
    xm[k] -= eps * eta[k];
  }
  const Point gp = t.model.grad_V(xp), gm = t.model.grad_V(xm);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(hv[k], (gp[k] - gm[k]) / (2 * eps), 1e-7);
}

TEST(Tps, AlphaNormWeights) {
  auto t = make_double_well_tps(4, 0.6);
  const auto w = t.model.norm.weights();
  const auto& g = t.geometry;
  for (int n = 0; n < g.m; ++n)
    for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) EXPECT_DOUBLE_EQ(w[g.coeff_index(n, k, 0)], std::exp2(-1.2 * n));
  std::mt19937_64 rng(11);
  const Point x = random_point(rng, t.model.d);
  EXPECT_LE(t.model.norm.minus(x), t.model.norm.euclidean(x));
  EXPECT_FALSE(t.warning.has_value());
}

TEST(Tps, WarnsOutsideAlphaWindow) {
  EXPECT_TRUE(make_double_well_tps(3, 0.4).warning.has_value());
  EXPECT_TRUE(make_double_well_tps(3, 0.7).warning.has_value());
  EXPECT_THROW(make_double_well_tps(3, -0.1), std::invalid_argument);
}

TEST(Tps, MissingDerivativesRejected) {
  HSpec h;
  h.d1 = [](double s) { return s; };
  EXPECT_THROW(make_tps_model(zero_bridge(2), h), std::invalid_argument);
  h.d2 = [](double) { return 1.0; };
  h.d3 = [](double) { return 0.0; };
  auto t = make_tps_model(zero_bridge(2), h);
  EXPECT_FALSE(t.model.has_hessian());
}

TEST(Tps, ConcurrentEvaluationIsConsistent) {
  auto t = make_double_well_tps(6);
  std::mt19937_64 rng(12);
  std::vector<Point> xs;
  for (int i = 0; i < 16; ++i) xs.push_back(random_point(rng, t.model.d));
  std::vector<double> seq(16), par(16);
  for (std::size_t i = 0; i < 16; ++i) seq[i] = t.model.V(xs[i]);
  parallel_for(16, [&](std::size_t i) { par[i] = t.model.V(xs[i]); }, 4);
  EXPECT_EQ(seq, par);
}
