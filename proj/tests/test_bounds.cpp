#include <gtest/gtest.h>

#include <cmath>

#include "mhc/mhc.hpp"

using namespace mhc;

namespace {

BoundInputs quadratic_inputs(double b, double R, double h) {
  return make_quadratic_model(1, b).bound_inputs(R, h);
}

BoundInputs si_inputs(double c2, double c3, double c4, double h) {
  BoundInputs in;
  in.K = 1.0;
  in.M_R = 1.0;
  in.C = {0.0, c2, c3, c4};
  in.moments = {{1, 0.8}, {2, 1.0}, {3, 1.6}};
  in.h = h;
  return in;
}

}  // namespace

TEST(ProposalContraction, ConvexValue) {
  BoundInputs in;
  in.K = 0.75;
  in.M_R = 1.25;
  in.h = 0.1;
  EXPECT_NEAR(proposal_contraction_factor(in, ContractionMode::convex), 0.964453125, 1e-15);
}

TEST(ProposalContraction, LipschitzReducesToOu) {
  BoundInputs in;
  in.N_R = 0.0;
  in.h = 1.0;
  EXPECT_DOUBLE_EQ(proposal_contraction_factor(in, ContractionMode::lipschitz), 0.5);
}

TEST(ProposalContraction, ConvexSlopeAtSmallStep) {
  BoundInputs in;
  in.K = 0.75;
  in.M_R = 1.25;
  in.h = 1e-4;
  const double slope = (1 - proposal_contraction_factor(in, ContractionMode::convex)) / in.h;
  EXPECT_NEAR(slope, 0.375 - 1.25 * 1.25 * in.h / 8.0, 1e-9);
  EXPECT_NEAR(slope, 0.375, 1e-4);
}

TEST(ProposalContraction, MissingConstantThrows) {
  BoundInputs in;
  in.h = 0.1;
  EXPECT_THROW(proposal_contraction_factor(in, ContractionMode::convex), std::invalid_argument);
  EXPECT_THROW(proposal_contraction_factor(in, ContractionMode::lipschitz), std::invalid_argument);
}

TEST(BoundInputs, Validation) {
  BoundInputs in;
  in.K = 1.25;
  EXPECT_THROW(in.validate(), std::invalid_argument);
  in.K = 0.5;
  in.moments = {{1, 1.2}, {2, 1.0}};
  EXPECT_THROW(in.validate(), std::invalid_argument);
  in.moments = {{1, 0.8}, {2, 1.0}};
  EXPECT_NO_THROW(in.validate());
  in.h = 2.0;
  EXPECT_THROW(in.validate(), std::invalid_argument);
  in.h = 0.1;
  in.unspecified.A = -1.0;
  EXPECT_THROW(in.validate(), std::invalid_argument);
}

TEST(MhContraction, OuValue) {
  BoundInputs in;
  in.C[1] = 0.25;
  in.moments = {{2, 1.0}};
  in.unspecified.A = 0.0;
  in.h = 0.2;
  for (double R : {0.5, 3.0, 40.0}) {
    in.R = R;
    const auto c = mh_contraction_factor_ou(in);
    EXPECT_NEAR(c.value, 0.95, 1e-15);
    EXPECT_TRUE(c.contractive);
  }
}

TEST(MhContraction, SemiImplicitValue) {
  BoundInputs in;
  in.K = 1.0;
  in.M_R = 1.0;
  in.h = 0.1;
  EXPECT_NEAR(mh_contraction_factor_semi_implicit(in, {}).value, 0.95125, 1e-15);
  EXPECT_EQ(semi_implicit_contraction(1.0, 1.0, {0.3, 0.2, 0.1}, 0.0).value, 1.0);
}

TEST(MhContraction, SemiImplicitLeadingOrder) {
  const SemiImplicitAux aux{0.4, 0.3, 0.2};
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const double c = semi_implicit_contraction(0.8, 1.1, aux, h).value;
    EXPECT_LE(std::abs((1 - c) / h - 0.4), 2.0 * h);
  }
}

TEST(MhContraction, AuxFromExplicitPolynomials) {
  auto in = quadratic_inputs(0.25, 1.0, 0.01);
  const double g = 1.25;
  const auto aux = semi_implicit_aux(in, g);
  const double h32 = std::pow(0.01, 1.5);
  EXPECT_NEAR(aux.beta, rejection_bound(in, BoundKind::semi_implicit_explicit, {1.0, g}) / h32, 1e-12);
  const double q = acceptance_sensitivity_bound(in, BoundKind::semi_implicit_explicit, {1.0, g}) / h32;
  EXPECT_NEAR(aux.gamma, std::sqrt(in.m(2)) * q, 1e-12);
  EXPECT_NEAR(aux.delta, q * g, 1e-12);
}

TEST(RejectionBound, OuAtOrigin) {
  auto in = quadratic_inputs(0.25, 1.0, 0.1);
  in.moments[2] = 1.0;
  EXPECT_NEAR(rejection_bound(in, BoundKind::ou_p2zero, {0.0, 0.0}), 0.025, 1e-15);
}

TEST(RejectionBound, SemiImplicitAtStationaryPoint) {
  const double h = 0.05;
  auto in = si_inputs(0.25, 0.1, 0.2, h);
  const double expected = 0.25 * 0.1 * 1.6 * std::pow(h, 1.5) + 0.5 * 0.25 * 1.25 * 1.0 * h * h;
  EXPECT_NEAR(rejection_bound(in, BoundKind::semi_implicit_explicit, {0.0, 0.0}), expected, 1e-16);
}

TEST(RejectionBound, VanishesAsStepShrinks) {
  auto in = si_inputs(0.25, 0.1, 0.2, 1e-12);
  in.C[0] = 0.3;
  EXPECT_LT(rejection_bound(in, BoundKind::semi_implicit_explicit, {1.0, 2.0}), 1e-15);
  EXPECT_LT(rejection_bound(in, BoundKind::ou_p2zero, {1.0, 2.0}), 1e-5);
}

TEST(RejectionBound, MissingConstantThrows) {
  BoundInputs in;
  in.h = 0.1;
  EXPECT_THROW(rejection_bound(in, BoundKind::ou_p2zero, {}), std::invalid_argument);
  EXPECT_THROW(rejection_bound(in, BoundKind::semi_implicit_explicit, {}), std::invalid_argument);
}

TEST(RejectionBound, IncreasingInStepSize) {
  auto in = si_inputs(0.25, 0.1, 0.2, 0.01);
  in.C[0] = 0.1;
  double prev_si = 0.0, prev_ou = 0.0;
  for (double h = 0.001; h <= 0.2; h += 0.001) {
    in.h = h;
    const double si = rejection_bound(in, BoundKind::semi_implicit_explicit, {1.0, 1.5});
    const double ou = rejection_bound(in, BoundKind::ou_p2zero, {1.0, 1.5});
    EXPECT_GT(si, prev_si);
    EXPECT_GT(ou, prev_ou);
    prev_si = si;
    prev_ou = ou;
  }
}

TEST(SensitivityBound, OuWithoutCurvature) {
  BoundInputs in;
  in.C = {0.6, 0.0, std::nullopt, std::nullopt};
  in.moments = {{2, 1.0}};
  in.h = 0.3;
  EXPECT_NEAR(acceptance_sensitivity_bound(in, BoundKind::ou_p2zero, {5.0, 0.0}), 0.09, 1e-15);
}

TEST(SensitivityBound, SemiImplicitLeadingTerm) {
  const double h = 1e-6;
  auto in = si_inputs(0.25, 0.1, 0.2, h);
  const double lead = 0.25 * std::pow(h, 1.5) * (0.2 * 1.6 + 1.25 * 0.25 * 0.8);
  EXPECT_NEAR(acceptance_sensitivity_bound(in, BoundKind::semi_implicit_explicit, {0.0, 0.0}) / lead, 1.0, 1e-2);
}

TEST(SensitivityBound, SemiImplicitScalingRatio) {
  auto in = si_inputs(0.25, 0.1, 0.2, 1e-5);
  const double a = acceptance_sensitivity_bound(in, BoundKind::semi_implicit_explicit, {1.0, 1.0});
  in.h = 2e-5;
  const double b = acceptance_sensitivity_bound(in, BoundKind::semi_implicit_explicit, {1.0, 1.0});
  EXPECT_NEAR(b / a, std::pow(2.0, 1.5), 1e-2);
}

TEST(Lyapunov, ExitBoundValue) {
  BoundInputs in;
  in.K = 0.5;
  in.R = 4.0;
  in.h = 0.05;
  const auto b = lyapunov_exit_bound(in, 0.0, 100);
  EXPECT_NEAR(b.raw, 3.5826565528689462, 1e-13);
  EXPECT_EQ(b.clipped, 1.0);
}

TEST(Lyapunov, ExitBoundVanishesForLargeRadius) {
  BoundInputs in;
  in.K = 0.5;
  in.R = 1e3;
  in.h = 0.05;
  EXPECT_EQ(lyapunov_exit_bound(in, 0.0, 100).raw, 0.0);
}

TEST(Lyapunov, FunctionValue) {
  EXPECT_NEAR(lyapunov_function(0.5, 2.0), 1.1331484530668263, 1e-15);
  EXPECT_EQ(lyapunov_function(0.7, 0.0), 1.0);
}

TEST(Lyapunov, DriftConstantInvertsInequality) {
  const double K = 0.5, h = 0.1, x = 1.5;
  const double C2 = 0.7;
  const double ef = std::pow(lyapunov_function(K, x), 1 - K * h / 4) * std::exp(C2 * h);
  EXPECT_NEAR(lyapunov_drift_constant(K, h, x, ef), C2, 1e-12);
}

TEST(Iterated, GeometricOnly) {
  EXPECT_NEAR(iterated_wasserstein_bound(0.95, 10, 1.0, 4.0, 0.0, 0.0), 0.5987369392383787, 1e-15);
  EXPECT_EQ(iterated_wasserstein_bound(0.9, 7, 2.0, 1.0, 0.0, 0.0), std::pow(0.9, 7) * 2.0);
}

TEST(Iterated, ZeroSteps) {
  EXPECT_DOUBLE_EQ(iterated_wasserstein_bound(0.5, 0, 1.5, 4.0, 0.1, 0.2), 1.5 + 4.0 * 0.3);
}

TEST(Iterated, RejectsNonContraction) {
  EXPECT_THROW(iterated_wasserstein_bound(1.0, 5, 1.0, 1.0, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(iterated_wasserstein_bound(0.9, 5, 1.0, 1.0, 1.5, 0.0), std::invalid_argument);
}

TEST(Iterated, ComposesIntoMainBound) {
  // Contraction 1 - Kh/4 with diameter 4R; both exit terms are Lyapunov bounds
  // started at radius R for the ball of radius 2R.
  BoundInputs in;
  in.K = 0.6;
  in.R = 3.0;
  in.h = 0.02;
  in.unspecified.D_exit = 1e-3;
  in.unspecified.D_main = 8.0 * in.unspecified.D_exit;
  const std::size_t n = 150;
  BoundInputs ball = in;
  ball.R = 2.0 * in.R;
  const double exit = lyapunov_exit_bound(ball, in.R, n).raw;
  ASSERT_LE(exit, 1.0);
  const double w0 = 1.7;
  const double composed = iterated_wasserstein_bound(1 - in.k() * in.h / 4, n, w0, 4 * in.R, exit, exit);
  const double expected = std::pow(1 - in.k() * in.h / 4, n) * w0 +
                          8e-3 * in.R * std::exp(-in.k() * in.R * in.R / 8) * n * in.h;
  EXPECT_NEAR(composed, expected, 1e-13);
  EXPECT_NEAR(convergence_bound_main(in, n, w0), expected, 1e-13);
}

TEST(FinalBound, ZeroStepsIsGeometricFloor) {
  EXPECT_EQ(final_distance_bound(0.5, 0.05, 5.0, 1.0, 0), 58.0 * 5.0);
}

TEST(FinalBound, Value) {
  EXPECT_NEAR(final_distance_bound(0.5, 0.05, 5.0, 1.0, 200), 116.99565630387264, 1e-11);
  const double exit_term = 5.0 * std::exp(-25.0 / 66.0) * 10.0;
  EXPECT_NEAR(exit_term, 34.23454173565915, 1e-12);
}

TEST(FinalBound, ExitTermDecreasesInRadius) {
  double prev = INFINITY;
  // Past R = 40 the exit term drops below the rounding of the geometric term.
  for (double R = 20.0; R < 40.0; R += 0.5) {
    const double v = final_distance_bound(0.5, 0.05, R, 1.0, 1000) - 58.0 * R * std::pow(1 - 0.5 * 0.05 / 4, 1000);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Planner, MixingTimeValue) {
  EXPECT_NEAR(plan_detail::mixing_time(0.5, 5.0, 0.1), 69.32490557227608, 1e-11);
}

TEST(Planner, LargeToleranceNeedsNoSteps) {
  const auto p = step_planner(200.0, 0.5, 1.0, 1.0, 1.0);
  ASSERT_TRUE(p.feasible);
  EXPECT_EQ(p.R, 1.0);
  EXPECT_EQ(p.n, 0u);
  EXPECT_LT(final_distance_bound(0.5, p.h, p.R, 1.0, p.n), 200.0);
}

TEST(Planner, FeasiblePlansSatisfyAllConstraints) {
  for (double K : {0.2, 0.5, 1.0}) {
    for (double eps : {0.01, 0.1, 1.0}) {
      for (double D : {0.5, 1.0, 10.0}) {
        const auto p = step_planner(eps, K, D, 1.0, 1.0);
        ASSERT_TRUE(p.feasible) << K << " " << eps << " " << D;
        const auto c = check_plan(eps, K, D, p.R, p.h, p.n);
        EXPECT_TRUE(c.mixing && c.exit_term && c.radius);
        EXPECT_LT(final_distance_bound(K, p.h, p.R, D, p.n), eps);
        EXPECT_EQ(p.bound, final_distance_bound(K, p.h, p.R, D, p.n));
      }
    }
  }
}

TEST(Planner, InfeasibleIsStructured) {
  const auto p = step_planner(1e-3, 0.5, 1.0, 1.0, 1.0, 2.0);
  EXPECT_FALSE(p.feasible);
  EXPECT_EQ(p.violated, "radius_condition");
  EXPECT_THROW(step_planner(0.0, 0.5, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(HessianNorms, QuadraticMatchesEigenvalues) {
  auto q = make_quadratic_model(std::vector<double>{0.25, -0.6});
  const auto hn = estimate_hessian_norms(q.model, 2.0, 5);
  EXPECT_NEAR(hn.M, q.constants.M, 1e-10);
  EXPECT_NEAR(hn.N, q.constants.N, 1e-10);
}

TEST(HessianNorms, WeightedNormUsesConjugatedOperator) {
  auto q = make_quadratic_model(std::vector<double>{0.5, 0.5});
  q.model.norm = NormSpace(std::vector<double>{0.25, 1.0});
  const auto hn = estimate_hessian_norms(q.model, 1.0, 5);
  EXPECT_NEAR(hn.M, 1.5, 1e-10);
}

TEST(HessianNorms, SupGradientOfQuadratic) {
  auto q = make_quadratic_model(1, 0.25);
  EXPECT_NEAR(estimate_sup_grad_u_norm(q.model, 2.0), 2.5, 1e-12);
}

TEST(Report, QuadraticEchoesConstants) {
  auto in = quadratic_inputs(0.25, 1.0, 0.1);
  const auto rep = evaluate_bounds(in, {0.0, 0.0}, 1.25, 100);
  ASSERT_NE(rep.find("proposal_contraction_convex"), nullptr);
  EXPECT_NEAR(rep.find("proposal_contraction_convex")->value, convex_proposal_factor(1.0, 1.25, 0.1), 1e-15);
  ASSERT_NE(rep.find("mh_contraction_semi_implicit"), nullptr);
  EXPECT_EQ(rep.inputs.unspecified.A, 1.0);
  for (const auto& e : rep.entries) EXPECT_TRUE(std::isfinite(e.value)) << e.name;
}

TEST(Report, MissingInputsAreSkippedNotFatal) {
  BoundInputs in;
  in.h = 0.1;
  const auto rep = evaluate_bounds(in, {});
  EXPECT_TRUE(rep.entries.empty());
  EXPECT_FALSE(rep.skipped.empty());
}

TEST(Moments, ChiClosedForm) {
  EXPECT_NEAR(euclidean_norm_moment(1, 1), std::sqrt(2.0 / M_PI), 1e-15);
  EXPECT_NEAR(euclidean_norm_moment(7, 2), 7.0, 1e-12);
  EXPECT_NEAR(euclidean_norm_moment(3, 4), 15.0, 1e-12);
}
