#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qtime/apgen.hpp"
#include "qtime/hopfield.hpp"

using namespace qtime;

namespace {

const IndexRange kWindow{-50, 50};

LogSignal random_in_ball(IndexRange r, std::size_t m, double r0, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-r0, r0);
  return LogSignal::tabulate(r, m, [&](std::int64_t) {
    State s(m);
    for (double& x : s) x = d(rng);
    return s;
  });
}

HopfieldSpec zero_coupling(std::size_t m) { return HopfieldSpec::zeros(m, 0.5); }

}  // namespace

TEST(DelaySequence, PeriodicLookup) {
  const DelaySequence d({1, 3, 2});
  EXPECT_EQ(d(0), 1);
  EXPECT_EQ(d(4), 3);
  EXPECT_EQ(d(-1), 2);
  EXPECT_EQ(d.max(), 3);
  EXPECT_THROW(DelaySequence({1, -1}), std::invalid_argument);
}

TEST(PiecewiseLinear, InterpolatesAndClamps) {
  const PiecewiseLinear t({{-1.0, -0.5}, {0.0, 0.0}, {2.0, 1.0}});
  EXPECT_EQ(t(-5.0), -0.5);
  EXPECT_EQ(t(1.0), 0.5);
  EXPECT_EQ(t(9.0), 1.0);
  EXPECT_EQ(t.lipschitz(), 0.5);
  EXPECT_EQ(t.sup_abs(), 1.0);
  EXPECT_THROW(PiecewiseLinear({{1.0, 0.0}, {0.0, 1.0}}), std::invalid_argument);
}

TEST(SpotCheck, CatchesWrongDeclaredConstants) {
  HopfieldSpec s = oracle::scalar_network();
  EXPECT_TRUE(spot_check_activations(s, 0).pass());
  s.activations[0].lip_f = 0.5;
  s.activations[0].bound_g = 0.9;
  const ActivationCheck c = spot_check_activations(s, 0);
  EXPECT_FALSE(c.pass());
  EXPECT_EQ(c.violations.size(), 2u);
  EXPECT_EQ(spot_check_activations(s, 3).violations.size(), 2u);
}

TEST(SpotCheck, IsDeterministicPerSeed) {
  HopfieldSpec s = oracle::scalar_network();
  s.activations[0].lip_g = 0.99;
  EXPECT_EQ(spot_check_activations(s, 5).violations, spot_check_activations(s, 5).violations);
}

TEST(Certificate, ScalarExample) {
  const ContractionCertificate c = certificate(oracle::scalar_network(), 1.0, kWindow);
  EXPECT_DOUBLE_EQ(c.eta_bar[0], 0.4);
  EXPECT_DOUBLE_EQ(c.L, 0.2);
  EXPECT_DOUBLE_EQ(c.eta[0], 0.3);
  EXPECT_DOUBLE_EQ(c.ball_lhs, 0.8);
  EXPECT_DOUBLE_EQ(c.rho, 0.8);
  EXPECT_TRUE(c.ball_ok);
  EXPECT_TRUE(c.contraction_ok);
  EXPECT_TRUE(c.feasible());
}

TEST(Certificate, ZeroCouplingIsAlwaysFeasible) {
  for (double r0 : {1e-6, 1.0, 1e6}) {
    const ContractionCertificate c = certificate(zero_coupling(2), r0, kWindow);
    EXPECT_EQ(c.rho, 0.0);
    EXPECT_EQ(c.L, 0.0);
    EXPECT_EQ(c.eta[0], 0.0);
    EXPECT_TRUE(c.feasible());
  }
  const R0Interval iv = feasible_r0_interval(zero_coupling(2), kWindow);
  EXPECT_TRUE(iv.unbounded);
  EXPECT_EQ(iv.lo, 0.0);
}

TEST(Certificate, WeakDecayFailsContraction) {
  HopfieldSpec s = oracle::scalar_network();
  s.c_hat[0] = ApGenerator::scalar(0.3);
  const ContractionCertificate c = certificate(s, 1.0, kWindow);
  EXPECT_DOUBLE_EQ(c.eta_bar[0], 0.4);
  EXPECT_FALSE(c.contraction_ok);
  EXPECT_FALSE(c.feasible());
}

TEST(Certificate, RegressivityViolationsNameNeuronAndIndex) {
  HopfieldSpec s = zero_coupling(2);
  s.c_hat[1] = ApGenerator::scalar(0.5, {{0.6, 2.0 * std::numbers::pi / 10.0, 0.0}});
  try {
    (void)certificate(s, 1.0, {0, 20});
    FAIL() << "expected RegressivityError";
  } catch (const RegressivityError& e) {
    EXPECT_EQ(e.index(), 0);  // 0.5 + 0.6 >= 1 at n = 0
    EXPECT_NE(std::string(e.what()).find("c_hat_2"), std::string::npos);
  }
  s.c_hat[1] = ApGenerator::scalar(0.2, {{0.25, 1.0, 0.0}});
  EXPECT_THROW((void)certificate(s, 1.0, {0, 1}), RegressivityError);
}

TEST(Certificate, EtaBarRecomputesFromTheSpec) {
  const HopfieldSpec s = oracle::three_neuron_network(false);
  const ContractionCertificate c = certificate(s, 1.0, kWindow);
  for (std::size_t i = 0; i < 3; ++i) {
    double expect = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      expect += s.a_hat[s.pair(i, j)].sup_bound(0) * s.activations[j].lip_f;
      for (std::size_t l = 0; l < 3; ++l) {
        expect += s.b_hat[s.triple(i, j, l)].sup_bound(0) *
                  (s.activations[l].bound_g * s.activations[j].lip_g +
                   s.activations[j].bound_g * s.activations[l].lip_g);
      }
    }
    EXPECT_DOUBLE_EQ(c.eta_bar[i], expect);
    EXPECT_LE(c.c_minus[i], c.c_window_min[i]);
  }
  EXPECT_TRUE(c.feasible());
  EXPECT_LT(c.rho, 1.0);
}

TEST(R0Interval, MatchesQuadraticRoots) {
  const R0Interval iv = feasible_r0_interval(oracle::scalar_network(), kWindow);
  ASSERT_TRUE(iv.lo && iv.hi);
  EXPECT_NEAR(*iv.lo, (3.0 - std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_NEAR(*iv.hi, (3.0 + std::sqrt(5.0)) / 2.0, 1e-12);
  const R0GridSearch g = r0_grid_search(oracle::scalar_network(), kWindow);
  ASSERT_TRUE(g.first && g.last);
  EXPECT_GE(*g.first, *iv.lo);
  EXPECT_LE(*g.last, *iv.hi);
  // Certificate agrees with the closed form on both sides of each endpoint.
  EXPECT_TRUE(certificate(oracle::scalar_network(), *iv.lo * (1 + 1e-9), kWindow).ball_ok);
  EXPECT_FALSE(certificate(oracle::scalar_network(), *iv.lo * (1 - 1e-6), kWindow).ball_ok);
  EXPECT_FALSE(certificate(oracle::scalar_network(), *iv.hi * (1 + 1e-6), kWindow).ball_ok);
}

TEST(PhiApply, ZeroCouplingGivesZero) {
  std::mt19937_64 rng(1);
  const HopfieldSpec s = zero_coupling(2);
  const LogSignal phi = random_in_ball({-200, 60}, 2, 1.0, rng);
  EXPECT_EQ(phi_apply(phi, s, 1.0, {0, 50}).sup_norm(), 0.0);
}

TEST(PhiApply, GeometricSeriesAtZeroInput) {
  const HopfieldSpec s = oracle::scalar_network();
  const ContractionCertificate cert = certificate(s, 1.0, {0, 10});
  const std::int64_t T = tail_steps(cert, 1e-12);
  const LogSignal zero = LogSignal::constant({-T - 1, 10}, {0.0});
  const LogSignal out = phi_apply(zero, s, 1.0, {0, 10});
  const double expect = 0.1 / 0.5 * (1.0 - std::pow(0.5, static_cast<double>(T)));
  for (std::int64_t n = 0; n <= 10; ++n) EXPECT_NEAR(out.value(n), expect, 1e-15);
  EXPECT_NEAR(out.value(0), 0.2, 1e-12);
}

TEST(PhiApply, Preconditions) {
  const HopfieldSpec s = oracle::scalar_network();
  const LogSignal short_hist = LogSignal::constant({-5, 10}, {0.0});
  EXPECT_THROW(phi_apply(short_hist, s, 1.0, {0, 10}), InsufficientSamplesError);
  const LogSignal big = LogSignal::constant({-100, 10}, {2.0});
  EXPECT_THROW(phi_apply(big, s, 1.0, {0, 10}), std::invalid_argument);
  const LogSignal zero = LogSignal::constant({-100, 10}, {0.0});
  EXPECT_THROW(phi_apply(zero, s, 0.2, {0, 10}), InfeasibleError);
}

TEST(PhiApply, ContractionAndBallInvariance) {
  std::mt19937_64 rng(17);
  for (bool rational : {false, true}) {
    const HopfieldSpec s = oracle::three_neuron_network(rational);
    const double r0 = 1.0;
    const ContractionCertificate cert = certificate(s, r0, {0, 40});
    const IndexRange in{-200, 40};
    for (int trial = 0; trial < 10; ++trial) {
      const LogSignal phi = random_in_ball(in, 3, r0, rng);
      const LogSignal psi = random_in_ball(in, 3, r0, rng);
      const LogSignal a = phi_apply(phi, s, r0, {0, 40});
      const LogSignal b = phi_apply(psi, s, r0, {0, 40});
      EXPECT_LE(a.sup_norm(), r0 + 1e-12);
      EXPECT_LE(sup_distance(a, b, {0, 40}), cert.rho * sup_distance(phi, psi, in) + 2e-12);
    }
  }
}

TEST(Picard, ZeroCouplingConvergesImmediately) {
  PicardOptions o;
  const PicardResult r = picard_solve(zero_coupling(2), o);
  EXPECT_EQ(r.solution.sup_norm(), 0.0);
  ASSERT_EQ(r.log.deltas.size(), 1u);
  EXPECT_TRUE(r.log.converged);
  EXPECT_EQ(residual(r.solution.restricted({-50, 50}), zero_coupling(2), {-50, 49}), 0.0);
}

TEST(Picard, ScalarFixedPoint) {
  PicardOptions o;
  const HopfieldSpec s = oracle::scalar_network();
  const PicardResult r = picard_solve(s, o);
  const double x = oracle::scalar_fixed_point();
  for (std::int64_t n = r.solution.n_min(); n <= r.solution.n_max(); ++n) {
    EXPECT_NEAR(r.solution.value(n), x, 1e-8);
  }
  EXPECT_LE(residual(r.solution, s, {-50, 49}),
            residual_constant(r.certificate) * (o.tol + o.tail_tol));
}

TEST(Picard, GeometricDeltasAndUniqueness) {
  const HopfieldSpec s = oracle::three_neuron_network(false);
  PicardOptions o;
  const PicardResult a = picard_solve(s, o);
  const double rho = a.certificate.rho;
  for (std::size_t k = 1; k < a.log.deltas.size(); ++k) {
    EXPECT_LE(a.log.deltas[k], rho * a.log.deltas[k - 1] + 2 * o.tail_tol);
  }
  o.start = State{1.0, 1.0, 1.0};
  const PicardResult b = picard_solve(s, o);
  EXPECT_LE(sup_distance(a.solution, b.solution, a.solution.range()), 2 * o.tol);
}

TEST(Picard, BudgetExhaustionCarriesLog) {
  PicardOptions o;
  o.max_iter = 3;
  try {
    (void)picard_solve(oracle::scalar_network(), o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.log().deltas.size(), 3u);
    EXPECT_FALSE(e.log().converged);
  }
  PicardOptions bad;
  bad.r0 = 0.1;
  EXPECT_THROW((void)picard_solve(oracle::scalar_network(), bad), InfeasibleError);
}

TEST(Picard, PeriodicCoefficientsGivePeriodicSolution) {
  const HopfieldSpec s = oracle::three_neuron_network(true);
  PicardOptions o;
  o.window = {-100, 100};
  const PicardResult r = picard_solve(s, o);
  double worst = 0.0;
  for (std::int64_t n = r.solution.n_min(); n + 35 <= r.solution.n_max(); ++n) {
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(r.solution.value(n + 35, i) - r.solution.value(n, i)));
    }
  }
  EXPECT_LE(worst, 2 * (o.tol + o.tail_tol));
}

TEST(Picard, SolutionShowsApEvidence) {
  const HopfieldSpec s = oracle::three_neuron_network(false);
  PicardOptions o;
  o.window = {-700, 700};
  const PicardResult r = picard_solve(s, o);
  const ApClassification c = ap_classify(r.solution, fitted_options(r.solution.range()));
  EXPECT_TRUE(c.ap_evidence);
}

TEST(Residual, DetectsPerturbation) {
  const HopfieldSpec s = oracle::scalar_network();
  const PicardResult r = picard_solve(s, {});
  LogSignal bumped = r.solution;
  const double delta = 1e-3;
  bumped.mutable_at(10)[0] += delta;
  const double cmax = r.certificate.c_plus[0];
  EXPECT_GE(residual(bumped, s, {-50, 49}), delta * (1.0 - cmax - r.certificate.eta_bar[0]));
  EXPECT_THROW(residual(r.solution, s, {-60, 49}), InsufficientSamplesError);
}

TEST(BackToQuantum, RoundTripAndQuantumResidual) {
  const HopfieldSpec s = oracle::three_neuron_network(false);
  PicardOptions o;
  o.window = {-20, 20};
  const PicardResult r = picard_solve(s, o);
  const GridFunction xq = back_to_quantum(r.solution, 2.0);
  EXPECT_EQ(lift(xq), r.solution);
  const IndexRange w{-20, 19};
  const std::vector<double> qres = quantum_residuals(xq, s, w);
  for (std::int64_t n = w.lo; n <= w.hi; ++n) {
    const double log_res = residual(r.solution, s, {n, n});
    EXPECT_NEAR(qres[static_cast<std::size_t>(n - w.lo)] * (2.0 - 1.0) * std::pow(2.0, n),
                log_res, 1e-12 + 1e-9 * log_res);
  }
  const HopfieldSpec z = zero_coupling(1);
  const GridFunction zq = back_to_quantum(LogSignal::constant({0, 5}, {0.0}), 2.0);
  EXPECT_EQ(zq.value(3), 0.0);
  EXPECT_EQ(quantum_residuals(zq, z, {0, 4}), std::vector<double>(5, 0.0));
}

TEST(AsDynamicSystem, SolutionIsATrajectory) {
  const HopfieldSpec s = oracle::three_neuron_network(false);
  PicardOptions o;
  o.window = {-20, 20};
  const PicardResult r = picard_solve(s, o);
  EXPECT_LE(trajectory_residual(as_dynamic_system(s), r.solution), 1e-9);
}
