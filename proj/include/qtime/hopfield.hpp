#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtime/apgen.hpp"
#include "qtime/core.hpp"
#include "qtime/dynamics.hpp"
#include "qtime/logmap.hpp"
#include "qtime/qlattice.hpp"

namespace qtime {

/// Periodic nonnegative integer sequence n -> cycle[n mod p]; the delays of
/// the network.
class DelaySequence {
 public:
  DelaySequence() : cycle_{0} {}
  explicit DelaySequence(std::vector<std::int64_t> cycle);
  static DelaySequence constant(std::int64_t k) { return DelaySequence({k}); }

  std::int64_t operator()(std::int64_t n) const;
  std::int64_t max() const;
  const std::vector<std::int64_t>& cycle() const { return cycle_; }

  friend bool operator==(const DelaySequence&, const DelaySequence&) = default;

 private:
  std::vector<std::int64_t> cycle_;
};

/// Linear interpolation through (u, value) knots, constant outside.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);

  double operator()(double u) const;
  double lipschitz() const;
  double sup_abs() const;
  bool empty() const { return knots_.empty(); }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// Activation pair (f_j, g_j) with the declared constants the certificate
/// relies on: Lipschitz constants, the bound |g_j| <= N_j, and f_j(0), g_j(0).
struct Activation {
  enum class Kind { kTanh, kTable };

  Kind kind = Kind::kTanh;
  double lip_f = 1.0;
  double lip_g = 1.0;
  double bound_g = 1.0;
  double f0 = 0.0;
  double g0 = 0.0;
  PiecewiseLinear f_table;
  PiecewiseLinear g_table;  // empty: g = f

  double f(double u) const;
  double g(double u) const;

  friend bool operator==(const Activation&, const Activation&) = default;
};

/// High-order Hopfield network already on the log scale:
///   Delta x_i = -c_i x_i + sum_j a_ij f_j(x_j(n - gamma_ij))
///               + sum_{j,l} b_ijl g_j(x_j(n - omega_ijl)) g_l(x_l(n - v_ijl)) + I_i
/// Coefficients are scalar generators that already include (q-1) q^n.
struct HopfieldSpec {
  std::size_t m = 1;
  std::optional<double> q;
  std::vector<ApGenerator> c_hat;  // m
  std::vector<ApGenerator> a_hat;  // m*m, row-major (i, j)
  std::vector<ApGenerator> b_hat;  // m*m*m, (i, j, l)
  std::vector<ApGenerator> I_hat;  // m
  std::vector<Activation> activations;  // m
  std::vector<DelaySequence> gamma;     // m*m
  std::vector<DelaySequence> omega;     // m*m*m
  std::vector<DelaySequence> v;         // m*m*m

  /// Every coefficient zero except c_hat = c, tanh activations, no delays.
  static HopfieldSpec zeros(std::size_t m, double c);

  const ApGenerator& a(std::size_t i, std::size_t j) const { return a_hat[i * m + j]; }
  const ApGenerator& b(std::size_t i, std::size_t j, std::size_t l) const {
    return b_hat[(i * m + j) * m + l];
  }
  std::size_t pair(std::size_t i, std::size_t j) const { return i * m + j; }
  std::size_t triple(std::size_t i, std::size_t j, std::size_t l) const {
    return (i * m + j) * m + l;
  }
  std::int64_t max_delay() const;
  /// Shape and dimension checks; throws std::invalid_argument.
  void validate() const;
};

struct ActivationCheck {
  std::vector<std::string> violations;
  std::size_t samples = 0;
  bool pass() const { return violations.empty(); }
};

/// Seeded spot checks of the Lipschitz constants and of |g| <= N on random
/// pairs drawn from [-range, range], plus the declared f(0) and g(0).
ActivationCheck spot_check_activations(const HopfieldSpec& spec, std::uint64_t seed,
                                       std::size_t samples = 1000,
                                       double range = 10.0);

struct ContractionCertificate {
  double r0 = 0.0;
  IndexRange window;
  std::vector<double> c_minus;       // analytic inf of c_hat_i
  std::vector<double> c_plus;        // analytic sup of c_hat_i
  std::vector<double> c_window_min;  // sampled minimum over the window
  std::vector<double> a_plus;        // m*m
  std::vector<double> b_plus;        // m*m*m
  std::vector<double> I_plus;
  std::vector<double> eta;
  std::vector<double> eta_bar;
  double L = 0.0;          // max I_plus / c_minus
  double ball_lhs = 0.0;   // max eta_i / c_minus_i + L
  double rho = 0.0;        // max eta_bar / min c_minus
  bool ball_ok = false;         // ball_lhs <= r0
  bool contraction_ok = false;  // max eta_bar < min c_minus

  bool feasible() const { return ball_ok && contraction_ok; }
};

/// Builds the contraction certificate from analytic generator bounds.
/// Throws RegressivityError naming neuron and index when c_hat_i <= 0 or
/// c_hat_i >= 1 somewhere in the window (or its analytic bounds allow it).
ContractionCertificate certificate(const HopfieldSpec& spec, double r0,
                                   IndexRange window);

/// Closed-form set of r0 > 0 satisfying the ball inequality; hi empty means
/// unbounded above, lo and hi both empty means no feasible r0.
struct R0Interval {
  bool contraction_ok = false;
  std::optional<double> lo;
  std::optional<double> hi;
  bool unbounded = false;

  bool empty() const { return !lo.has_value(); }
};

R0Interval feasible_r0_interval(const HopfieldSpec& spec, IndexRange window);

/// Scan of a log grid over [1e-3, 1e3] for feasible r0.
struct R0GridSearch {
  std::size_t points = 0;
  std::size_t feasible_points = 0;
  std::optional<double> first;
  std::optional<double> last;
};

R0GridSearch r0_grid_search(const HopfieldSpec& spec, IndexRange window,
                            std::size_t points = 601);

/// Truncation length of the infinite-past sum so the dropped tail is at most
/// tail_tol for inputs in the ball.
std::int64_t tail_steps(const ContractionCertificate& cert, double tail_tol);

/// Phi(phi)_i(n) = sum_{s=n-T}^{n-1} prod_{u=s+1}^{n-1} (1 - c_i(u)) G_i(s) for
/// n in window. phi must be in the ball of radius r0 and cover
/// [window.lo - T - max_delay, window.hi - 1].
LogSignal phi_apply(const LogSignal& phi, const HopfieldSpec& spec, double r0,
                    IndexRange window, double tail_tol = 1e-12);

struct PicardOptions {
  double r0 = 1.0;
  double tol = 1e-10;
  int max_iter = 500;
  IndexRange window{-50, 50};
  double tail_tol = 1e-12;
  /// Initial iterate (constant in n); zeros when empty.
  std::optional<State> start;
};

struct ConvergenceLog {
  std::vector<double> deltas;  // sup |phi_{k+1} - phi_k| per iteration
  bool converged = false;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, ConvergenceLog log)
      : Error(what), log_(std::move(log)) {}
  const ConvergenceLog& log() const { return log_; }

 private:
  ConvergenceLog log_;
};

struct PicardResult {
  /// Fixed point on [window.lo - max_delay, window.hi].
  LogSignal solution;
  ConvergenceLog log;
  ContractionCertificate certificate;
  std::int64_t tail_steps = 0;
};

/// Iterates phi_{k+1} = Phi(phi_k) until sup |phi_{k+1} - phi_k| < tol.
/// Throws InfeasibleError for a failed certificate and ConvergenceError when
/// the iteration budget runs out.
PicardResult picard_solve(const HopfieldSpec& spec, const PicardOptions& options);

/// sup over n in window and i of |Delta x_i(n) - rhs_i(n)|. sol must cover
/// [window.lo - max_delay, window.hi + 1].
double residual(const LogSignal& sol, const HopfieldSpec& spec, IndexRange window);

/// 1 + max c_plus + max eta_bar: residual(picard output) <= C (tol + tail_tol).
double residual_constant(const ContractionCertificate& cert);

GridFunction back_to_quantum(const LogSignal& sol, double q);

/// Residual of the quantum-scale network at each n in window, with the
/// coefficients recovered as c_i(t) = c_hat_i(n) / ((q-1) q^n) and so on.
std::vector<double> quantum_residuals(const GridFunction& x, const HopfieldSpec& spec,
                                      IndexRange window);

/// The network as a DynamicSystem. Delay order: gamma (i, j), omega (i, j, l),
/// v (i, j, l).
DynamicSystem as_dynamic_system(const HopfieldSpec& spec);

}  // namespace qtime
