#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qtime/core.hpp"
#include "qtime/logmap.hpp"
#include "qtime/qlattice.hpp"

namespace qtime {

/// n -> delay d(n) >= 0; the delayed argument is x(n - d(n)).
using DelayFn = std::function<std::int64_t(std::int64_t n)>;

/// Delta x(n) = rhs(n, x(n), x(n - d_1(n)), ...) on Z.
struct DynamicSystem {
  std::size_t dim = 1;
  LogRhs rhs;
  std::vector<DelayFn> delays;
  std::int64_t max_delay = 0;
};

/// D_q x(t) = rhs(t, x(t), x(t q^{-d_1}), ...) on q^Z; delays act on the log
/// index.
struct QuantumSystem {
  std::size_t dim = 1;
  QuantumRhs rhs;
  std::vector<DelayFn> delays;
  std::int64_t max_delay = 0;
};

DynamicSystem to_log_system(const QuantumSystem& sys, double q);

/// Steps x(n+1) = x(n) + F(n, x(n), delayed) from n0 = history.n_max() up to
/// n_end. The result spans [history.n_min(), n_end].
/// Errors: InsufficientSamplesError for a delayed lookup before the history,
/// DivergenceError at the first non-finite state.
LogSignal solve_forward(const DynamicSystem& sys, const LogSignal& history,
                        std::int64_t n_end);

/// Same recurrence written on the quantum scale: x(qt) = x(t) + mu(t) f(...).
GridFunction solve_forward(const QuantumSystem& sys, const GridFunction& history,
                           std::int64_t n_end);

/// sup over n in [n_min + max_delay, n_max - 1] of |Delta x(n) - F(n, ...)|.
double trajectory_residual(const DynamicSystem& sys, const LogSignal& trajectory);

// ---------------------------------------------------------------------------
// Lyapunov machinery for the product system x^D = f(t, x), y^D = f(t, y).

struct LyapunovSpec {
  std::function<double(std::int64_t n, StateView x, StateView y)> V;
  std::function<double(double)> wedge_a;
  std::function<double(double)> wedge_b;
  double lip_V = 1.0;
  double decay_c = 0.5;
};

/// (V(n+1, x+, y+) - V(n, x, y)) / mu with mu = 1 and x+, y+ the one-step
/// images. The system must be undelayed.
double dini_derivative_V(const LyapunovSpec& spec, const DynamicSystem& sys,
                         std::int64_t n, StateView x, StateView y);

struct LyapunovSample {
  std::int64_t n = 0;
  State x;
  State y;
};

enum class LyapunovCondition { kWedge, kClassK, kLipschitz, kDecay };

struct LyapunovViolation {
  LyapunovCondition condition;
  std::int64_t n = 0;
  std::size_t sample = 0;
  std::size_t other = 0;  // second sample for Lipschitz pairs
  double margin = 0.0;    // negative: by how much the inequality failed
};

struct LyapunovReport {
  std::vector<LyapunovViolation> violations;
  std::size_t samples_checked = 0;
  std::size_t pairs_checked = 0;
  bool pass() const { return violations.empty(); }
  bool violates(LyapunovCondition c) const;
};

/// Checks wedge bounds, Lipschitz continuity in (x, y) across samples sharing
/// n, and D+V <= -c V at every sample. The wedges are additionally checked on
/// a log-spaced radius grid over [1e-6, 1e3]. Throws RegressivityError when
/// 1 - c <= 0 (only c < 1 is positively regressive for -c on Z).
LyapunovReport lyapunov_verify(const LyapunovSpec& spec, const DynamicSystem& sys,
                               std::span<const LyapunovSample> samples,
                               const Tolerance& tol = {});

struct StabilityOptions {
  std::int64_t burn_in = 10;
  double tol_resid = 1e-8;
  /// Distances below this are treated as converged. Negative: choose
  /// max(1e-12 (1 + |reference|), 100 * reference residual).
  double floor = -1.0;
};

struct ProbeRun {
  State perturbation;
  std::vector<double> distance;  // per n from n0 to the reference's end
  double rate = 0.0;             // fitted geometric decay after burn-in
  bool monotone = false;
};

struct StabilityReport {
  std::int64_t n0 = 0;
  std::int64_t burn_in = 0;
  double reference_residual = 0.0;
  double floor = 0.0;
  std::vector<ProbeRun> runs;
  bool contracting = false;
};

/// Restarts the system from the reference's initial history plus each
/// perturbation and tracks the sup distance to the reference.
StabilityReport stability_probe(const DynamicSystem& sys, const LogSignal& reference,
                                std::span<const State> perturbations,
                                const StabilityOptions& options = {});

}  // namespace qtime
