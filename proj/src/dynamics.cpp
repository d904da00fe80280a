#include "qtime/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qtime {

namespace {

// Sample store shared by both steppers: row-major states on [n_min, n_end],
// with the full capacity reserved so spans stay valid while stepping.
class Trajectory {
 public:
  Trajectory(std::int64_t n_min, std::int64_t n_end, std::size_t dim,
             std::span<const double> history)
      : n_min_(n_min), dim_(dim) {
    data_.reserve(IndexRange{n_min, n_end}.size() * dim);
    data_.assign(history.begin(), history.end());
  }

  StateView at(std::int64_t n) const {
    return StateView(data_).subspan(static_cast<std::size_t>(n - n_min_) * dim_,
                                    dim_);
  }
  void push(const State& x) { data_.insert(data_.end(), x.begin(), x.end()); }
  std::vector<double> release() { return std::move(data_); }

 private:
  std::int64_t n_min_;
  std::size_t dim_;
  std::vector<double> data_;
};

DelayedStates gather_delayed(const std::vector<DelayFn>& delays,
                             std::int64_t max_delay, std::int64_t n,
                             std::int64_t first_available,
                             const Trajectory& traj) {
  DelayedStates delayed;
  delayed.reserve(delays.size());
  for (const DelayFn& d : delays) {
    const std::int64_t k = d(n);
    if (k < 0 || k > max_delay) {
      throw std::invalid_argument("delay " + std::to_string(k) + " at index " +
                                  std::to_string(n) + " outside [0, " +
                                  std::to_string(max_delay) + "]");
    }
    if (n - k < first_available) {
      throw InsufficientSamplesError(
          "delayed lookup x(" + std::to_string(n - k) + ") at step " +
              std::to_string(n) + " precedes the history start " +
              std::to_string(first_available),
          n - k, first_available - 1);
    }
    delayed.push_back(traj.at(n - k));
  }
  return delayed;
}

State step_state(StateView x, const State& increment, std::int64_t next_index) {
  State next(x.begin(), x.end());
  for (std::size_t c = 0; c < next.size(); ++c) {
    next[c] += increment[c];
    if (!std::isfinite(next[c])) {
      throw DivergenceError("state became non-finite at index " +
                                std::to_string(next_index),
                            next_index);
    }
  }
  return next;
}

}  // namespace

DynamicSystem to_log_system(const QuantumSystem& sys, double q) {
  return DynamicSystem{sys.dim, transform_rhs(sys.rhs, q, sys.dim), sys.delays,
                       sys.max_delay};
}

LogSignal solve_forward(const DynamicSystem& sys, const LogSignal& history,
                        std::int64_t n_end) {
  if (history.dim() != sys.dim) {
    throw std::invalid_argument("solve_forward: history dimension mismatch");
  }
  const std::int64_t n0 = history.n_max();
  if (n_end < n0) {
    throw std::invalid_argument("solve_forward: n_end precedes the history end");
  }
  Trajectory traj(history.n_min(), n_end, sys.dim, history.data());
  for (std::int64_t n = n0; n < n_end; ++n) {
    const DelayedStates delayed =
        gather_delayed(sys.delays, sys.max_delay, n, history.n_min(), traj);
    const StateView x = traj.at(n);
    const State F = sys.rhs(LogIndex(n), x, delayed);
    if (F.size() != sys.dim) {
      throw RhsEvaluationError("rhs returned wrong dimension at index " +
                               std::to_string(n));
    }
    traj.push(step_state(x, F, n + 1));
  }
  return LogSignal(history.n_min(), n_end, sys.dim, traj.release(),
                   history.ninf_value());
}

GridFunction solve_forward(const QuantumSystem& sys, const GridFunction& history,
                           std::int64_t n_end) {
  const QLattice& lat = history.lattice();
  if (!lat.is_quantum()) {
    throw std::invalid_argument("solve_forward: history must live on q^Z");
  }
  if (history.dim() != sys.dim) {
    throw std::invalid_argument("solve_forward: history dimension mismatch");
  }
  const std::int64_t n0 = lat.n_max();
  if (n_end < n0) {
    throw std::invalid_argument("solve_forward: n_end precedes the history end");
  }
  Trajectory traj(lat.n_min(), n_end, sys.dim, history.data());
  for (std::int64_t n = n0; n < n_end; ++n) {
    const DelayedStates delayed =
        gather_delayed(sys.delays, sys.max_delay, n, lat.n_min(), traj);
    const StateView x = traj.at(n);
    State f = sys.rhs(QPoint{LogIndex(n), lat.point(n)}, x, delayed);
    if (f.size() != sys.dim) {
      throw RhsEvaluationError("rhs returned wrong dimension at index " +
                               std::to_string(n));
    }
    const double m = lat.graininess(n);
    for (double& v : f) v *= m;
    traj.push(step_state(x, f, n + 1));
  }
  return GridFunction(lat.with_window(lat.n_min(), n_end), sys.dim,
                      traj.release(), history.zero_value());
}

double trajectory_residual(const DynamicSystem& sys, const LogSignal& trajectory) {
  double worst = 0.0;
  for (std::int64_t n = trajectory.n_min() + sys.max_delay; n < trajectory.n_max();
       ++n) {
    DelayedStates delayed;
    for (const DelayFn& d : sys.delays) delayed.push_back(trajectory.at(n - d(n)));
    const State F = sys.rhs(LogIndex(n), trajectory.at(n), delayed);
    const StateView x = trajectory.at(n);
    const StateView next = trajectory.at(n + 1);
    for (std::size_t c = 0; c < F.size(); ++c) {
      worst = std::max(worst, std::abs(next[c] - x[c] - F[c]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Lyapunov

namespace {

State one_step(const DynamicSystem& sys, std::int64_t n, StateView x) {
  const DelayedStates delayed(sys.delays.size(), x);
  State next(x.begin(), x.end());
  const State F = sys.rhs(LogIndex(n), x, delayed);
  for (std::size_t c = 0; c < next.size(); ++c) next[c] += F[c];
  return next;
}

}  // namespace

double dini_derivative_V(const LyapunovSpec& spec, const DynamicSystem& sys,
                         std::int64_t n, StateView x, StateView y) {
  if (sys.max_delay != 0) {
    throw std::invalid_argument(
        "dini_derivative_V: the product system must be undelayed");
  }
  const State xp = one_step(sys, n, x);
  const State yp = one_step(sys, n, y);
  constexpr double kMu = 1.0;
  return (spec.V(n + 1, xp, yp) - spec.V(n, x, y)) / kMu;
}

bool LyapunovReport::violates(LyapunovCondition c) const {
  return std::any_of(violations.begin(), violations.end(),
                     [c](const LyapunovViolation& v) { return v.condition == c; });
}

LyapunovReport lyapunov_verify(const LyapunovSpec& spec, const DynamicSystem& sys,
                               std::span<const LyapunovSample> samples,
                               const Tolerance& tol) {
  if (samples.empty()) {
    throw std::invalid_argument("lyapunov_verify: no sample states");
  }
  if (!(spec.lip_V > 0.0) || !(spec.decay_c > 0.0)) {
    throw std::invalid_argument("lyapunov_verify: need lip_V > 0 and c > 0");
  }
  if (!(1.0 - spec.decay_c > 0.0)) {
    throw RegressivityError(
        "lyapunov_verify: -c is not positively regressive (1 - c <= 0)",
        samples.front().n);
  }

  LyapunovReport report;
  auto flag = [&](LyapunovCondition c, std::int64_t n, std::size_t i,
                  std::size_t j, double margin) {
    report.violations.push_back({c, n, i, j, margin});
  };

  // Class-K sanity of the wedges on a radius grid.
  constexpr int kRadii = 64;
  double prev_a = spec.wedge_a(0.0);
  double prev_b = spec.wedge_b(0.0);
  if (std::abs(prev_a) > tol.abs) flag(LyapunovCondition::kClassK, 0, 0, 0, -std::abs(prev_a));
  if (std::abs(prev_b) > tol.abs) flag(LyapunovCondition::kClassK, 0, 0, 0, -std::abs(prev_b));
  for (int k = 0; k < kRadii; ++k) {
    const double r = 1e-6 * std::pow(10.0, 9.0 * k / (kRadii - 1));
    const double a = spec.wedge_a(r);
    const double b = spec.wedge_b(r);
    const auto idx = static_cast<std::size_t>(k);
    if (a > b + tol.allowance(std::abs(b))) flag(LyapunovCondition::kClassK, 0, idx, idx, b - a);
    if (a < prev_a - tol.allowance(std::abs(a))) flag(LyapunovCondition::kClassK, 0, idx, idx, a - prev_a);
    if (b < prev_b - tol.allowance(std::abs(b))) flag(LyapunovCondition::kClassK, 0, idx, idx, b - prev_b);
    prev_a = a;
    prev_b = b;
  }

  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const LyapunovSample& s = samples[i];
    const double v = spec.V(s.n, s.x, s.y);
    values[i] = v;
    const double r = max_abs_diff(s.x, s.y);
    const double a = spec.wedge_a(r);
    const double b = spec.wedge_b(r);
    if (a > v + tol.allowance(std::abs(v))) flag(LyapunovCondition::kWedge, s.n, i, i, v - a);
    if (v > b + tol.allowance(std::abs(b))) flag(LyapunovCondition::kWedge, s.n, i, i, b - v);

    const double d = dini_derivative_V(spec, sys, s.n, s.x, s.y);
    const double bound = -spec.decay_c * v;
    if (d > bound + tol.allowance(std::abs(d) + std::abs(bound))) {
      flag(LyapunovCondition::kDecay, s.n, i, i, bound - d);
    }
  }
  report.samples_checked = samples.size();

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].n < samples[b].n;
  });
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (std::size_t r = p + 1; r < order.size() && samples[order[r]].n == samples[order[p]].n;
         ++r) {
      const std::size_t i = order[p];
      const std::size_t j = order[r];
      const double lhs = std::abs(values[i] - values[j]);
      const double rhs = spec.lip_V * (max_abs_diff(samples[i].x, samples[j].x) +
                                       max_abs_diff(samples[i].y, samples[j].y));
      ++report.pairs_checked;
      if (lhs > rhs + tol.allowance(rhs)) {
        flag(LyapunovCondition::kLipschitz, samples[i].n, i, j, rhs - lhs);
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Stability probe

StabilityReport stability_probe(const DynamicSystem& sys, const LogSignal& reference,
                                std::span<const State> perturbations,
                                const StabilityOptions& options) {
  StabilityReport report;
  report.n0 = reference.n_min() + sys.max_delay;
  report.burn_in = options.burn_in;
  if (report.n0 >= reference.n_max()) {
    throw std::invalid_argument("stability_probe: reference too short");
  }
  report.reference_residual = trajectory_residual(sys, reference);
  if (report.reference_residual > options.tol_resid) {
    throw Error("stability_probe: reference is not a trajectory (residual " +
                std::to_string(report.reference_residual) + " > " +
                std::to_string(options.tol_resid) + ")");
  }
  report.floor = options.floor >= 0.0
                     ? options.floor
                     : std::max(1e-12 * (1.0 + reference.sup_norm()),
                                100.0 * report.reference_residual);

  const IndexRange start{reference.n_min(), report.n0};
  report.contracting = true;
  for (const State& delta : perturbations) {
    if (delta.size() != sys.dim) {
      throw std::invalid_argument("stability_probe: perturbation dimension");
    }
    LogSignal history = reference.restricted(start);
    for (std::int64_t n = start.lo; n <= start.hi; ++n) {
      auto x = history.mutable_at(n);
      for (std::size_t c = 0; c < x.size(); ++c) x[c] += delta[c];
    }
    const LogSignal run = solve_forward(sys, history, reference.n_max());

    ProbeRun probe;
    probe.perturbation = delta;
    for (std::int64_t n = report.n0; n <= reference.n_max(); ++n) {
      probe.distance.push_back(max_abs_diff(run.at(n), reference.at(n)));
    }

    const auto burn = static_cast<std::size_t>(std::max<std::int64_t>(options.burn_in, 0));
    const std::vector<double>& d = probe.distance;
    probe.monotone = true;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t k = burn; k < d.size(); ++k) {
      if (d[k] <= report.floor) break;
      const auto x = static_cast<double>(k);
      const double y = std::log(d[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
      if (k + 1 < d.size() && !(d[k + 1] < d[k])) probe.monotone = false;
    }
    if (count >= 2) {
      const double cnt = static_cast<double>(count);
      const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      probe.rate = std::exp(slope);
    }
    report.contracting = report.contracting && probe.monotone;
    report.runs.push_back(std::move(probe));
  }
  if (perturbations.empty()) report.contracting = false;
  return report;
}

}  // namespace qtime
