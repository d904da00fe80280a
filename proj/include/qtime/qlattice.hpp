#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qtime/core.hpp"

namespace qtime {

/// A finite window of a time scale: either the quantum scale q^Z u {0}
/// (point n <-> t = q^n) or the integer scale Z u {-inf_q} that the log
/// transform maps it onto. All sup/inf computations in the library range over
/// the window [n_min, n_max].
class QLattice {
 public:
  enum class Kind { kQuantum, kInteger };

  /// Throws std::invalid_argument unless q > 1 and n_min <= n_max.
  static QLattice quantum(double q, std::int64_t n_min, std::int64_t n_max,
                          bool includes_zero = false);
  static QLattice integer(std::int64_t n_min, std::int64_t n_max,
                          bool includes_neg_inf = false);

  Kind kind() const { return kind_; }
  bool is_quantum() const { return kind_ == Kind::kQuantum; }
  /// Base of the quantum scale; 1 for the integer scale.
  double q() const { return q_; }
  std::int64_t n_min() const { return n_min_; }
  std::int64_t n_max() const { return n_max_; }
  IndexRange window() const { return {n_min_, n_max_}; }
  std::size_t size() const { return window().size(); }
  /// Whether the distinguished point (0, resp. -inf_q) belongs to the window.
  bool includes_zero() const { return includes_zero_; }

  bool contains(LogIndex n) const;
  /// q^n (quantum) or n (integer); 0 at -inf_q on the quantum scale.
  double point(LogIndex n) const;
  /// mu(q^n) = (q-1) q^n, or 1 on the integer scale; 0 at -inf_q.
  double graininess(LogIndex n) const;

  QLattice with_window(std::int64_t n_min, std::int64_t n_max) const;

  friend bool operator==(const QLattice&, const QLattice&) = default;

 private:
  QLattice(Kind kind, double q, std::int64_t n_min, std::int64_t n_max,
           bool includes_zero);

  Kind kind_;
  double q_;
  std::int64_t n_min_;
  std::int64_t n_max_;
  bool includes_zero_;
};

/// Vector-valued samples on every index of a lattice window, plus optional
/// user-supplied data at t = 0 (never extrapolated).
class GridFunction {
 public:
  GridFunction(QLattice lattice, std::size_t dim, std::vector<double> values,
               std::optional<State> zero_value = std::nullopt,
               std::optional<State> zero_derivative = std::nullopt);

  /// Samples fn(n, t) at every window index.
  static GridFunction tabulate(
      const QLattice& lattice, std::size_t dim,
      const std::function<State(std::int64_t n, double t)>& fn);

  const QLattice& lattice() const { return lattice_; }
  std::size_t dim() const { return dim_; }
  StateView at(std::int64_t n) const;
  /// At -inf_q this is the supplied zero value.
  StateView at(LogIndex n) const;
  double value(std::int64_t n, std::size_t component = 0) const {
    return at(n)[component];
  }
  std::span<const double> data() const { return values_; }
  const std::optional<State>& zero_value() const { return zero_value_; }
  const std::optional<State>& zero_derivative() const {
    return zero_derivative_;
  }

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  QLattice lattice_;
  std::size_t dim_;
  std::vector<double> values_;
  std::optional<State> zero_value_;
  std::optional<State> zero_derivative_;
};

// Forward jump. sigma(-inf_q) = -inf_q since 0 is right-dense.
LogIndex sigma(const QLattice& lat, LogIndex n);
// Backward jump; rho(-inf_q) = -inf_q.
LogIndex rho(const QLattice& lat, LogIndex n);
double mu(const QLattice& lat, LogIndex n);

/// (f(sigma(t)) - f(t)) / mu(t). At -inf_q returns the supplied derivative at
/// zero or throws UndefinedAtZeroError; at n_max throws NeedsSuccessorError.
State q_derivative(const GridFunction& f, LogIndex n);
/// The derivative on the whole window minus its last index.
GridFunction q_derivative(const GridFunction& f);

struct IntegralResult {
  State value;
  /// Present when the lower limit is 0: bound on the omitted part
  /// int_0^{q^n_min}, estimated as q^n_min * max(sup_window |f|, |f(0)|).
  std::optional<double> tail_bound;
};

/// Delta integral over [point(a), point(b)): sum_{n=a}^{b-1} mu(n) f(n).
/// Requires a <= b, a in the window (or -inf_q with includes_zero), and
/// b <= n_max + 1 so that every summed index is sampled.
IntegralResult q_integral(const GridFunction& f, LogIndex a, LogIndex b);

enum class Regressivity { kRegressive, kPositive };

/// Time-scale exponential e_p(n, s) of a scalar p. Lower limit -inf_q is
/// refused. Throws RegressivityError naming the first offending index.
double ts_exponential(const GridFunction& p, LogIndex n, LogIndex s,
                      Regressivity cls = Regressivity::kRegressive);

struct GronwallReport {
  enum class Verdict { kPass, kFail, kHypothesisViolated };

  IndexRange window;
  /// Indices n where D y(n) > p(n) y(n) + f(n) beyond tolerance.
  std::vector<std::int64_t> hypothesis_violations;
  /// bound(n) - y(n) per window index; empty where the check was skipped.
  std::vector<std::optional<double>> margins;
  double min_margin = 0.0;
  Verdict verdict = Verdict::kPass;

  bool pass() const { return verdict == Verdict::kPass; }
};

/// Checks y(n) <= y(n0) e_p(n, n0) + sum_{tau<n} e_p(n, sigma(tau)) mu f(tau)
/// with n0 = n_min, after confirming the differential inequality. y, p, f
/// must be scalar and share one lattice; p must be positively regressive.
GronwallReport gronwall_verify(const GridFunction& y, const GridFunction& p,
                               const GridFunction& f,
                               const Tolerance& tol = {});

}  // namespace qtime
