#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qtime/core.hpp"
#include "qtime/qlattice.hpp"

namespace qtime {

/// A vector signal on a window of Z u {-inf_q}: the log-index image
/// n -> f(q^n) of a function on the quantum scale. The optional -inf_q
/// sample houses f(0).
class LogSignal {
 public:
  LogSignal(std::int64_t n_min, std::int64_t n_max, std::size_t dim);
  LogSignal(std::int64_t n_min, std::int64_t n_max, std::size_t dim,
            std::vector<double> values,
            std::optional<State> ninf_value = std::nullopt);

  static LogSignal tabulate(IndexRange range, std::size_t dim,
                            const std::function<State(std::int64_t)>& fn);
  static LogSignal constant(IndexRange range, const State& value);

  std::int64_t n_min() const { return n_min_; }
  std::int64_t n_max() const { return n_max_; }
  IndexRange range() const { return {n_min_, n_max_}; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return range().size(); }
  bool covers(IndexRange r) const { return range().contains(r); }

  StateView at(std::int64_t n) const;
  StateView at(LogIndex n) const;
  std::span<double> mutable_at(std::int64_t n);
  double value(std::int64_t n, std::size_t component = 0) const {
    return data_[offset(n) + component];
  }
  std::span<const double> data() const { return data_; }
  const std::optional<State>& ninf_value() const { return ninf_value_; }

  LogSignal restricted(IndexRange r) const;
  /// max over the window of max_i |x_i(n)|; the -inf_q sample is excluded.
  double sup_norm() const { return max_abs(data_); }
  double sup_norm(IndexRange r) const;

  friend bool operator==(const LogSignal&, const LogSignal&) = default;

 private:
  std::size_t offset(std::int64_t n) const;

  std::int64_t n_min_;
  std::int64_t n_max_;
  std::size_t dim_;
  std::vector<double> data_;
  std::optional<State> ninf_value_;
};

/// sup over n in r of max_i |a_i(n) - b_i(n)|.
double sup_distance(const LogSignal& a, const LogSignal& b, IndexRange r);

LogSignal lift(const GridFunction& f);
GridFunction lower(const LogSignal& s, double q);

// Right-hand sides. Delayed states are passed in the order of the system's
// delay list.
using DelayedStates = std::vector<StateView>;

/// rhs on Z u {-inf_q}: (n, x(n), delayed) -> Delta x(n).
using LogRhs =
    std::function<State(LogIndex n, StateView x, const DelayedStates& delayed)>;

struct QPoint {
  LogIndex n;
  double t;  // q^n, or 0 at -inf_q
};
/// rhs on the quantum scale: (t, x(t), delayed) -> D_q x(t).
using QuantumRhs =
    std::function<State(const QPoint& at, StateView x, const DelayedStates& delayed)>;

inline constexpr std::int64_t kMaxTransformIndex = 1024;

/// Throws OverflowGuardError when the window reaches |n| > 1024.
void check_transform_window(IndexRange window);

/// F(n, x, d) = (q-1) q^n f(q^n, x, d); F(-inf_q, ...) = 0. Failures inside f
/// resurface as RhsEvaluationError carrying the index.
LogRhs transform_rhs(QuantumRhs f, double q, std::size_t dim);

}  // namespace qtime
