#include "qtime/logmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qtime {

LogSignal::LogSignal(std::int64_t n_min, std::int64_t n_max, std::size_t dim)
    : LogSignal(n_min, n_max, dim,
                std::vector<double>(IndexRange{n_min, n_max}.size() * dim, 0.0)) {}

LogSignal::LogSignal(std::int64_t n_min, std::int64_t n_max, std::size_t dim,
                     std::vector<double> values, std::optional<State> ninf_value)
    : n_min_(n_min), n_max_(n_max), dim_(dim), data_(std::move(values)),
      ninf_value_(std::move(ninf_value)) {
  if (n_min > n_max) throw std::invalid_argument("LogSignal: n_min > n_max");
  if (dim == 0) throw std::invalid_argument("LogSignal: dim must be >= 1");
  if (data_.size() != range().size() * dim) {
    throw std::invalid_argument("LogSignal: expected " +
                                std::to_string(range().size() * dim) +
                                " values, got " + std::to_string(data_.size()));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw std::invalid_argument(
          "LogSignal: non-finite value at index " +
          std::to_string(n_min + static_cast<std::int64_t>(k / dim)));
    }
  }
  if (ninf_value_ && ninf_value_->size() != dim) {
    throw std::invalid_argument("LogSignal: -inf_q value has wrong dimension");
  }
}

LogSignal LogSignal::tabulate(IndexRange range, std::size_t dim,
                              const std::function<State(std::int64_t)>& fn) {
  std::vector<double> values;
  values.reserve(range.size() * dim);
  for (std::int64_t n = range.lo; n <= range.hi; ++n) {
    const State v = fn(n);
    if (v.size() != dim) {
      throw std::invalid_argument("LogSignal::tabulate: wrong dimension at " +
                                  std::to_string(n));
    }
    values.insert(values.end(), v.begin(), v.end());
  }
  return LogSignal(range.lo, range.hi, dim, std::move(values));
}

LogSignal LogSignal::constant(IndexRange range, const State& value) {
  return tabulate(range, value.size(), [&](std::int64_t) { return value; });
}

std::size_t LogSignal::offset(std::int64_t n) const {
  if (n < n_min_ || n > n_max_) {
    throw OutOfWindowError("LogSignal: index " + std::to_string(n) +
                           " outside [" + std::to_string(n_min_) + ", " +
                           std::to_string(n_max_) + "]");
  }
  return static_cast<std::size_t>(n - n_min_) * dim_;
}

StateView LogSignal::at(std::int64_t n) const {
  return StateView(data_).subspan(offset(n), dim_);
}

StateView LogSignal::at(LogIndex n) const {
  if (!n.is_neg_inf()) return at(n.value());
  if (!ninf_value_) {
    throw UndefinedAtZeroError("LogSignal: no value stored at -inf_q");
  }
  return *ninf_value_;
}

std::span<double> LogSignal::mutable_at(std::int64_t n) {
  return std::span<double>(data_).subspan(offset(n), dim_);
}

LogSignal LogSignal::restricted(IndexRange r) const {
  if (r.empty() || !covers(r)) {
    throw InsufficientSamplesError(
        "LogSignal::restricted: [" + std::to_string(r.lo) + ", " +
            std::to_string(r.hi) + "] not covered",
        r.lo, r.hi);
  }
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(offset(r.lo));
  const auto last = first + static_cast<std::ptrdiff_t>(r.size() * dim_);
  return LogSignal(r.lo, r.hi, dim_, std::vector<double>(first, last),
                   ninf_value_);
}

double LogSignal::sup_norm(IndexRange r) const {
  if (r.empty()) return 0.0;
  return max_abs(std::span<const double>(data_).subspan(offset(r.lo),
                                                         r.size() * dim_));
}

double sup_distance(const LogSignal& a, const LogSignal& b, IndexRange r) {
  double d = 0.0;
  for (std::int64_t n = r.lo; n <= r.hi; ++n) {
    d = std::max(d, max_abs_diff(a.at(n), b.at(n)));
  }
  return d;
}

LogSignal lift(const GridFunction& f) {
  const QLattice& lat = f.lattice();
  return LogSignal(lat.n_min(), lat.n_max(), f.dim(),
                   std::vector<double>(f.data().begin(), f.data().end()),
                   f.zero_value());
}

GridFunction lower(const LogSignal& s, double q) {
  const QLattice lat =
      QLattice::quantum(q, s.n_min(), s.n_max(), s.ninf_value().has_value());
  return GridFunction(lat, s.dim(),
                      std::vector<double>(s.data().begin(), s.data().end()),
                      s.ninf_value());
}

void check_transform_window(IndexRange window) {
  if (std::max(std::abs(window.lo), std::abs(window.hi)) > kMaxTransformIndex) {
    throw OverflowGuardError("window [" + std::to_string(window.lo) + ", " +
                             std::to_string(window.hi) +
                             "] exceeds the |n| <= " +
                             std::to_string(kMaxTransformIndex) + " guard");
  }
}

LogRhs transform_rhs(QuantumRhs f, double q, std::size_t dim) {
  if (!(q > 1.0)) throw std::invalid_argument("transform_rhs: q must be > 1");
  return [f = std::move(f), q, dim](LogIndex n, StateView x,
                                    const DelayedStates& delayed) -> State {
    if (n.is_neg_inf()) return State(dim, 0.0);
    check_transform_window({n.value(), n.value()});
    const double t = qpow(q, n.value());
    State out;
    try {
      out = f(QPoint{n, t}, x, delayed);
    } catch (const std::exception& e) {
      throw RhsEvaluationError("rhs failed at index " + n.str() + ": " +
                               e.what());
    }
    if (out.size() != dim) {
      throw RhsEvaluationError("rhs returned wrong dimension at index " +
                               n.str());
    }
    const double scale = (q - 1.0) * t;
    for (double& v : out) v *= scale;
    return out;
  };
}

}  // namespace qtime
