#include "qtime/qlattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qtime {

namespace {

std::string window_str(const QLattice& lat) {
  return "[" + std::to_string(lat.n_min()) + ", " + std::to_string(lat.n_max()) +
         "]";
}

void require_in_window(const QLattice& lat, LogIndex n, const char* op) {
  if (!lat.contains(n)) {
    throw OutOfWindowError(std::string(op) + ": index " + n.str() +
                           " outside window " + window_str(lat));
  }
}

void require_scalar(const GridFunction& f, const char* op) {
  if (f.dim() != 1) {
    throw std::invalid_argument(std::string(op) + ": expected a scalar function");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// QLattice

QLattice::QLattice(Kind kind, double q, std::int64_t n_min, std::int64_t n_max,
                   bool includes_zero)
    : kind_(kind), q_(q), n_min_(n_min), n_max_(n_max),
      includes_zero_(includes_zero) {
  if (n_min > n_max) {
    throw std::invalid_argument("QLattice: n_min > n_max");
  }
}

QLattice QLattice::quantum(double q, std::int64_t n_min, std::int64_t n_max,
                           bool includes_zero) {
  if (!(q > 1.0) || !std::isfinite(q)) {
    throw std::invalid_argument("QLattice: q must be a finite real > 1");
  }
  return QLattice(Kind::kQuantum, q, n_min, n_max, includes_zero);
}

QLattice QLattice::integer(std::int64_t n_min, std::int64_t n_max,
                           bool includes_neg_inf) {
  return QLattice(Kind::kInteger, 1.0, n_min, n_max, includes_neg_inf);
}

bool QLattice::contains(LogIndex n) const {
  if (n.is_neg_inf()) return includes_zero_;
  return n_min_ <= n.value() && n.value() <= n_max_;
}

double QLattice::point(LogIndex n) const {
  if (n.is_neg_inf()) {
    return is_quantum() ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return is_quantum() ? qpow(q_, n.value()) : static_cast<double>(n.value());
}

double QLattice::graininess(LogIndex n) const {
  if (n.is_neg_inf()) return 0.0;
  return is_quantum() ? (q_ - 1.0) * qpow(q_, n.value()) : 1.0;
}

QLattice QLattice::with_window(std::int64_t n_min, std::int64_t n_max) const {
  return QLattice(kind_, q_, n_min, n_max, includes_zero_);
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(QLattice lattice, std::size_t dim,
                           std::vector<double> values,
                           std::optional<State> zero_value,
                           std::optional<State> zero_derivative)
    : lattice_(lattice), dim_(dim), values_(std::move(values)),
      zero_value_(std::move(zero_value)),
      zero_derivative_(std::move(zero_derivative)) {
  if (dim_ == 0) throw std::invalid_argument("GridFunction: dim must be >= 1");
  if (values_.size() != lattice_.size() * dim_) {
    throw std::invalid_argument("GridFunction: expected " +
                                std::to_string(lattice_.size() * dim_) +
                                " values, got " +
                                std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw std::invalid_argument(
          "GridFunction: non-finite value at index " +
          std::to_string(lattice_.n_min() + static_cast<std::int64_t>(k / dim_)));
    }
  }
  for (const auto* extra : {&zero_value_, &zero_derivative_}) {
    if (*extra && (*extra)->size() != dim_) {
      throw std::invalid_argument("GridFunction: zero data has wrong dimension");
    }
  }
}

GridFunction GridFunction::tabulate(
    const QLattice& lattice, std::size_t dim,
    const std::function<State(std::int64_t n, double t)>& fn) {
  std::vector<double> values;
  values.reserve(lattice.size() * dim);
  for (std::int64_t n = lattice.n_min(); n <= lattice.n_max(); ++n) {
    const State v = fn(n, lattice.point(n));
    if (v.size() != dim) {
      throw std::invalid_argument("GridFunction::tabulate: wrong dimension");
    }
    values.insert(values.end(), v.begin(), v.end());
  }
  return GridFunction(lattice, dim, std::move(values));
}

StateView GridFunction::at(std::int64_t n) const {
  if (n < lattice_.n_min() || n > lattice_.n_max()) {
    throw OutOfWindowError("GridFunction: index " + std::to_string(n) +
                           " outside window " + window_str(lattice_));
  }
  const auto offset = static_cast<std::size_t>(n - lattice_.n_min()) * dim_;
  return StateView(values_).subspan(offset, dim_);
}

StateView GridFunction::at(LogIndex n) const {
  if (!n.is_neg_inf()) return at(n.value());
  if (!zero_value_) {
    throw UndefinedAtZeroError("GridFunction: no value supplied at t = 0");
  }
  return *zero_value_;
}

// ---------------------------------------------------------------------------
// Jumps and graininess

LogIndex sigma(const QLattice& lat, LogIndex n) {
  require_in_window(lat, n, "sigma");
  if (n.is_neg_inf()) return n;
  if (n.value() == lat.n_max()) {
    throw OutOfWindowError("sigma: successor of n_max = " +
                           std::to_string(lat.n_max()) + " is outside window");
  }
  return n + 1;
}

LogIndex rho(const QLattice& lat, LogIndex n) {
  require_in_window(lat, n, "rho");
  if (n.is_neg_inf()) return n;
  if (n.value() == lat.n_min()) {
    throw OutOfWindowError("rho: predecessor of n_min = " +
                           std::to_string(lat.n_min()) + " is outside window");
  }
  return n - 1;
}

double mu(const QLattice& lat, LogIndex n) {
  require_in_window(lat, n, "mu");
  return lat.graininess(n);
}

// ---------------------------------------------------------------------------
// Derivative and integral

State q_derivative(const GridFunction& f, LogIndex n) {
  const QLattice& lat = f.lattice();
  if (n.is_neg_inf()) {
    if (!f.zero_derivative()) {
      throw UndefinedAtZeroError(
          "q_derivative: derivative at t = 0 is a limit and was not supplied");
    }
    return *f.zero_derivative();
  }
  require_in_window(lat, n, "q_derivative");
  if (n.value() == lat.n_max()) {
    throw NeedsSuccessorError("q_derivative: index " + n.str() +
                              " needs a sample at " + (n + 1).str());
  }
  const double m = lat.graininess(n);
  const StateView here = f.at(n.value());
  const StateView next = f.at(n.value() + 1);
  State d(f.dim());
  for (std::size_t c = 0; c < d.size(); ++c) d[c] = (next[c] - here[c]) / m;
  return d;
}

GridFunction q_derivative(const GridFunction& f) {
  const QLattice& lat = f.lattice();
  if (lat.n_min() == lat.n_max()) {
    throw NeedsSuccessorError("q_derivative: window has a single index");
  }
  const QLattice out = lat.with_window(lat.n_min(), lat.n_max() - 1);
  std::vector<double> values;
  values.reserve(out.size() * f.dim());
  for (std::int64_t n = out.n_min(); n <= out.n_max(); ++n) {
    const State d = q_derivative(f, LogIndex(n));
    values.insert(values.end(), d.begin(), d.end());
  }
  return GridFunction(out, f.dim(), std::move(values), std::nullopt,
                      f.zero_derivative());
}

IntegralResult q_integral(const GridFunction& f, LogIndex a, LogIndex b) {
  const QLattice& lat = f.lattice();
  if (b < a) throw std::invalid_argument("q_integral: reversed bounds");
  if (a.is_neg_inf() && !lat.includes_zero()) {
    throw OutOfWindowError(
        "q_integral: lower limit 0 requires a lattice that includes zero");
  }
  IntegralResult result{State(f.dim(), 0.0), std::nullopt};
  if (b.is_neg_inf()) return result;  // both limits at zero

  const std::int64_t first = a.is_neg_inf() ? lat.n_min() : a.value();
  const std::int64_t end = b.value();
  if (first < lat.n_min() || end > lat.n_max() + 1) {
    throw OutOfWindowError("q_integral: limits [" + a.str() + ", " + b.str() +
                           ") exceed window " + window_str(lat));
  }
  for (std::int64_t n = first; n < end; ++n) {
    const double m = lat.graininess(n);
    const StateView v = f.at(n);
    for (std::size_t c = 0; c < v.size(); ++c) result.value[c] += m * v[c];
  }
  if (a.is_neg_inf()) {
    double sup = max_abs(f.data());
    if (f.zero_value()) sup = std::max(sup, max_abs(*f.zero_value()));
    // sum_{n < n_min} mu(q^n) = point(n_min) on q^Z.
    result.tail_bound = lat.point(lat.n_min()) * sup;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Exponential

double ts_exponential(const GridFunction& p, LogIndex n, LogIndex s,
                      Regressivity cls) {
  require_scalar(p, "ts_exponential");
  if (n.is_neg_inf() || s.is_neg_inf()) {
    throw std::invalid_argument(
        "ts_exponential: limits at -inf_q are refused; use a finite index and "
        "a tail bound");
  }
  const QLattice& lat = p.lattice();
  for (std::int64_t u = lat.n_min(); u <= lat.n_max(); ++u) {
    const double factor = 1.0 + lat.graininess(u) * p.value(u);
    const bool ok = cls == Regressivity::kPositive ? factor > 0.0 : factor != 0.0;
    if (!ok) {
      throw RegressivityError(
          std::string("ts_exponential: p is not ") +
              (cls == Regressivity::kPositive ? "positively " : "") +
              "regressive at index " + std::to_string(u),
          u);
    }
  }
  const std::int64_t lo = std::min(n.value(), s.value());
  const std::int64_t hi = std::max(n.value(), s.value());
  if (lo < lat.n_min() || hi - 1 > lat.n_max()) {
    throw OutOfWindowError("ts_exponential: product range [" +
                           std::to_string(lo) + ", " + std::to_string(hi) +
                           ") exceeds window " + window_str(lat));
  }
  // Extended-precision accumulation keeps the semigroup law within a few ulp.
  long double prod = 1.0L;
  for (std::int64_t u = lo; u < hi; ++u) {
    prod *= static_cast<long double>(1.0 + lat.graininess(u) * p.value(u));
  }
  if (n.value() >= s.value()) return static_cast<double>(prod);
  return static_cast<double>(1.0L / prod);
}

// ---------------------------------------------------------------------------
// Gronwall

GronwallReport gronwall_verify(const GridFunction& y, const GridFunction& p,
                               const GridFunction& f, const Tolerance& tol) {
  require_scalar(y, "gronwall_verify");
  require_scalar(p, "gronwall_verify");
  require_scalar(f, "gronwall_verify");
  const QLattice& lat = y.lattice();
  if (!(p.lattice() == lat) || !(f.lattice() == lat)) {
    throw std::invalid_argument("gronwall_verify: y, p, f must share a lattice");
  }
  for (std::int64_t u = lat.n_min(); u <= lat.n_max(); ++u) {
    if (!(1.0 + lat.graininess(u) * p.value(u) > 0.0)) {
      throw RegressivityError(
          "gronwall_verify: p is not positively regressive at index " +
              std::to_string(u),
          u);
    }
  }

  GronwallReport report;
  report.window = lat.window();
  report.margins.assign(lat.size(), std::nullopt);

  std::vector<bool> violated(lat.size(), false);
  for (std::int64_t n = lat.n_min(); n < lat.n_max(); ++n) {
    const double dy = q_derivative(y, LogIndex(n))[0];
    const double rhs = p.value(n) * y.value(n) + f.value(n);
    const double scale = std::abs(dy) + std::abs(p.value(n) * y.value(n)) +
                         std::abs(f.value(n));
    if (dy > rhs + tol.allowance(scale)) {
      report.hypothesis_violations.push_back(n);
      violated[static_cast<std::size_t>(n - lat.n_min())] = true;
    }
  }

  // bound(n+1) = (1 + mu p(n)) bound(n) + mu f(n) is the closed-form
  // right-hand side unrolled one step at a time.
  double bound = y.value(lat.n_min());
  bool conclusion_ok = true;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (std::int64_t n = lat.n_min();; ++n) {
    const auto k = static_cast<std::size_t>(n - lat.n_min());
    if (!violated[k]) {
      const double margin = bound - y.value(n);
      report.margins[k] = margin;
      report.min_margin = std::min(report.min_margin, margin);
      if (margin < -tol.allowance(std::abs(bound) + std::abs(y.value(n)))) {
        conclusion_ok = false;
      }
    }
    if (n == lat.n_max()) break;
    const double m = lat.graininess(n);
    bound = (1.0 + m * p.value(n)) * bound + m * f.value(n);
  }

  if (!report.hypothesis_violations.empty()) {
    report.verdict = GronwallReport::Verdict::kHypothesisViolated;
  } else if (!conclusion_ok) {
    report.verdict = GronwallReport::Verdict::kFail;
  }
  return report;
}

}  // namespace qtime
