#include "qtime/core.hpp"

#include <algorithm>
#include <cmath>

namespace qtime {

std::int64_t LogIndex::value() const {
  if (is_neg_inf()) {
    throw std::logic_error("LogIndex::value() called on -inf_q");
  }
  return std::get<std::int64_t>(rep_);
}

LogIndex LogIndex::operator+(std::int64_t k) const {
  if (is_neg_inf()) return *this;
  return LogIndex(value() + k);
}

LogIndex LogIndex::operator-(std::int64_t k) const {
  if (is_neg_inf()) return *this;
  return LogIndex(value() - k);
}

std::strong_ordering operator<=>(const LogIndex& a, const LogIndex& b) {
  if (a.is_neg_inf() || b.is_neg_inf()) {
    return static_cast<int>(b.is_neg_inf()) <=> static_cast<int>(a.is_neg_inf());
  }
  return a.value() <=> b.value();
}

std::string LogIndex::str() const {
  return is_neg_inf() ? std::string("-inf_q") : std::to_string(value());
}

LogIndex offset_by(LogIndex t, LogIndex k) {
  if (k.is_neg_inf()) return t;
  return t + k.value();
}

double qpow(double q, std::int64_t n) {
  // Repeated multiplication from n = 0 outward.
  double r = 1.0;
  if (n >= 0) {
    for (std::int64_t k = 0; k < n && std::isfinite(r); ++k) r *= q;
  } else {
    for (std::int64_t k = 0; k > n && r != 0.0; --k) r /= q;
  }
  return r;
}

bool Tolerance::close(double a, double b) const {
  return std::abs(a - b) <= allowance(std::max(std::abs(a), std::abs(b)));
}

double max_abs_diff(StateView a, StateView b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("max_abs_diff: dimension mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

double max_abs(StateView a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace qtime
