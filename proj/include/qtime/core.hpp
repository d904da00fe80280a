#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qtime {

using State = std::vector<double>;
using StateView = std::span<const double>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfWindowError : public Error {
 public:
  using Error::Error;
};

// The operation needs the successor sample, which lies past the window.
class NeedsSuccessorError : public OutOfWindowError {
 public:
  using OutOfWindowError::OutOfWindowError;
};

// A value (or limit) at t = 0 was required but not supplied.
class UndefinedAtZeroError : public Error {
 public:
  using Error::Error;
};

class RegressivityError : public Error {
 public:
  RegressivityError(const std::string& what, std::int64_t index)
      : Error(what), index_(index) {}
  std::int64_t index() const { return index_; }

 private:
  std::int64_t index_;
};

class InsufficientSamplesError : public Error {
 public:
  InsufficientSamplesError(const std::string& what, std::int64_t missing_lo,
                           std::int64_t missing_hi)
      : Error(what), missing_lo_(missing_lo), missing_hi_(missing_hi) {}
  std::int64_t missing_lo() const { return missing_lo_; }
  std::int64_t missing_hi() const { return missing_hi_; }

 private:
  std::int64_t missing_lo_;
  std::int64_t missing_hi_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t first_bad_index)
      : Error(what), first_bad_index_(first_bad_index) {}
  std::int64_t first_bad_index() const { return first_bad_index_; }

 private:
  std::int64_t first_bad_index_;
};

class OverflowGuardError : public Error {
 public:
  using Error::Error;
};

class RhsEvaluationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Log index of the quantum scale: an integer n (the point q^n) or the formal
// symbol -inf_q standing for the point 0.

struct NegInfQ {
  friend constexpr bool operator==(NegInfQ, NegInfQ) { return true; }
};
inline constexpr NegInfQ neg_inf_q{};

class LogIndex {
 public:
  constexpr LogIndex(std::int64_t n) : rep_(n) {}  // NOLINT(implicit)
  constexpr LogIndex(int n) : rep_(std::int64_t{n}) {}  // NOLINT(implicit)
  constexpr LogIndex(NegInfQ) : rep_(NegInfQ{}) {}  // NOLINT(implicit)

  constexpr bool is_neg_inf() const {
    return std::holds_alternative<NegInfQ>(rep_);
  }
  std::int64_t value() const;

  // -inf_q absorbs integer offsets.
  LogIndex operator+(std::int64_t k) const;
  LogIndex operator-(std::int64_t k) const;

  friend bool operator==(const LogIndex& a, const LogIndex& b) = default;
  friend std::strong_ordering operator<=>(const LogIndex& a,
                                          const LogIndex& b);

  std::string str() const;

 private:
  std::variant<NegInfQ, std::int64_t> rep_;
};

// t + (-inf_q) = t; -inf_q + k = -inf_q.
LogIndex offset_by(LogIndex t, LogIndex k);

// Closed integer interval [lo, hi].
struct IndexRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;

  bool empty() const { return hi < lo; }
  std::size_t size() const {
    return empty() ? 0 : static_cast<std::size_t>(hi - lo + 1);
  }
  bool contains(std::int64_t n) const { return lo <= n && n <= hi; }
  bool contains(const IndexRange& r) const {
    return r.empty() || (lo <= r.lo && r.hi <= hi);
  }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// q^n. All modules go through this so that the two representations of a
// scale see bit-identical points.
double qpow(double q, std::int64_t n);

// Absolute-plus-relative comparison; default is the library-wide tol_num.
struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-9;

  double allowance(double scale) const { return abs + rel * scale; }
  bool close(double a, double b) const;
};

double max_abs_diff(StateView a, StateView b);
double max_abs(StateView a);

}  // namespace qtime
