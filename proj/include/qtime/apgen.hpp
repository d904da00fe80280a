#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "qtime/core.hpp"
#include "qtime/logmap.hpp"

namespace qtime {

struct Term {
  double amp = 0.0;
  double freq = 0.0;
  double phase = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Component {
  double offset = 0.0;
  std::vector<Term> terms;
  friend bool operator==(const Component&, const Component&) = default;
};

/// Closed-form quasi-periodic signal on the log index,
///   x_c(n) = gain * (offset_c + sum_k amp_k cos(freq_k (n + shift) + phase_k)).
/// Translations accumulate in the integer shift, so T_a T_b = T_{a+b} holds
/// bit for bit; weighted translations multiply the gain.
class ApGenerator {
 public:
  explicit ApGenerator(std::vector<Component> components,
                       std::optional<State> zero_limit = std::nullopt);

  static ApGenerator constant(const State& value);
  static ApGenerator scalar(double offset, std::vector<Term> terms = {});

  std::size_t dim() const { return components_.size(); }
  const std::vector<Component>& components() const { return components_; }
  std::int64_t shift() const { return shift_; }
  double gain() const { return gain_; }
  const std::optional<State>& zero_limit() const { return zero_limit_; }
  bool is_constant() const;

  double eval(std::int64_t n, std::size_t component) const;
  State operator()(std::int64_t n) const;
  /// At -inf_q: the declared zero limit, else the constant value for
  /// constant generators; otherwise UndefinedAtZeroError.
  State operator()(LogIndex n) const;

  /// |gain| (|offset| + sum |amp|).
  double sup_bound(std::size_t component) const;
  /// gain * offset - |gain| sum |amp|.
  double inf_bound(std::size_t component) const;

  ApGenerator translated(std::int64_t alpha) const;
  ApGenerator weighted(std::int64_t alpha, double q) const;
  ApGenerator with_gain(double gain) const;
  ApGenerator with_shift(std::int64_t shift) const;

  LogSignal sample(IndexRange range) const;

  friend bool operator==(const ApGenerator&, const ApGenerator&) = default;

 private:
  std::vector<Component> components_;
  std::int64_t shift_ = 0;
  double gain_ = 1.0;
  std::optional<State> zero_limit_;
};

// n -> f(n + alpha). A LogSignal result is restricted to the overlap of the
// shifted and stored windows.
ApGenerator translate(const ApGenerator& f, std::int64_t alpha);
LogSignal translate(const LogSignal& f, std::int64_t alpha);

// n -> q^alpha f(n + alpha), the log-index form of q^tau f(t q^tau).
ApGenerator weighted_translate(const ApGenerator& f, std::int64_t alpha,
                               double q);
LogSignal weighted_translate(const LogSignal& f, std::int64_t alpha, double q);

enum class ApMode { kUnweighted, kWeighted };
std::string_view to_string(ApMode mode);

struct TranslationQuery {
  double epsilon = 0.1;
  ApMode mode = ApMode::kUnweighted;
  IndexRange tau_range{-200, 200};
  IndexRange window{-500, 500};
  double q = 2.0;  // weighted mode only
};

struct TranslationReport {
  double epsilon = 0.0;
  ApMode mode = ApMode::kUnweighted;
  IndexRange tau_range;
  IndexRange window;
  /// sup_n |difference| for every tau in tau_range, in order.
  std::vector<double> sup_diff;
  /// Sorted {tau : sup_diff(tau) < epsilon}.
  std::vector<std::int64_t> members;
  /// Largest gap between consecutive members; empty means infinite.
  std::optional<std::int64_t> inclusion_length;

  bool is_member(std::int64_t tau) const;
  double sup_diff_at(std::int64_t tau) const;
};

/// The epsilon-translation set over tau_range with the sup taken over window
/// (the -inf_q sample never participates). LogSignal inputs must cover
/// window + tau_range, else InsufficientSamplesError lists the gap.
TranslationReport translation_set(const LogSignal& f, const TranslationQuery& query);
TranslationReport translation_set(const ApGenerator& f, const TranslationQuery& query);

/// Every length-l subinterval of tau_range holds a member, l being the
/// inclusion length (which must be finite).
bool relatively_dense(const TranslationReport& report);

struct ClassifyOptions {
  std::vector<double> epsilons{0.5, 0.2, 0.1, 0.05};
  ApMode mode = ApMode::kUnweighted;
  IndexRange tau_range{-200, 200};
  IndexRange window{-500, 500};
  double q = 2.0;
};

struct EpsilonVerdict {
  TranslationReport report;
  bool relatively_dense = false;
};

struct ApClassification {
  static constexpr std::string_view kNote =
      "finite-window evidence, not a proof of almost periodicity";
  std::vector<EpsilonVerdict> per_epsilon;
  bool ap_evidence = false;
};

/// base with tau_range and window shrunk so that a signal sampled on
/// `available` covers every comparison: |tau| is capped at a quarter of the
/// samples and the window takes everything the shifts leave.
ClassifyOptions fitted_options(IndexRange available, const ClassifyOptions& base = {});

ApClassification ap_classify(const LogSignal& f, const ClassifyOptions& options);
ApClassification ap_classify(const ApGenerator& f, const ClassifyOptions& options);

struct SplitReport {
  IndexRange window;
  /// sup |phi - p| over the three consecutive thirds of the window.
  std::array<double, 3> third_sups{};
  double decay_tol = 0.0;
  bool pass = false;
};

/// Residual check for phi = p + r with r -> 0: passes iff the thirds' sups
/// are non-increasing and the last is below decay_tol. Needs >= 9 samples.
SplitReport asymptotic_split_check(const LogSignal& phi, const ApGenerator& p,
                                   double decay_tol);

}  // namespace qtime
