#include "qtime/apgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qtime {

// ---------------------------------------------------------------------------
// ApGenerator

ApGenerator::ApGenerator(std::vector<Component> components,
                         std::optional<State> zero_limit)
    : components_(std::move(components)), zero_limit_(std::move(zero_limit)) {
  if (components_.empty()) {
    throw std::invalid_argument("ApGenerator: needs at least one component");
  }
  for (const Component& c : components_) {
    if (!std::isfinite(c.offset)) {
      throw std::invalid_argument("ApGenerator: non-finite offset");
    }
    for (const Term& t : c.terms) {
      if (!std::isfinite(t.amp) || !std::isfinite(t.freq) ||
          !std::isfinite(t.phase)) {
        throw std::invalid_argument("ApGenerator: non-finite term");
      }
    }
  }
  if (zero_limit_ && zero_limit_->size() != components_.size()) {
    throw std::invalid_argument("ApGenerator: zero limit has wrong dimension");
  }
}

ApGenerator ApGenerator::constant(const State& value) {
  std::vector<Component> comps;
  comps.reserve(value.size());
  for (double v : value) comps.push_back(Component{v, {}});
  return ApGenerator(std::move(comps));
}

ApGenerator ApGenerator::scalar(double offset, std::vector<Term> terms) {
  return ApGenerator({Component{offset, std::move(terms)}});
}

bool ApGenerator::is_constant() const {
  return std::all_of(components_.begin(), components_.end(), [](const Component& c) {
    return std::all_of(c.terms.begin(), c.terms.end(), [](const Term& t) {
      return t.freq == 0.0 || t.amp == 0.0;
    });
  });
}

double ApGenerator::eval(std::int64_t n, std::size_t component) const {
  const Component& c = components_.at(component);
  const double x = static_cast<double>(n + shift_);
  double v = c.offset;
  for (const Term& t : c.terms) v += t.amp * std::cos(t.freq * x + t.phase);
  return gain_ * v;
}

State ApGenerator::operator()(std::int64_t n) const {
  State out(dim());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = eval(n, c);
  return out;
}

State ApGenerator::operator()(LogIndex n) const {
  if (!n.is_neg_inf()) return (*this)(n.value());
  if (zero_limit_) return *zero_limit_;
  if (is_constant()) return (*this)(std::int64_t{0});
  throw UndefinedAtZeroError(
      "ApGenerator: no zero limit declared for a non-constant generator");
}

double ApGenerator::sup_bound(std::size_t component) const {
  const Component& c = components_.at(component);
  double s = std::abs(c.offset);
  for (const Term& t : c.terms) s += std::abs(t.amp);
  return std::abs(gain_) * s;
}

double ApGenerator::inf_bound(std::size_t component) const {
  const Component& c = components_.at(component);
  double spread = 0.0;
  for (const Term& t : c.terms) spread += std::abs(t.amp);
  return gain_ * c.offset - std::abs(gain_) * spread;
}

ApGenerator ApGenerator::translated(std::int64_t alpha) const {
  ApGenerator g = *this;
  g.shift_ += alpha;
  return g;
}

ApGenerator ApGenerator::weighted(std::int64_t alpha, double q) const {
  ApGenerator g = translated(alpha);
  g.gain_ *= qpow(q, alpha);
  g.zero_limit_.reset();  // the weighted class lives on q^Z \ {0}
  return g;
}

ApGenerator ApGenerator::with_gain(double gain) const {
  ApGenerator g = *this;
  g.gain_ = gain;
  return g;
}

ApGenerator ApGenerator::with_shift(std::int64_t shift) const {
  ApGenerator g = *this;
  g.shift_ = shift;
  return g;
}

LogSignal ApGenerator::sample(IndexRange range) const {
  std::vector<double> values;
  values.reserve(range.size() * dim());
  for (std::int64_t n = range.lo; n <= range.hi; ++n) {
    for (std::size_t c = 0; c < dim(); ++c) values.push_back(eval(n, c));
  }
  return LogSignal(range.lo, range.hi, dim(), std::move(values), zero_limit_);
}

// ---------------------------------------------------------------------------
// Translations

ApGenerator translate(const ApGenerator& f, std::int64_t alpha) {
  return f.translated(alpha);
}

ApGenerator weighted_translate(const ApGenerator& f, std::int64_t alpha, double q) {
  return f.weighted(alpha, q);
}

namespace {

LogSignal shifted_signal(const LogSignal& f, std::int64_t alpha, double weight,
                         bool keep_ninf) {
  const IndexRange overlap{std::max(f.n_min(), f.n_min() - alpha),
                           std::min(f.n_max(), f.n_max() - alpha)};
  if (overlap.empty()) {
    throw OutOfWindowError("translate: shift " + std::to_string(alpha) +
                           " leaves no overlap with the stored window");
  }
  std::vector<double> values;
  values.reserve(overlap.size() * f.dim());
  for (std::int64_t n = overlap.lo; n <= overlap.hi; ++n) {
    for (double v : f.at(n + alpha)) values.push_back(weight * v);
  }
  std::optional<State> ninf;
  if (keep_ninf) ninf = f.ninf_value();
  return LogSignal(overlap.lo, overlap.hi, f.dim(), std::move(values), ninf);
}

}  // namespace

LogSignal translate(const LogSignal& f, std::int64_t alpha) {
  return shifted_signal(f, alpha, 1.0, true);
}

LogSignal weighted_translate(const LogSignal& f, std::int64_t alpha, double q) {
  return shifted_signal(f, alpha, qpow(q, alpha), false);
}

std::string_view to_string(ApMode mode) {
  return mode == ApMode::kWeighted ? "weighted" : "unweighted";
}

// ---------------------------------------------------------------------------
// Translation sets

namespace {

void validate(const TranslationQuery& query) {
  if (!(query.epsilon > 0.0)) {
    throw std::invalid_argument("translation_set: epsilon must be > 0");
  }
  if (query.tau_range.empty() || query.window.empty()) {
    throw std::invalid_argument("translation_set: empty tau range or window");
  }
  if (query.mode == ApMode::kWeighted && !(query.q > 1.0)) {
    throw std::invalid_argument("translation_set: weighted mode needs q > 1");
  }
}

IndexRange required_samples(const TranslationQuery& query) {
  return {query.window.lo + std::min<std::int64_t>(query.tau_range.lo, 0),
          query.window.hi + std::max<std::int64_t>(query.tau_range.hi, 0)};
}

TranslationReport scan(const LogSignal& f, const TranslationQuery& query) {
  TranslationReport report;
  report.epsilon = query.epsilon;
  report.mode = query.mode;
  report.tau_range = query.tau_range;
  report.window = query.window;
  report.sup_diff.reserve(query.tau_range.size());

  const std::size_t dim = f.dim();
  const std::size_t width = query.window.size() * dim;
  const std::span<const double> data = f.data();
  const auto base = static_cast<std::size_t>(query.window.lo - f.n_min()) * dim;
  const std::span<const double> ref = data.subspan(base, width);

  for (std::int64_t tau = query.tau_range.lo; tau <= query.tau_range.hi; ++tau) {
    const double w =
        query.mode == ApMode::kWeighted ? qpow(query.q, tau) : 1.0;
    const auto start = static_cast<std::size_t>(
        static_cast<std::int64_t>(base) + tau * static_cast<std::int64_t>(dim));
    const std::span<const double> moved = data.subspan(start, width);
    double sup = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      sup = std::max(sup, std::abs(w * moved[k] - ref[k]));
    }
    report.sup_diff.push_back(sup);
    if (sup < query.epsilon) report.members.push_back(tau);
  }

  if (report.members.size() >= 2) {
    std::int64_t gap = 0;
    for (std::size_t k = 1; k < report.members.size(); ++k) {
      gap = std::max(gap, report.members[k] - report.members[k - 1]);
    }
    report.inclusion_length = gap;
  }
  return report;
}

}  // namespace

bool TranslationReport::is_member(std::int64_t tau) const {
  return std::binary_search(members.begin(), members.end(), tau);
}

double TranslationReport::sup_diff_at(std::int64_t tau) const {
  if (!tau_range.contains(tau)) {
    throw OutOfWindowError("TranslationReport: tau " + std::to_string(tau) +
                           " was not scanned");
  }
  return sup_diff[static_cast<std::size_t>(tau - tau_range.lo)];
}

TranslationReport translation_set(const LogSignal& f, const TranslationQuery& query) {
  validate(query);
  const IndexRange need = required_samples(query);
  if (!f.covers(need)) {
    const std::int64_t lo = f.n_min() > need.lo ? need.lo : f.n_max() + 1;
    const std::int64_t hi = f.n_min() > need.lo ? f.n_min() - 1 : need.hi;
    throw InsufficientSamplesError(
        "translation_set: samples [" + std::to_string(need.lo) + ", " +
            std::to_string(need.hi) + "] needed, missing [" +
            std::to_string(lo) + ", " + std::to_string(hi) + "]",
        lo, hi);
  }
  return scan(f, query);
}

TranslationReport translation_set(const ApGenerator& f, const TranslationQuery& query) {
  validate(query);
  return scan(f.sample(required_samples(query)), query);
}

bool relatively_dense(const TranslationReport& report) {
  if (!report.inclusion_length) return false;
  const std::int64_t len = *report.inclusion_length;
  return report.members.front() <= report.tau_range.lo + len &&
         report.members.back() >= report.tau_range.hi - len;
}

namespace {

template <typename Source>
ApClassification classify(const Source& f, const ClassifyOptions& options) {
  if (options.epsilons.empty()) {
    throw std::invalid_argument("ap_classify: empty epsilon list");
  }
  for (std::size_t k = 0; k < options.epsilons.size(); ++k) {
    if (!(options.epsilons[k] > 0.0) ||
        (k > 0 && options.epsilons[k] > options.epsilons[k - 1])) {
      throw std::invalid_argument(
          "ap_classify: epsilons must be positive and descending");
    }
  }
  ApClassification out;
  out.ap_evidence = true;
  for (double eps : options.epsilons) {
    TranslationQuery query{eps, options.mode, options.tau_range, options.window,
                           options.q};
    EpsilonVerdict v{translation_set(f, query), false};
    v.relatively_dense = relatively_dense(v.report);
    out.ap_evidence = out.ap_evidence && v.relatively_dense;
    out.per_epsilon.push_back(std::move(v));
  }
  return out;
}

}  // namespace

ClassifyOptions fitted_options(IndexRange available, const ClassifyOptions& base) {
  const auto quarter = static_cast<std::int64_t>(available.size() / 4);
  if (quarter < 1) {
    throw std::invalid_argument("fitted_options: need at least 4 samples");
  }
  ClassifyOptions out = base;
  out.tau_range = {std::max(base.tau_range.lo, -quarter),
                   std::min(base.tau_range.hi, quarter)};
  out.window = {available.lo - std::min<std::int64_t>(out.tau_range.lo, 0),
                available.hi - std::max<std::int64_t>(out.tau_range.hi, 0)};
  return out;
}

ApClassification ap_classify(const LogSignal& f, const ClassifyOptions& options) {
  return classify(f, options);
}

ApClassification ap_classify(const ApGenerator& f, const ClassifyOptions& options) {
  return classify(f, options);
}

// ---------------------------------------------------------------------------
// Asymptotic split

SplitReport asymptotic_split_check(const LogSignal& phi, const ApGenerator& p,
                                   double decay_tol) {
  if (phi.size() < 9) {
    throw std::invalid_argument("asymptotic_split_check: window has " +
                                std::to_string(phi.size()) +
                                " samples, need at least 9");
  }
  if (p.dim() != phi.dim()) {
    throw std::invalid_argument("asymptotic_split_check: dimension mismatch");
  }
  SplitReport report;
  report.window = phi.range();
  report.decay_tol = decay_tol;
  const auto len = static_cast<std::int64_t>(phi.size());
  for (std::int64_t n = phi.n_min(); n <= phi.n_max(); ++n) {
    const auto third = static_cast<std::size_t>(3 * (n - phi.n_min()) / len);
    const StateView x = phi.at(n);
    for (std::size_t c = 0; c < x.size(); ++c) {
      report.third_sups[third] =
          std::max(report.third_sups[third], std::abs(x[c] - p.eval(n, c)));
    }
  }
  const auto& s = report.third_sups;
  report.pass = s[0] >= s[1] && s[1] >= s[2] && s[2] < decay_tol;
  return report;
}

}  // namespace qtime
