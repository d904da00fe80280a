#include "qtime/hopfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace qtime {

// ---------------------------------------------------------------------------
// DelaySequence / PiecewiseLinear / Activation

DelaySequence::DelaySequence(std::vector<std::int64_t> cycle)
    : cycle_(std::move(cycle)) {
  if (cycle_.empty()) throw std::invalid_argument("DelaySequence: empty cycle");
  for (std::int64_t d : cycle_) {
    if (d < 0) throw std::invalid_argument("DelaySequence: negative delay");
  }
}

std::int64_t DelaySequence::operator()(std::int64_t n) const {
  const auto p = static_cast<std::int64_t>(cycle_.size());
  return cycle_[static_cast<std::size_t>(((n % p) + p) % p)];
}

std::int64_t DelaySequence::max() const {
  return *std::max_element(cycle_.begin(), cycle_.end());
}

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("PiecewiseLinear: no knots");
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k].first) || !std::isfinite(knots_[k].second)) {
      throw std::invalid_argument("PiecewiseLinear: non-finite knot");
    }
    if (k > 0 && !(knots_[k].first > knots_[k - 1].first)) {
      throw std::invalid_argument("PiecewiseLinear: knots must increase in u");
    }
  }
}

double PiecewiseLinear::operator()(double u) const {
  if (knots_.empty()) throw std::logic_error("PiecewiseLinear: empty table");
  if (u <= knots_.front().first) return knots_.front().second;
  if (u >= knots_.back().first) return knots_.back().second;
  const auto hi = std::upper_bound(
      knots_.begin(), knots_.end(), u,
      [](double x, const std::pair<double, double>& k) { return x < k.first; });
  const auto lo = hi - 1;
  const double w = (u - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double PiecewiseLinear::lipschitz() const {
  double lip = 0.0;
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    lip = std::max(lip, std::abs(knots_[k].second - knots_[k - 1].second) /
                            (knots_[k].first - knots_[k - 1].first));
  }
  return lip;
}

double PiecewiseLinear::sup_abs() const {
  double s = 0.0;
  for (const auto& k : knots_) s = std::max(s, std::abs(k.second));
  return s;
}

double Activation::f(double u) const {
  return kind == Kind::kTanh ? std::tanh(u) : f_table(u);
}

double Activation::g(double u) const {
  if (kind == Kind::kTanh) return std::tanh(u);
  return g_table.empty() ? f_table(u) : g_table(u);
}

// ---------------------------------------------------------------------------
// HopfieldSpec

HopfieldSpec HopfieldSpec::zeros(std::size_t m, double c) {
  HopfieldSpec s;
  s.m = m;
  const ApGenerator zero = ApGenerator::scalar(0.0);
  s.c_hat.assign(m, ApGenerator::scalar(c));
  s.a_hat.assign(m * m, zero);
  s.b_hat.assign(m * m * m, zero);
  s.I_hat.assign(m, zero);
  s.activations.assign(m, Activation{});
  s.gamma.assign(m * m, DelaySequence{});
  s.omega.assign(m * m * m, DelaySequence{});
  s.v.assign(m * m * m, DelaySequence{});
  return s;
}

std::int64_t HopfieldSpec::max_delay() const {
  std::int64_t d = 0;
  for (const auto* list : {&gamma, &omega, &v}) {
    for (const DelaySequence& s : *list) d = std::max(d, s.max());
  }
  return d;
}

void HopfieldSpec::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("HopfieldSpec: " + what);
  };
  need(m >= 1, "m must be >= 1");
  need(c_hat.size() == m, "c_hat needs m entries");
  need(I_hat.size() == m, "I_hat needs m entries");
  need(a_hat.size() == m * m, "a_hat needs m*m entries");
  need(b_hat.size() == m * m * m, "b_hat needs m^3 entries");
  need(activations.size() == m, "activations need m entries");
  need(gamma.size() == m * m, "gamma needs m*m entries");
  need(omega.size() == m * m * m, "omega needs m^3 entries");
  need(v.size() == m * m * m, "v needs m^3 entries");
  for (const auto* list : {&c_hat, &a_hat, &b_hat, &I_hat}) {
    for (const ApGenerator& g : *list) need(g.dim() == 1, "coefficients must be scalar");
  }
  for (const Activation& act : activations) {
    need(act.lip_f > 0.0 && act.lip_g > 0.0 && act.bound_g > 0.0,
         "activation constants must be positive");
    if (act.kind == Activation::Kind::kTable) need(!act.f_table.empty(), "missing f table");
  }
  if (q) need(*q > 1.0, "q must be > 1");
}

// ---------------------------------------------------------------------------
// Spot checks

ActivationCheck spot_check_activations(const HopfieldSpec& spec, std::uint64_t seed,
                                       std::size_t samples, double range) {
  spec.validate();
  ActivationCheck check;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-range, range);
  auto report = [&](const std::string& msg) { check.violations.push_back(msg); };

  for (std::size_t j = 0; j < spec.m; ++j) {
    const Activation& act = spec.activations[j];
    const std::string tag = "_" + std::to_string(j + 1);
    if (std::abs(act.f(0.0) - act.f0) > 1e-12) report("f" + tag + "(0) differs from declared f0");
    if (std::abs(act.g(0.0) - act.g0) > 1e-12) report("g" + tag + "(0) differs from declared g0");
    bool f_bad = false, g_bad = false, n_bad = false;
    for (std::size_t k = 0; k < samples; ++k) {
      const double u = dist(rng);
      const double w = dist(rng);
      const double gap = std::abs(u - w);
      std::ostringstream at;
      at.precision(17);
      at << " at u=" << u << ", v=" << w;
      if (!f_bad && std::abs(act.f(u) - act.f(w)) > act.lip_f * gap * (1 + 1e-12) + 1e-15) {
        report("(H1) f" + tag + " exceeds Lipschitz constant" + at.str());
        f_bad = true;
      }
      if (!g_bad && std::abs(act.g(u) - act.g(w)) > act.lip_g * gap * (1 + 1e-12) + 1e-15) {
        report("(H1) g" + tag + " exceeds Lipschitz constant" + at.str());
        g_bad = true;
      }
      if (!n_bad && std::abs(act.g(u)) > act.bound_g * (1 + 1e-12)) {
        report("(H2) |g" + tag + "| exceeds N" + at.str());
        n_bad = true;
      }
    }
    check.samples += samples;
  }
  return check;
}

// ---------------------------------------------------------------------------
// Certificate

namespace {

struct Bounds {
  std::vector<double> c_minus, c_plus, c_window_min, a_plus, b_plus, I_plus, eta_bar;
  double L = 0.0;
  double rho = 0.0;
  bool contraction_ok = false;
};

Bounds compute_bounds(const HopfieldSpec& spec, IndexRange window) {
  spec.validate();
  if (window.empty()) throw std::invalid_argument("certificate: empty window");
  const std::size_t m = spec.m;
  Bounds b;
  for (std::size_t i = 0; i < m; ++i) {
    const ApGenerator& c = spec.c_hat[i];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::int64_t argmin = window.lo, argmax = window.lo;
    for (std::int64_t n = window.lo; n <= window.hi; ++n) {
      const double v = c.eval(n, 0);
      if (!(v > 0.0) || !(1.0 - v > 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "(H3) c_hat_" << i + 1 << "(" << n << ") = " << v
            << " violates 0 < c_hat < 1 (positive regressivity of -c_hat)";
        throw RegressivityError(msg.str(), n);
      }
      if (v < lo) { lo = v; argmin = n; }
      if (v > hi) { hi = v; argmax = n; }
    }
    const double inf = c.inf_bound(0);
    const double sup = c.sup_bound(0);
    if (lo < inf - 1e-9 * (1.0 + std::abs(inf))) {
      throw std::logic_error("certificate: window minimum below analytic infimum");
    }
    if (!(inf > 0.0)) {
      throw RegressivityError("(H3) analytic infimum of c_hat_" + std::to_string(i + 1) +
                                  " is <= 0 (window minimum at n = " +
                                  std::to_string(argmin) + ")",
                              argmin);
    }
    if (!(sup < 1.0)) {
      throw RegressivityError("(H3) analytic supremum of c_hat_" + std::to_string(i + 1) +
                                  " is >= 1 (window maximum at n = " +
                                  std::to_string(argmax) + ")",
                              argmax);
    }
    b.c_minus.push_back(inf);
    b.c_plus.push_back(sup);
    b.c_window_min.push_back(lo);
    b.I_plus.push_back(spec.I_hat[i].sup_bound(0));
  }
  for (const ApGenerator& g : spec.a_hat) b.a_plus.push_back(g.sup_bound(0));
  for (const ApGenerator& g : spec.b_hat) b.b_plus.push_back(g.sup_bound(0));

  for (std::size_t i = 0; i < m; ++i) {
    double eb = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      eb += b.a_plus[spec.pair(i, j)] * spec.activations[j].lip_f;
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = 0; l < m; ++l) {
        const Activation& aj = spec.activations[j];
        const Activation& al = spec.activations[l];
        eb += b.b_plus[spec.triple(i, j, l)] *
              (al.bound_g * aj.lip_g + aj.bound_g * al.lip_g);
      }
    }
    b.eta_bar.push_back(eb);
    b.L = std::max(b.L, b.I_plus[i] / b.c_minus[i]);
  }
  const double min_c = *std::min_element(b.c_minus.begin(), b.c_minus.end());
  const double max_eb = *std::max_element(b.eta_bar.begin(), b.eta_bar.end());
  b.rho = max_eb / min_c;
  b.contraction_ok = max_eb < min_c;
  return b;
}

double eta_at(const HopfieldSpec& spec, const Bounds& b, std::size_t i, double r0) {
  const std::size_t m = spec.m;
  double eta = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Activation& aj = spec.activations[j];
    double inner = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const Activation& al = spec.activations[l];
      inner += b.b_plus[spec.triple(i, j, l)] * (std::abs(al.g0) + al.lip_g * r0);
    }
    eta += b.a_plus[spec.pair(i, j)] * (std::abs(aj.f0) + aj.lip_f * r0) +
           (std::abs(aj.g0) + aj.lip_g * r0) * inner;
  }
  return eta;
}

}  // namespace

ContractionCertificate certificate(const HopfieldSpec& spec, double r0,
                                   IndexRange window) {
  if (!(r0 > 0.0)) throw std::invalid_argument("certificate: r0 must be > 0");
  Bounds b = compute_bounds(spec, window);
  ContractionCertificate cert;
  cert.r0 = r0;
  cert.window = window;
  cert.L = b.L;
  cert.rho = b.rho;
  cert.contraction_ok = b.contraction_ok;
  for (std::size_t i = 0; i < spec.m; ++i) {
    cert.eta.push_back(eta_at(spec, b, i, r0));
    cert.ball_lhs = std::max(cert.ball_lhs, cert.eta[i] / b.c_minus[i]);
  }
  cert.ball_lhs += b.L;
  cert.ball_ok = cert.ball_lhs <= r0;
  cert.c_minus = std::move(b.c_minus);
  cert.c_plus = std::move(b.c_plus);
  cert.c_window_min = std::move(b.c_window_min);
  cert.a_plus = std::move(b.a_plus);
  cert.b_plus = std::move(b.b_plus);
  cert.I_plus = std::move(b.I_plus);
  cert.eta_bar = std::move(b.eta_bar);
  return cert;
}

namespace {

// Solution set of A r^2 + B r + C <= 0 over r > 0, as [lo, hi] (hi = inf
// allowed); empty optional when infeasible.
std::optional<std::pair<double, double>> quadratic_nonpositive(double A, double B,
                                                               double C) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (A == 0.0) {
    if (B < 0.0) return std::make_pair(std::max(0.0, -C / B), kInf);
    if (B == 0.0 && C <= 0.0) return std::make_pair(0.0, kInf);
    if (C < 0.0) return std::make_pair(0.0, -C / B);
    return std::nullopt;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double qq = -0.5 * (B + std::copysign(root, B));
  double r1 = qq / A;
  double r2 = qq != 0.0 ? C / qq : r1;
  if (r1 > r2) std::swap(r1, r2);
  if (r2 < 0.0) return std::nullopt;
  return std::make_pair(std::max(0.0, r1), r2);
}

}  // namespace

R0Interval feasible_r0_interval(const HopfieldSpec& spec, IndexRange window) {
  const Bounds b = compute_bounds(spec, window);
  R0Interval out;
  out.contraction_ok = b.contraction_ok;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.m; ++i) {
    // eta_i(r) = alpha + beta r + gamma r^2.
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    for (std::size_t j = 0; j < spec.m; ++j) {
      const Activation& aj = spec.activations[j];
      double in0 = 0.0, in1 = 0.0;
      for (std::size_t l = 0; l < spec.m; ++l) {
        const Activation& al = spec.activations[l];
        const double bp = b.b_plus[spec.triple(i, j, l)];
        in0 += bp * std::abs(al.g0);
        in1 += bp * al.lip_g;
      }
      const double ap = b.a_plus[spec.pair(i, j)];
      alpha += ap * std::abs(aj.f0) + std::abs(aj.g0) * in0;
      beta += ap * aj.lip_f + aj.lip_g * in0 + std::abs(aj.g0) * in1;
      gamma += aj.lip_g * in1;
    }
    const double c = b.c_minus[i];
    const auto sol = quadratic_nonpositive(gamma / c, beta / c - 1.0, alpha / c + b.L);
    if (!sol) return out;
    lo = std::max(lo, sol->first);
    hi = std::min(hi, sol->second);
  }
  if (lo > hi) return out;
  out.lo = lo;
  if (std::isinf(hi)) {
    out.unbounded = true;
  } else {
    out.hi = hi;
  }
  return out;
}

R0GridSearch r0_grid_search(const HopfieldSpec& spec, IndexRange window,
                            std::size_t points) {
  if (points < 2) throw std::invalid_argument("r0_grid_search: need >= 2 points");
  R0GridSearch search;
  search.points = points;
  for (std::size_t k = 0; k < points; ++k) {
    const double r0 =
        1e-3 * std::pow(10.0, 6.0 * static_cast<double>(k) / static_cast<double>(points - 1));
    if (certificate(spec, r0, window).feasible()) {
      ++search.feasible_points;
      if (!search.first) search.first = r0;
      search.last = r0;
    }
  }
  return search;
}

std::int64_t tail_steps(const ContractionCertificate& cert, double tail_tol) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be > 0");
  std::int64_t steps = 1;
  for (std::size_t i = 0; i < cert.eta.size(); ++i) {
    const double g_bound = cert.eta[i] + cert.I_plus[i];
    if (g_bound == 0.0) continue;
    const double c = cert.c_minus[i];
    const double ratio = tail_tol * c / g_bound;
    if (ratio >= 1.0) continue;
    steps = std::max(steps, static_cast<std::int64_t>(
                                std::ceil(std::log(ratio) / std::log1p(-c))));
  }
  return steps;
}

// ---------------------------------------------------------------------------
// The operator Phi

namespace {

// Coefficients and delays sampled over a range of indices.
struct CoefficientTable {
  IndexRange range;
  std::size_t m = 0;
  std::vector<double> c, a, b, I;
  std::vector<std::int64_t> gamma, omega, v;

  CoefficientTable(const HopfieldSpec& spec, IndexRange r) : range(r), m(spec.m) {
    const std::size_t rows = r.size();
    c.resize(rows * m);
    I.resize(rows * m);
    a.resize(rows * m * m);
    gamma.resize(rows * m * m);
    b.resize(rows * m * m * m);
    omega.resize(rows * m * m * m);
    v.resize(rows * m * m * m);
    for (std::int64_t n = r.lo; n <= r.hi; ++n) {
      const auto k = static_cast<std::size_t>(n - r.lo);
      for (std::size_t i = 0; i < m; ++i) {
        c[k * m + i] = spec.c_hat[i].eval(n, 0);
        I[k * m + i] = spec.I_hat[i].eval(n, 0);
      }
      for (std::size_t p = 0; p < m * m; ++p) {
        a[k * m * m + p] = spec.a_hat[p].eval(n, 0);
        gamma[k * m * m + p] = spec.gamma[p](n);
      }
      for (std::size_t t = 0; t < m * m * m; ++t) {
        b[k * m * m * m + t] = spec.b_hat[t].eval(n, 0);
        omega[k * m * m * m + t] = spec.omega[t](n);
        v[k * m * m * m + t] = spec.v[t](n);
      }
    }
  }

  std::size_t row(std::int64_t n) const { return static_cast<std::size_t>(n - range.lo); }
};

// f_j(x_j(n)) and g_j(x_j(n)) over a range.
struct ActivationTable {
  std::int64_t lo = 0;
  std::size_t m = 0;
  std::vector<double> f, g;

  ActivationTable(const HopfieldSpec& spec, const LogSignal& x, IndexRange r)
      : lo(r.lo), m(spec.m), f(r.size() * spec.m), g(r.size() * spec.m) {
    for (std::int64_t n = r.lo; n <= r.hi; ++n) {
      const StateView xs = x.at(n);
      const auto k = static_cast<std::size_t>(n - r.lo) * m;
      for (std::size_t j = 0; j < m; ++j) {
        f[k + j] = spec.activations[j].f(xs[j]);
        g[k + j] = spec.activations[j].g(xs[j]);
      }
    }
  }
  double fv(std::int64_t n, std::size_t j) const {
    return f[static_cast<std::size_t>(n - lo) * m + j];
  }
  double gv(std::int64_t n, std::size_t j) const {
    return g[static_cast<std::size_t>(n - lo) * m + j];
  }
};

// G_i(s): everything on the right-hand side except -c_i x_i.
double forcing(const CoefficientTable& tab, const ActivationTable& acts, std::size_t i,
               std::int64_t s) {
  const std::size_t m = tab.m;
  const std::size_t k = tab.row(s);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t p = k * m * m + i * m + j;
    sum += tab.a[p] * acts.fv(s - tab.gamma[p], j);
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t t = k * m * m * m + (i * m + j) * m + l;
      sum += tab.b[t] * acts.gv(s - tab.omega[t], j) * acts.gv(s - tab.v[t], l);
    }
  }
  return sum + tab.I[k * m + i];
}

LogSignal apply_phi(const HopfieldSpec& spec, const CoefficientTable& tab,
                    std::int64_t tail, const LogSignal& phi, IndexRange out) {
  const std::size_t m = spec.m;
  const std::int64_t delay = spec.max_delay();
  const IndexRange in{out.lo - tail - delay, out.hi - 1};
  const IndexRange sources{out.lo - tail, out.hi - 1};
  const ActivationTable acts(spec, phi, in);

  std::vector<double> G(sources.size() * m);
  for (std::int64_t s = sources.lo; s <= sources.hi; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      G[static_cast<std::size_t>(s - sources.lo) * m + i] = forcing(tab, acts, i, s);
    }
  }

  LogSignal result(out.lo, out.hi, m);
  for (std::int64_t n = out.lo; n <= out.hi; ++n) {
    auto x = result.mutable_at(n);
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      double kernel = 1.0;  // prod_{u=s+1}^{n-1} (1 - c_i(u))
      for (std::int64_t s = n - 1; s >= n - tail; --s) {
        acc += kernel * G[static_cast<std::size_t>(s - sources.lo) * m + i];
        kernel *= 1.0 - tab.c[tab.row(s) * m + i];
      }
      x[i] = acc;
    }
  }
  return result;
}

void require_in_ball(const LogSignal& phi, IndexRange r, double r0, const char* what) {
  const double norm = phi.sup_norm(r);
  if (norm > r0 + Tolerance{}.allowance(r0)) {
    throw std::invalid_argument(std::string(what) + ": input sup norm " +
                                std::to_string(norm) + " exceeds r0 = " +
                                std::to_string(r0));
  }
}

std::string infeasible_message(const ContractionCertificate& cert) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "certificate infeasible at r0 = " << cert.r0 << ": ball condition "
      << cert.ball_lhs << (cert.ball_ok ? " <= " : " > ") << cert.r0
      << ", contraction ratio " << cert.rho << (cert.contraction_ok ? " < 1" : " >= 1");
  return msg.str();
}

}  // namespace

LogSignal phi_apply(const LogSignal& phi, const HopfieldSpec& spec, double r0,
                    IndexRange window, double tail_tol) {
  const ContractionCertificate cert = certificate(spec, r0, window);
  if (!cert.feasible()) throw InfeasibleError(infeasible_message(cert));
  if (phi.dim() != spec.m) throw std::invalid_argument("phi_apply: dimension mismatch");
  const std::int64_t tail = tail_steps(cert, tail_tol);
  const IndexRange need{window.lo - tail - spec.max_delay(), window.hi - 1};
  if (!phi.covers(need)) {
    throw InsufficientSamplesError(
        "phi_apply: input must cover [" + std::to_string(need.lo) + ", " +
            std::to_string(need.hi) + "]; history must start at " +
            std::to_string(need.lo),
        need.lo, std::min(need.hi, phi.n_min() - 1));
  }
  require_in_ball(phi, need, r0, "phi_apply");
  const CoefficientTable tab(spec, {window.lo - tail, window.hi});
  return apply_phi(spec, tab, tail, phi, window);
}

PicardResult picard_solve(const HopfieldSpec& spec, const PicardOptions& options) {
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    throw std::invalid_argument("picard_solve: need tol > 0 and max_iter >= 1");
  }
  const ContractionCertificate cert = certificate(spec, options.r0, options.window);
  if (!cert.feasible()) throw InfeasibleError(infeasible_message(cert));

  const std::size_t m = spec.m;
  const std::int64_t tail = tail_steps(cert, options.tail_tol);
  const std::int64_t delay = spec.max_delay();
  const std::int64_t reach = tail + delay;  // how far back one application looks
  const IndexRange final_range{options.window.lo - delay, options.window.hi};

  // Every iterate is computed exactly from phi_0, which is constant and so
  // known everywhere; iterate k lives on a window reach*(K-k) wider than the
  // final one. K is the contraction estimate of the iterations needed,
  // capped by max_iter.
  std::int64_t budget = options.max_iter;
  if (cert.rho == 0.0) {
    budget = std::min<std::int64_t>(budget, 2);
  } else {
    const double floor = 2.0 * options.tail_tol / (1.0 - cert.rho);
    if (options.tol > floor) {
      const double k = std::log((options.tol - floor) / (2.0 * options.r0)) /
                       std::log(cert.rho);
      budget = std::min<std::int64_t>(budget,
                                      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k))) + 2);
    }
  }

  State start = options.start.value_or(State(m, 0.0));
  if (start.size() != m) throw std::invalid_argument("picard_solve: start dimension");
  if (max_abs(start) > options.r0 + Tolerance{}.allowance(options.r0)) {
    throw std::invalid_argument("picard_solve: start lies outside the ball");
  }

  const IndexRange first_range{final_range.lo - budget * reach, final_range.hi};
  const CoefficientTable tab(spec, {first_range.lo + delay, final_range.hi});
  LogSignal current = LogSignal::constant(first_range, start);

  PicardResult result{final_range.size() > 0 ? LogSignal(final_range.lo, final_range.hi, m)
                                             : LogSignal(0, 0, m),
                      {}, cert, tail};
  for (std::int64_t k = 1; k <= budget; ++k) {
    const IndexRange out{final_range.lo - (budget - k) * reach, final_range.hi};
    LogSignal next = apply_phi(spec, tab, tail, current, out);
    const double delta = sup_distance(next, current, out);
    result.log.deltas.push_back(delta);
    current = std::move(next);
    if (delta < options.tol) {
      result.log.converged = true;
      result.solution = current.restricted(final_range);
      return result;
    }
  }
  throw ConvergenceError("picard_solve: no convergence to tol within " +
                             std::to_string(budget) + " iterations",
                         result.log);
}

double residual(const LogSignal& sol, const HopfieldSpec& spec, IndexRange window) {
  spec.validate();
  const std::int64_t delay = spec.max_delay();
  const IndexRange need{window.lo - delay, window.hi + 1};
  if (!sol.covers(need)) {
    throw InsufficientSamplesError("residual: solution must cover [" +
                                       std::to_string(need.lo) + ", " +
                                       std::to_string(need.hi) + "]",
                                   need.lo, need.hi);
  }
  const CoefficientTable tab(spec, window);
  const ActivationTable acts(spec, sol, {need.lo, window.hi});
  double worst = 0.0;
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    for (std::size_t i = 0; i < spec.m; ++i) {
      const double x = sol.value(n, i);
      const double rhs = -tab.c[tab.row(n) * spec.m + i] * x + forcing(tab, acts, i, n);
      worst = std::max(worst, std::abs(sol.value(n + 1, i) - x - rhs));
    }
  }
  return worst;
}

double residual_constant(const ContractionCertificate& cert) {
  return 1.0 + *std::max_element(cert.c_plus.begin(), cert.c_plus.end()) +
         *std::max_element(cert.eta_bar.begin(), cert.eta_bar.end());
}

GridFunction back_to_quantum(const LogSignal& sol, double q) { return lower(sol, q); }

std::vector<double> quantum_residuals(const GridFunction& x, const HopfieldSpec& spec,
                                      IndexRange window) {
  spec.validate();
  const QLattice& lat = x.lattice();
  if (!lat.is_quantum()) throw std::invalid_argument("quantum_residuals: need q^Z");
  const std::size_t m = spec.m;
  std::vector<double> out;
  out.reserve(window.size());
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    const double graininess = lat.graininess(n);
    const State dx = q_derivative(x, LogIndex(n));
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double rhs = -spec.c_hat[i].eval(n, 0) / graininess * x.value(n, i);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t p = spec.pair(i, j);
        rhs += spec.a_hat[p].eval(n, 0) / graininess *
               spec.activations[j].f(x.value(n - spec.gamma[p](n), j));
        for (std::size_t l = 0; l < m; ++l) {
          const std::size_t t = spec.triple(i, j, l);
          rhs += spec.b_hat[t].eval(n, 0) / graininess *
                 spec.activations[j].g(x.value(n - spec.omega[t](n), j)) *
                 spec.activations[l].g(x.value(n - spec.v[t](n), l));
        }
      }
      rhs += spec.I_hat[i].eval(n, 0) / graininess;
      worst = std::max(worst, std::abs(dx[i] - rhs));
    }
    out.push_back(worst);
  }
  return out;
}

DynamicSystem as_dynamic_system(const HopfieldSpec& spec) {
  spec.validate();
  auto shared = std::make_shared<const HopfieldSpec>(spec);
  const std::size_t m = spec.m;
  DynamicSystem sys;
  sys.dim = m;
  sys.max_delay = spec.max_delay();
  for (const auto* list : {&spec.gamma, &spec.omega, &spec.v}) {
    for (const DelaySequence& d : *list) {
      sys.delays.push_back([d](std::int64_t n) { return d(n); });
    }
  }
  const std::size_t omega_base = m * m;
  const std::size_t v_base = m * m + m * m * m;
  sys.rhs = [shared, m, omega_base, v_base](LogIndex idx, StateView x,
                                           const DelayedStates& delayed) -> State {
    const HopfieldSpec& s = *shared;
    if (idx.is_neg_inf()) return State(m, 0.0);
    const std::int64_t n = idx.value();
    State out(m);
    for (std::size_t i = 0; i < m; ++i) {
      double sum = -s.c_hat[i].eval(n, 0) * x[i];
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t p = s.pair(i, j);
        sum += s.a_hat[p].eval(n, 0) * s.activations[j].f(delayed[p][j]);
        for (std::size_t l = 0; l < m; ++l) {
          const std::size_t t = s.triple(i, j, l);
          sum += s.b_hat[t].eval(n, 0) * s.activations[j].g(delayed[omega_base + t][j]) *
                 s.activations[l].g(delayed[v_base + t][l]);
        }
      }
      out[i] = sum + s.I_hat[i].eval(n, 0);
    }
    return out;
  };
  return sys;
}

}  // namespace qtime
