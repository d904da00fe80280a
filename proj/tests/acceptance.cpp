// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "oracles.hpp"
#include "qtime/apgen.hpp"
#include "qtime/dynamics.hpp"
#include "qtime/hopfield.hpp"
#include "qtime/io.hpp"
#include "qtime/logmap.hpp"
#include "qtime/qlattice.hpp"

using namespace qtime;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Distance in units in the last place of b.
double ulps(double a, double b) {
  if (a == b) return 0.0;
  const double ulp = std::nextafter(std::abs(b), std::numeric_limits<double>::infinity()) -
                     std::abs(b);
  return std::abs(a - b) / ulp;
}

GridFunction random_scalar(const QLattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return GridFunction::tabulate(lat, 1, [&](std::int64_t, double) { return State{d(rng)}; });
}

constexpr double kQs[] = {1.5, 2.0, 3.0};

// ---------------------------------------------------------------------------

void ac1(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst_product = 0.0, worst_ftc = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double q = kQs[trial % 3];
    const QLattice lat = QLattice::quantum(q, -20, 20);
    const GridFunction f = random_scalar(lat, rng);
    const GridFunction g = random_scalar(lat, rng);
    const GridFunction fg = GridFunction::tabulate(
        lat, 1, [&](std::int64_t n, double) { return State{f.value(n) * g.value(n)}; });
    const GridFunction df = q_derivative(f), dg = q_derivative(g), dfg = q_derivative(fg);
    for (std::int64_t n = -20; n < 20; ++n) {
      // D(fg) = D f g^sigma + f D g
      const double a = df.value(n) * g.value(n + 1);
      const double b = f.value(n) * dg.value(n);
      const double err = std::abs(dfg.value(n) - (a + b)) / (std::abs(a) + std::abs(b) + 1e-300);
      worst_product = std::max(worst_product, err);
      // Independent oracle for the derivative itself.
      const double ref = oracle::q_derivative(
          [&](double t) {
            const auto k = static_cast<std::int64_t>(std::llround(std::log(t) / std::log(q)));
            return f.value(k);
          },
          q, n);
      o.require(std::abs(df.value(n) - ref) <= 1e-9 * std::abs(ref) + 1e-300,
                "derivative differs from oracle");
    }
    // int_{a}^{b} D f = f(b) - f(a) for every a < b in the window.
    for (std::int64_t a = -20; a < 20; a += 7) {
      for (std::int64_t b = a + 1; b <= 20; b += 5) {
        double scale = 0.0;
        for (std::int64_t n = a; n < b; ++n) scale += std::abs(f.value(n + 1) - f.value(n));
        const double lhs = q_integral(df, a, b).value[0];
        const double rhs = f.value(b) - f.value(a);
        worst_ftc = std::max(worst_ftc, std::abs(lhs - rhs) / (scale + 1e-300));
      }
    }
  }
  const double secs = seconds_since(t0);
  o.require(worst_product <= 1e-9, "product rule relative error");
  o.require(worst_ftc <= 1e-9, "fundamental theorem relative error");
  o.require(secs < 5.0, "runtime");
  o.detail << "product rel err " << worst_product << ", FTC rel err " << worst_ftc << ", "
           << secs << " s";
}

void ac2(Outcome& o) {
  std::mt19937_64 rng(202);
  double worst_rec = 0.0, worst_semi = 0.0;
  for (double q : kQs) {
    const QLattice lat = QLattice::quantum(q, -10, 10);
    std::uniform_real_distribution<double> d(-0.4, 0.4);
    const GridFunction p = GridFunction::tabulate(
        lat, 1, [&](std::int64_t, double t) { return State{d(rng) / ((q - 1.0) * t)}; });
    for (std::int64_t s = -10; s <= 10; ++s) {
      for (std::int64_t n = s; n < 10; ++n) {
        const double step = 1.0 + lat.graininess(n) * p.value(n);
        worst_rec = std::max(worst_rec, ulps(ts_exponential(p, n + 1, s),
                                             step * ts_exponential(p, n, s)));
      }
    }
    for (std::int64_t s = -10; s <= 10; s += 2) {
      for (std::int64_t r = s; r <= 10; r += 3) {
        for (std::int64_t n = r; n <= 10; n += 2) {
          worst_semi = std::max(worst_semi,
                                ulps(ts_exponential(p, n, r) * ts_exponential(p, r, s),
                                     ts_exponential(p, n, s)));
        }
      }
    }
  }
  o.require(worst_rec <= 8.0, "recurrence ulp");
  o.require(worst_semi <= 8.0, "semigroup ulp");

  int passed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double q = kQs[trial % 3];
    const QLattice lat = QLattice::quantum(q, -10, 10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const GridFunction p = GridFunction::tabulate(
        lat, 1, [&](std::int64_t, double t) { return State{0.5 * u(rng) / ((q - 1.0) * t)}; });
    const GridFunction f = GridFunction::tabulate(
        lat, 1, [&](std::int64_t, double t) { return State{u(rng) / ((q - 1.0) * t)}; });
    // y with D y = p y + f - slack, slack >= 0.
    std::vector<double> y(lat.size());
    y[0] = 2.0 * u(rng) - 1.0;
    for (std::int64_t n = -10; n < 10; ++n) {
      const auto k = static_cast<std::size_t>(n + 10);
      const double mu = lat.graininess(n);
      y[k + 1] = y[k] + mu * (p.value(n) * y[k] + f.value(n)) - 0.1 * u(rng);
    }
    if (gronwall_verify(GridFunction(lat, 1, y), p, f).pass()) ++passed;
  }
  o.require(passed == 200, "gronwall instances");
  o.detail << "recurrence " << worst_rec << " ulp, semigroup " << worst_semi
           << " ulp, gronwall " << passed << "/200";
}

void ac3(Outcome& o) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double worst = 0.0;
  bool exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    const double q = kQs[trial % 3];
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 3);
    std::vector<double> A(m * m), C(m * m), b(m);
    for (double& x : A) x = d(rng);
    for (double& x : C) x = d(rng);
    for (double& x : b) x = d(rng);
    const std::int64_t delay = 1 + trial % 3;
    QuantumSystem sys;
    sys.dim = m;
    sys.max_delay = delay;
    sys.delays = {[delay](std::int64_t) { return delay; }};
    sys.rhs = [=](const QPoint& at, StateView x, const DelayedStates& dl) {
      State out(m);
      for (std::size_t i = 0; i < m; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < m; ++j) {
          s += A[i * m + j] * std::tanh(x[j]) + C[i * m + j] * std::sin(dl[0][j]);
        }
        out[i] = s / (1.0 + at.t);
      }
      return out;
    };
    const std::int64_t n0 = -30;
    const QLattice hl = QLattice::quantum(q, n0 - delay, n0);
    const GridFunction hist = GridFunction::tabulate(hl, m, [&](std::int64_t, double) {
      State s(m);
      for (double& x : s) x = d(rng);
      return s;
    });
    const GridFunction xq = solve_forward(sys, hist, n0 + 50);
    const LogSignal xl = solve_forward(to_log_system(sys, q), lift(hist), n0 + 50);
    const LogSignal lq = lift(xq);
    for (std::int64_t n = xl.n_min(); n <= xl.n_max(); ++n) {
      for (std::size_t i = 0; i < m; ++i) {
        const double a = lq.value(n, i), c = xl.value(n, i);
        worst = std::max(worst, std::abs(a - c) / std::max(1.0, std::abs(c)));
      }
    }
    exact = exact && lift(lower(xl, q)) == xl && lower(lift(xq), q) == xq;
  }
  o.require(worst <= 1e-9, "solve/lift commutation");
  o.require(exact, "round trip");
  o.detail << "max rel diff " << worst << ", round trips exact: " << (exact ? "yes" : "no");
}

void ac4(Outcome& o) {
  const ApGenerator p5 = ApGenerator::scalar(0.0, {{1.0, 2.0 * std::numbers::pi / 5.0, 0.0}});
  for (double eps : {0.5, 0.1, 1e-6}) {
    TranslationQuery qy;
    qy.epsilon = eps;
    const TranslationReport r = translation_set(p5, qy);
    o.require(r.inclusion_length == 5, "period-5 inclusion length");
    o.detail << "l(" << eps << ")=" << (r.inclusion_length ? *r.inclusion_length : -1) << " ";
  }
  const ApGenerator c1 = ApGenerator::scalar(0.0, {{1.0, 1.0, 0.0}});
  TranslationQuery qy;
  qy.epsilon = 0.02;
  qy.window = {-500, 500};
  qy.tau_range = {40, 50};
  const TranslationReport r = translation_set(c1, qy);
  const auto cosn = [](std::int64_t n) { return std::cos(static_cast<double>(n)); };
  const double brute = oracle::sup_shift_diff(cosn, 44, -500, 500);
  o.require(r.is_member(44), "tau = 44 member");
  o.require(brute < 0.02, "tau = 44 brute force");
  o.require(std::abs(r.sup_diff_at(44) - brute) <= 1e-12, "sup diff vs brute force");
  o.require(r.members == oracle::translation_members(cosn, 0.02, 40, 50, -500, 500),
            "members vs brute force");
  o.detail << "sup|cos(n+44)-cos n| = " << brute << " ";

  TranslationQuery lin;
  lin.epsilon = 0.5;
  const LogSignal n_signal = LogSignal::tabulate(
      {-700, 700}, 1, [](std::int64_t n) { return State{static_cast<double>(n)}; });
  const TranslationReport e = translation_set(n_signal, lin);
  o.require(e.members == std::vector<std::int64_t>{0}, "E = {0} for f(n) = n");
  o.detail << "|E(n)| = " << e.members.size();
}

void ac5(Outcome& o) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const IndexRange win{-60, 60};
  const IndexRange taus{-20, 20};
  const IndexRange span{win.lo + taus.lo, win.hi + taus.hi};
  std::size_t implications = 0, violations = 0;
  auto check = [&](bool premise, bool conclusion) {
    if (!premise) return;
    ++implications;
    if (!conclusion) ++violations;
  };
  auto set = [&](const LogSignal& s, double e) {
    return translation_set(s, {e, ApMode::kUnweighted, taus, win});
  };
  auto make = [&](const std::function<double(std::int64_t)>& fn) {
    return LogSignal::tabulate(span, 1, [&](std::int64_t n) { return State{fn(n)}; });
  };
  for (int trial = 0; trial < 500; ++trial) {
    const ApGenerator f = ApGenerator::scalar(
        d(rng), {{d(rng), 1.0 + d(rng), d(rng)}, {0.3 * d(rng), 2.0 + d(rng), d(rng)}});
    const ApGenerator g = ApGenerator::scalar(3.0, {{d(rng), 0.5 + d(rng), d(rng)}});
    const double eps = 0.05 + 0.5 * std::abs(d(rng));
    const double M = 3.0 - std::abs(g.components()[0].terms[0].amp);
    const LogSignal fs = f.sample(span), gs = g.sample(span);
    const TranslationReport Ef = set(fs, eps), Eg = set(gs, eps);
    const TranslationReport Esum = set(make([&](auto n) { return fs.value(n) + gs.value(n); }),
                                       2 * eps);
    const TranslationReport Eprod = set(make([&](auto n) { return fs.value(n) * gs.value(n); }),
                                        eps * (f.sup_bound(0) + g.sup_bound(0)));
    const TranslationReport Eg2 = set(gs, M * M * eps);
    const TranslationReport Equot = set(make([&](auto n) { return 1.0 / gs.value(n); }), eps);
    const double L = 0.5 + std::abs(d(rng));
    const TranslationReport Ecomp =
        set(make([&](auto n) { return L * std::sin(fs.value(n)); }), L * eps);
    // f is within delta < eps/3 of fn.
    const double delta = eps / 3.0 * 0.99 * std::abs(d(rng));
    const LogSignal fn_sig = make([&](auto n) {
      return fs.value(n) + delta * std::cos(3.7 * static_cast<double>(n));
    });
    const TranslationReport Efn = set(fn_sig, eps / 3.0), Ef_full = set(fs, eps);
    const bool close = sup_distance(fs, fn_sig, span) < eps / 3.0;
    for (std::int64_t tau = taus.lo; tau <= taus.hi; ++tau) {
      check(Ef.is_member(tau) && Eg.is_member(tau),
            Esum.is_member(tau) && Eprod.is_member(tau));
      check(Eg2.is_member(tau), Equot.is_member(tau));
      check(Ef.is_member(tau), Ecomp.is_member(tau));
      check(close && Efn.is_member(tau), Ef_full.is_member(tau));
    }
  }
  o.require(violations == 0, "closure violations");
  o.detail << violations << " violations over " << implications << " triggered implications";
}

void ac6(Outcome& o) {
  const HopfieldSpec s = oracle::scalar_network();
  const ContractionCertificate c = certificate(s, 1.0, {-50, 50});
  o.require(std::abs(c.eta_bar[0] - 0.4) <= 1e-12, "eta_bar");
  o.require(std::abs(c.L - 0.2) <= 1e-12, "L");
  o.require(std::abs(c.rho - 0.8) <= 1e-12, "rho");
  const R0Interval iv = feasible_r0_interval(s, {-50, 50});
  const double lo = (3.0 - std::sqrt(5.0)) / 2.0, hi = (3.0 + std::sqrt(5.0)) / 2.0;
  o.require(iv.lo && std::abs(*iv.lo - lo) <= 1e-12, "r0 lower end");
  o.require(iv.hi && std::abs(*iv.hi - hi) <= 1e-12, "r0 upper end");
  o.detail << "eta_bar " << c.eta_bar[0] << ", L " << c.L << ", rho " << c.rho << ", r0 in ["
           << io::format_double(iv.lo.value_or(NAN)) << ", "
           << io::format_double(iv.hi.value_or(NAN)) << "]";
}

void ac7(Outcome& o) {
  const auto t0 = Clock::now();
  const HopfieldSpec s = oracle::scalar_network();
  PicardOptions opt;
  const PicardResult a = picard_solve(s, opt);
  PicardOptions other = opt;
  other.start = State{0.9};
  const PicardResult b = picard_solve(s, other);
  const double secs = seconds_since(t0);

  const double d0 = a.log.deltas.front();
  for (std::size_t k = 0; k < a.log.deltas.size(); ++k) {
    o.require(a.log.deltas[k] <= std::pow(0.8, static_cast<double>(k)) * d0 + 1e-10,
              "delta bound at k = " + std::to_string(k));
  }
  const double x_star = oracle::scalar_fixed_point();
  double err = 0.0;
  for (std::int64_t n = a.solution.n_min(); n <= a.solution.n_max(); ++n) {
    err = std::max(err, std::abs(a.solution.value(n) - x_star));
  }
  const double res = residual(a.solution, s, {opt.window.lo, opt.window.hi - 1});
  const double starts = sup_distance(a.solution, b.solution, a.solution.range());
  o.require(err <= 1e-8, "fixed point vs bisection");
  o.require(res <= 1e-8, "residual");
  o.require(starts <= 2 * opt.tol, "two starts");
  o.require(secs < 1.0, "runtime");
  o.detail << a.log.deltas.size() << " iterations, |x - x*| " << err << " (x* "
           << io::format_double(x_star) << "), residual " << res << ", starts differ "
           << starts << ", " << secs << " s";
}

void ac8(Outcome& o) {
  PicardOptions opt;
  opt.window = {-700, 700};
  const HopfieldSpec s = oracle::three_neuron_network(false);
  const PicardResult r = picard_solve(s, opt);
  const double res = residual(r.solution, s, {opt.window.lo, opt.window.hi - 1});
  ClassifyOptions base;
  base.epsilons = {0.5, 0.2, 0.1};
  const ApClassification ap = ap_classify(r.solution, fitted_options(r.solution.range(), base));
  o.require(r.certificate.rho < 1.0, "rho < 1");
  o.require(res <= 1e-8, "residual");
  o.require(ap.ap_evidence, "AP_EVIDENCE");
  o.detail << "rho " << r.certificate.rho << ", residual " << res << ", l(eps) =";
  for (const auto& v : ap.per_epsilon) {
    o.detail << " " << (v.report.inclusion_length ? *v.report.inclusion_length : -1);
  }

  const HopfieldSpec per = oracle::three_neuron_network(true);
  PicardOptions popt;
  popt.window = {-200, 200};
  const PicardResult p = picard_solve(per, popt);
  double worst = 0.0;
  for (std::int64_t n = p.solution.n_min(); n + 35 <= p.solution.n_max(); ++n) {
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(p.solution.value(n + 35, i) - p.solution.value(n, i)));
    }
  }
  o.require(worst <= 1e-8, "periodic solution");
  o.detail << "; period-35 defect " << worst;
}

void ac9(Outcome& o) {
  const double c = 0.3;
  DynamicSystem sys;
  sys.rhs = [c](LogIndex, StateView x, const DelayedStates&) { return State{-c * x[0]}; };
  auto spec = [](double decay) {
    LyapunovSpec l;
    l.V = [](std::int64_t, StateView x, StateView y) { return std::abs(x[0] - y[0]); };
    l.wedge_a = [](double r) { return r; };
    l.wedge_b = [](double r) { return r; };
    l.lip_V = 1.0;
    l.decay_c = decay;
    return l;
  };
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  std::vector<LyapunovSample> samples;
  for (int k = 0; k < 100; ++k) samples.push_back({k % 5, State{d(rng)}, State{d(rng)}});
  const LyapunovReport good = lyapunov_verify(spec(c), sys, samples);
  const LyapunovReport bad = lyapunov_verify(spec(1.1 * c), sys, samples);
  o.require(good.pass(), "passes at the true decay");
  o.require(!bad.pass() && bad.violates(LyapunovCondition::kDecay), "fails at 1.1 c");

  const LogSignal ref = solve_forward(sys, LogSignal::constant({0, 0}, {1.0}), 60);
  const std::vector<State> perturb{{0.5}, {-0.25}, {1e-3}};
  const StabilityReport st = stability_probe(sys, ref, perturb);
  for (const ProbeRun& run : st.runs) {
    o.require(std::abs(run.rate - (1.0 - c)) <= 0.05 * (1.0 - c), "measured rate");
  }
  o.detail << "rates";
  for (const ProbeRun& run : st.runs) o.detail << " " << run.rate;
  o.detail << " vs " << 1.0 - c;
}

// ---------------------------------------------------------------------------
// CLI vs library, byte for byte.

void same_file(Outcome& o, const clitest::fs::path& p, const std::string& expect) {
  const bool ok = clitest::fs::exists(p) && clitest::slurp(p) == expect;
  o.require(ok, p.filename().string() + " differs");
}

void ac10(Outcome& o) {
  using clitest::Json;
  namespace fs = clitest::fs;
  const fs::path dir = clitest::scratch("acceptance");
  int runs = 0;
  auto cli = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), {"--seed", "0", "--out", out.string()});
    ++runs;
    return clitest::run_cli(std::move(args));
  };

  {  // analyze, generator input
    ClassifyOptions opt;
    opt.epsilons = {0.5, 0.1};
    opt.tau_range = {-30, 30};
    opt.window = {-100, 100};
    Json cfg = Json::object();
    cfg["generator"] = io::to_json(clitest::period_five());
    cfg["epsilons"] = opt.epsilons;
    cfg["tau_range"] = {-30, 30};
    cfg["window"] = {-100, 100};
    const fs::path out = dir / "analyze_gen";
    o.require(cli({"analyze", "--config", clitest::write_config(dir, cfg, "a1.json")}, out) == 0,
              "analyze exit");
    const ApClassification lib = ap_classify(clitest::period_five(), opt);
    same_file(o, out / "report.json", io::dump(io::to_json(lib)));
    for (std::size_t k = 0; k < lib.per_epsilon.size(); ++k) {
      same_file(o, out / ("translation_" + std::to_string(k + 1) + ".csv"),
                io::to_csv(lib.per_epsilon[k].report));
    }
  }
  {  // analyze, sampled signal in weighted mode with q from the flag
    const LogSignal sig = LogSignal::tabulate({-80, 80}, 1, [](std::int64_t n) {
      return State{std::cos(static_cast<double>(n)) + 0.5 * std::cos(std::sqrt(2.0) * n)};
    });
    ClassifyOptions opt;
    opt.mode = ApMode::kWeighted;
    opt.q = 1.5;
    opt.epsilons = {0.5};
    opt.tau_range = {-10, 10};
    opt.window = {-60, 60};
    Json cfg = Json::object();
    cfg["signal"] = io::to_json(sig);
    cfg["mode"] = "weighted";
    cfg["epsilons"] = {0.5};
    cfg["tau_range"] = {-10, 10};
    const fs::path out = dir / "analyze_sig";
    o.require(cli({"analyze", "--config", clitest::write_config(dir, cfg, "a2.json"), "--q",
                   "1.5", "--window", "-60..60"},
                  out) == 0,
              "analyze signal exit");
    const ApClassification lib = ap_classify(sig, opt);
    same_file(o, out / "report.json", io::dump(io::to_json(lib)));
    same_file(o, out / "translation_1.csv", io::to_csv(lib.per_epsilon[0].report));
  }
  {  // transform lift and lower
    const GridFunction f(QLattice::quantum(3.0, -6, 6, true), 2,
                         [] {
                           std::vector<double> v;
                           for (int k = 0; k < 26; ++k) v.push_back(std::sin(0.7 * k) / 3.0);
                           return v;
                         }(),
                         State{0.0, 1.0});
    Json cfg = Json::object();
    cfg["input"] = io::to_json(f);
    const fs::path out = dir / "transform";
    o.require(cli({"transform", "lift", "--config", clitest::write_config(dir, cfg, "t1.json")},
                  out) == 0,
              "lift exit");
    same_file(o, out / "lifted.json", io::dump(io::to_json(lift(f))));
    Json back = Json::object();
    back["input"] = io::to_json(lift(f));
    back["q"] = 3.0;
    back["output"] = "back.json";
    o.require(cli({"transform", "lower", "--config", clitest::write_config(dir, back, "t2.json")},
                  out) == 0,
              "lower exit");
    same_file(o, out / "back.json", io::dump(io::to_json(lower(lift(f), 3.0))));
  }
  {  // solve on both scales
    for (const char* scale : {"log", "quantum"}) {
      Json sys_json = clitest::small_system();
      sys_json["scale"] = scale;
      sys_json["q"] = 2.0;
      Json cfg = Json::object();
      cfg["system"] = sys_json;
      cfg["x0"] = {0.5};
      cfg["n0"] = -10;
      cfg["n_end"] = 30;
      const fs::path out = dir / (std::string("solve_") + scale);
      o.require(cli({"solve", "--config",
                     clitest::write_config(dir, cfg, std::string("s_") + scale + ".json")},
                    out) == 0,
                "solve exit");
      const io::SystemSpec spec = io::system_spec_from_json(sys_json);
      const LogSignal hist = LogSignal::constant({-10 - spec.delay.max(), -10}, {0.5});
      Json report;
      report["scale"] = scale;
      report["n0"] = -10;
      report["n_end"] = 30;
      report["dim"] = 1;
      std::string csv;
      if (std::string(scale) == "log") {
        const LogSignal x = solve_forward(spec.log_system(), hist, 30);
        csv = io::trajectory_csv(x, 2.0);
        report["residual"] = trajectory_residual(spec.log_system(), x);
        report["final_state"] = State(x.at(30).begin(), x.at(30).end());
      } else {
        const QuantumSystem qs = spec.quantum_system();
        const GridFunction x = solve_forward(qs, lower(hist, 2.0), 30);
        csv = io::trajectory_csv(x);
        report["residual"] = trajectory_residual(to_log_system(qs, 2.0), lift(x));
        report["final_state"] = State(x.at(30).begin(), x.at(30).end());
      }
      same_file(o, out / "trajectory.csv", csv);
      same_file(o, out / "report.json", io::dump(report));
    }
  }
  {  // hopfield check and solve
    const HopfieldSpec spec = oracle::scalar_network();
    const IndexRange window{-40, 40};
    Json cfg = Json::object();
    cfg["network"] = io::to_json(spec);
    cfg["window"] = {-40, 40};
    const std::string path = clitest::write_config(dir, cfg, "h.json");

    const R0GridSearch grid = r0_grid_search(spec, window);
    const double r0 = grid.first.value_or(1.0);
    Json report;
    report["certificate"] = io::to_json(certificate(spec, r0, window));
    report["r0_interval"] = io::to_json(feasible_r0_interval(spec, window));
    report["r0_grid"] = io::to_json(grid);
    report["spot_check"] = io::to_json(spot_check_activations(spec, 0, 1000));

    const fs::path check = dir / "hopfield_check";
    o.require(cli({"hopfield", "check", "--config", path}, check) == 0, "check exit");
    same_file(o, check / "certificate.json", io::dump(report));

    PicardOptions opt;
    opt.window = window;
    opt.r0 = r0;
    const PicardResult res = picard_solve(spec, opt);
    const IndexRange rw{window.lo, window.hi - 1};
    report["tail_steps"] = res.tail_steps;
    report["convergence"] = io::to_json(res.log);
    report["residual"] = residual(res.solution, spec, rw);
    report["residual_bound"] = residual_constant(res.certificate) * (opt.tol + opt.tail_tol);
    report["ap"] = io::to_json(ap_classify(res.solution, fitted_options(res.solution.range())));
    const GridFunction xq = back_to_quantum(res.solution, 2.0);
    const std::vector<double> qres = quantum_residuals(xq, spec, rw);
    report["quantum_residual_max"] = *std::max_element(qres.begin(), qres.end());

    const fs::path solve = dir / "hopfield_solve";
    o.require(cli({"hopfield", "solve", "--config", path}, solve) == 0, "solve exit");
    same_file(o, solve / "report.json", io::dump(report));
    same_file(o, solve / "solution_log.csv", io::trajectory_csv(res.solution, 2.0));
    same_file(o, solve / "solution_quantum.csv", io::trajectory_csv(xq));
  }
  o.detail << runs << " CLI runs compared with direct library calls";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << name << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str()
              << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
