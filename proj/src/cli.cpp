#include "qtime/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qtime/apgen.hpp"
#include "qtime/dynamics.hpp"
#include "qtime/hopfield.hpp"
#include "qtime/io.hpp"
#include "qtime/logmap.hpp"

namespace qtime::cli {

namespace {

using io::Json;

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<double> q;
  std::optional<std::string> window;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string direction;
};

struct Context {
  Flags flags;
  Json config;
  std::filesystem::path base;  // directory of the config file

  std::string out_path(const std::string& name) const {
    return (std::filesystem::path(flags.out) / name).string();
  }
  void write(const std::string& name, const std::string& text) const {
    io::write_text(out_path(name), text);
  }
  std::string resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (base / p).string();
  }
  // Inline object under `key`, or the file named by `key`_file.
  Json section(const std::string& key) const {
    if (config.contains(key)) return config[key];
    const std::string file_key = key + "_file";
    if (config.contains(file_key)) {
      if (!config[file_key].is_string()) {
        throw ParseError("field '" + file_key + "' must be a path");
      }
      return io::read_json(resolve(config[file_key].get<std::string>()));
    }
    throw ParseError("missing field '" + key + "' (or '" + file_key + "')");
  }
  std::optional<double> number(const std::string& key) const {
    if (!config.contains(key) || config[key].is_null()) return std::nullopt;
    return io::as_double(config[key], key);
  }
  std::optional<IndexRange> window() const {
    if (flags.window) return io::parse_range(*flags.window);
    if (config.contains("window")) return io::as_range(config["window"], "window");
    return std::nullopt;
  }
  std::optional<double> q() const { return flags.q ? flags.q : number("q"); }
};

// ---------------------------------------------------------------------------

int cmd_analyze(const Context& ctx) {
  const Json& cfg = ctx.config;
  ClassifyOptions options;
  if (cfg.contains("mode")) {
    if (cfg["mode"] == "weighted") {
      options.mode = ApMode::kWeighted;
    } else if (cfg["mode"] != "unweighted") {
      throw ParseError("field 'mode' must be unweighted or weighted");
    }
  }
  if (cfg.contains("epsilons")) options.epsilons = io::as_state(cfg["epsilons"], "epsilons");
  if (cfg.contains("tau_range")) options.tau_range = io::as_range(cfg["tau_range"], "tau_range");
  if (auto w = ctx.window()) options.window = *w;
  if (auto q = ctx.q()) options.q = *q;

  ApClassification result;
  if (cfg.contains("generator") || cfg.contains("generator_file")) {
    result = ap_classify(io::ap_generator_from_json(ctx.section("generator"), "generator"),
                         options);
  } else {
    result = ap_classify(io::log_signal_from_json(ctx.section("signal"), "signal"), options);
  }
  ctx.write("report.json", io::dump(io::to_json(result)));
  for (std::size_t k = 0; k < result.per_epsilon.size(); ++k) {
    ctx.write("translation_" + std::to_string(k + 1) + ".csv",
              io::to_csv(result.per_epsilon[k].report));
  }
  std::cout << (result.ap_evidence ? "AP_EVIDENCE" : "NO_AP_EVIDENCE") << "\n";
  return kOk;
}

int cmd_transform(const Context& ctx) {
  std::string direction = ctx.flags.direction;
  if (direction.empty() && ctx.config.contains("direction") &&
      ctx.config["direction"].is_string()) {
    direction = ctx.config["direction"].get<std::string>();
  }
  const Json input = ctx.section("input");
  const std::string output = ctx.config.contains("output") && ctx.config["output"].is_string()
                                 ? ctx.config["output"].get<std::string>()
                                 : direction + "ed.json";
  if (direction == "lift") {
    const GridFunction f = io::grid_function_from_json(input, "input");
    check_transform_window(f.lattice().window());
    ctx.write(output, io::dump(io::to_json(lift(f))));
  } else if (direction == "lower") {
    const LogSignal s = io::log_signal_from_json(input, "input");
    const auto q = ctx.q();
    if (!q) throw ParseError("missing field 'q' (needed to lower)");
    if (!(*q > 1.0)) throw ParseError("field 'q' must be > 1");
    check_transform_window(s.range());
    ctx.write(output, io::dump(io::to_json(lower(s, *q))));
  } else {
    throw ParseError("field 'direction' must be lift or lower");
  }
  std::cout << "wrote " << ctx.out_path(output) << "\n";
  return kOk;
}

int cmd_solve(const Context& ctx) {
  io::SystemSpec spec = io::system_spec_from_json(ctx.section("system"), "system");
  if (ctx.flags.q) spec.q = ctx.flags.q;
  const std::int64_t n_end = io::as_int(io::require(ctx.config, "n_end", ""), "n_end");

  LogSignal history(0, 0, spec.dim);
  if (ctx.config.contains("history")) {
    history = io::log_signal_from_json(ctx.config["history"], "history");
  } else {
    const State x0 = io::as_state(io::require(ctx.config, "x0", ""), "x0");
    const std::int64_t n0 =
        ctx.config.contains("n0") ? io::as_int(ctx.config["n0"], "n0") : 0;
    history = LogSignal::constant({n0 - spec.delay.max(), n0}, x0);
  }
  if (history.dim() != spec.dim) throw ParseError("field 'history' has wrong dimension");
  if (n_end < history.n_max()) throw ParseError("field 'n_end' precedes the history end");

  Json report;
  report["scale"] = spec.scale == io::SystemSpec::Scale::kLog ? "log" : "quantum";
  report["n0"] = history.n_max();
  report["n_end"] = n_end;
  report["dim"] = spec.dim;
  if (spec.scale == io::SystemSpec::Scale::kQuantum) {
    if (!spec.q) throw ParseError("missing field 'system.q' (quantum scale)");
    check_transform_window({history.n_min(), n_end});
    const QuantumSystem sys = spec.quantum_system();
    const GridFunction x = solve_forward(sys, lower(history, *spec.q), n_end);
    ctx.write("trajectory.csv", io::trajectory_csv(x));
    report["residual"] = trajectory_residual(to_log_system(sys, *spec.q), lift(x));
    report["final_state"] = State(x.at(n_end).begin(), x.at(n_end).end());
  } else {
    const DynamicSystem sys = spec.log_system();
    const LogSignal x = solve_forward(sys, history, n_end);
    ctx.write("trajectory.csv", io::trajectory_csv(x, spec.q));
    report["residual"] = trajectory_residual(sys, x);
    report["final_state"] = State(x.at(n_end).begin(), x.at(n_end).end());
  }
  ctx.write("report.json", io::dump(report));
  std::cout << "residual " << io::format_double(report["residual"].get<double>()) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct HopfieldRun {
  HopfieldSpec spec;
  IndexRange window{-50, 50};
  std::optional<double> r0;
  PicardOptions picard;
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  ClassifyOptions classify;
};

HopfieldRun hopfield_run(const Context& ctx) {
  HopfieldRun run;
  run.spec = io::hopfield_spec_from_json(ctx.section("network"), "network");
  if (ctx.flags.q) run.spec.q = ctx.flags.q;
  if (auto w = ctx.window()) run.window = *w;
  run.r0 = ctx.number("r0");
  if (auto tol = ctx.flags.tol ? ctx.flags.tol : ctx.number("tol")) run.picard.tol = *tol;
  if (auto t = ctx.number("tail_tol")) run.picard.tail_tol = *t;
  if (ctx.config.contains("max_iter")) {
    run.picard.max_iter = static_cast<int>(io::as_int(ctx.config["max_iter"], "max_iter"));
  }
  if (ctx.config.contains("seed")) {
    run.seed = static_cast<std::uint64_t>(io::as_int(ctx.config["seed"], "seed"));
  }
  if (ctx.flags.seed) run.seed = *ctx.flags.seed;
  if (ctx.config.contains("samples")) {
    run.samples = static_cast<std::size_t>(io::as_int(ctx.config["samples"], "samples"));
  }
  if (ctx.config.contains("classify")) {
    const Json& c = ctx.config["classify"];
    if (c.contains("epsilons")) {
      run.classify.epsilons = io::as_state(c["epsilons"], "classify.epsilons");
    }
    if (c.contains("tau_range")) {
      run.classify.tau_range = io::as_range(c["tau_range"], "classify.tau_range");
    }
  }
  run.picard.window = run.window;
  return run;
}

// r0 from the config, else the smallest feasible grid point, else 1.
double choose_r0(const HopfieldRun& run, const R0GridSearch& grid) {
  if (run.r0) return *run.r0;
  return grid.first.value_or(1.0);
}

int cmd_hopfield(const Context& ctx, const std::string& mode) {
  const HopfieldRun run = hopfield_run(ctx);
  const R0GridSearch grid = r0_grid_search(run.spec, run.window);
  const double r0 = choose_r0(run, grid);
  const ContractionCertificate cert = certificate(run.spec, r0, run.window);

  Json report;
  report["certificate"] = io::to_json(cert);
  report["r0_interval"] = io::to_json(feasible_r0_interval(run.spec, run.window));
  report["r0_grid"] = io::to_json(grid);
  report["spot_check"] =
      io::to_json(spot_check_activations(run.spec, run.seed, run.samples));

  if (mode == "check") {
    ctx.write("certificate.json", io::dump(report));
    std::cout << (cert.feasible() ? "FEASIBLE" : "INFEASIBLE") << "\n";
    return kOk;
  }
  if (!cert.feasible()) {
    ctx.write("certificate.json", io::dump(report));
    std::cerr << "infeasible certificate at r0 = " << io::format_double(r0) << "\n";
    return kInfeasible;
  }

  PicardOptions options = run.picard;
  options.r0 = r0;
  const PicardResult result = picard_solve(run.spec, options);
  const LogSignal& sol = result.solution;
  const IndexRange check{run.window.lo, run.window.hi - 1};
  report["tail_steps"] = result.tail_steps;
  report["convergence"] = io::to_json(result.log);
  report["residual"] = residual(sol, run.spec, check);
  report["residual_bound"] =
      residual_constant(result.certificate) * (options.tol + options.tail_tol);
  report["ap"] = io::to_json(ap_classify(sol, fitted_options(sol.range(), run.classify)));

  ctx.write("solution_log.csv", io::trajectory_csv(sol, run.spec.q));
  if (run.spec.q) {
    const GridFunction xq = back_to_quantum(sol, *run.spec.q);
    ctx.write("solution_quantum.csv", io::trajectory_csv(xq));
    const std::vector<double> qres = quantum_residuals(xq, run.spec, check);
    report["quantum_residual_max"] =
        qres.empty() ? 0.0 : *std::max_element(qres.begin(), qres.end());
  }
  ctx.write("report.json", io::dump(report));
  std::cout << "converged in " << result.log.deltas.size() << " iterations, residual "
            << io::format_double(report["residual"].get<double>()) << "\n";
  return kOk;
}

int dispatch(const std::string& command, const Flags& flags) {
  Context ctx;
  ctx.flags = flags;
  if (!flags.config.empty()) {
    ctx.config = io::read_json(flags.config);
    ctx.base = std::filesystem::path(flags.config).parent_path();
  } else {
    ctx.config = Json::object();
  }
  if (!ctx.config.is_object()) throw ParseError("config must be an object");
  std::filesystem::create_directories(flags.out);
  if (command == "analyze") return cmd_analyze(ctx);
  if (command == "transform") return cmd_transform(ctx);
  if (command == "solve") return cmd_solve(ctx);
  if (command == "hopfield check") return cmd_hopfield(ctx, "check");
  return cmd_hopfield(ctx, "solve");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"qtime: calculus, almost periodicity and Hopfield networks on q^Z"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "JSON config file");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--q", flags.q, "scale parameter q > 1");
  app.add_option("--window", flags.window, "index window A..B");
  app.add_option("--seed", flags.seed, "seed for sampled checks");
  app.add_option("--tol", flags.tol, "solver tolerance");

  auto* analyze = app.add_subcommand("analyze", "translation sets and AP evidence");
  auto* transform = app.add_subcommand("transform", "lift or lower a signal file");
  transform->add_option("direction", flags.direction, "lift or lower")
      ->check(CLI::IsMember({"lift", "lower"}));
  auto* solve = app.add_subcommand("solve", "step a delayed system forward");
  auto* hopfield = app.add_subcommand("hopfield", "Hopfield network certificate/solver");
  hopfield->require_subcommand(1);
  auto* check = hopfield->add_subcommand("check", "contraction certificate");
  auto* hsolve = hopfield->add_subcommand("solve", "Picard solution and reports");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  std::string command;
  if (analyze->parsed()) command = "analyze";
  if (transform->parsed()) command = "transform";
  if (solve->parsed()) command = "solve";
  if (check->parsed()) command = "hopfield check";
  if (hsolve->parsed()) command = "hopfield solve";

  try {
    return dispatch(command, flags);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const OverflowGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOverflowGuard;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (first bad index " << e.first_bad_index()
              << ")\n";
    return kDivergence;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const RegressivityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args);
}

}  // namespace qtime::cli
