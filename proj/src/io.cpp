#include "qtime/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qtime::io {

// ---------------------------------------------------------------------------
// Text

std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("format_double: non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_flat(const Json& j) {
  if (j.is_array()) {
    for (const Json& e : j) {
      if (e.is_structured()) return false;
    }
    return true;
  }
  if (j.is_object()) {
    for (const auto& [k, e] : j.items()) {
      if (e.is_object()) return false;
      if (e.is_array() && !is_flat(e)) return false;
    }
    return true;
  }
  return true;
}

void write(std::string& out, const Json& j, int indent, bool inline_mode) {
  switch (j.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::string:
      out += j.dump();
      return;
    default:
      break;
  }
  const bool array = j.is_array();
  if (j.empty()) {
    out += array ? "[]" : "{}";
    return;
  }
  const bool one_line = inline_mode || is_flat(j);
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  out += array ? "[" : "{";
  bool first = true;
  for (const auto& [key, e] : j.items()) {
    if (!first) out += ",";
    first = false;
    if (one_line) {
      if (out.back() == ',') out += " ";
    } else {
      out += "\n" + pad;
    }
    if (!array) out += Json(key).dump() + ": ";
    write(out, e, indent + 2, one_line);
  }
  if (!one_line) out += "\n" + std::string(static_cast<std::size_t>(indent), ' ');
  out += array ? "]" : "}";
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  write(out, j, 0, false);
  out += "\n";
  return out;
}

Json parse(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::string& path) { return parse(read_text(path), path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Field access

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at_index(const std::string& path, std::size_t k) {
  return path + "[" + std::to_string(k) + "]";
}

const Json& require_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError("field '" + path + "' must be an array");
  return j;
}

}  // namespace

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ParseError("field '" + (path.empty() ? "<root>" : path) +
                                       "' must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field '" + join(path, key) + "'");
  return *it;
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError("field '" + path + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError("field '" + path + "' must be finite");
  return v;
}

std::int64_t as_int(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) {
      return static_cast<std::int64_t>(v);
    }
  }
  throw ParseError("field '" + path + "' must be an integer");
}

State as_state(const Json& j, const std::string& path) {
  require_array(j, path);
  State s;
  for (std::size_t k = 0; k < j.size(); ++k) s.push_back(as_double(j[k], at_index(path, k)));
  return s;
}

IndexRange as_range(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw ParseError("field '" + path + "' must be a pair [lo, hi]");
  }
  const IndexRange r{as_int(j[0], at_index(path, 0)), as_int(j[1], at_index(path, 1))};
  if (r.empty()) throw ParseError("field '" + path + "' is an empty range");
  return r;
}

IndexRange parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ParseError("--window must look like A..B");
  try {
    std::size_t used = 0;
    const std::string a = text.substr(0, dots);
    const std::string b = text.substr(dots + 2);
    const IndexRange r{std::stoll(a, &used), 0};
    if (used != a.size()) throw ParseError("--window must look like A..B");
    const std::int64_t hi = std::stoll(b, &used);
    if (used != b.size()) throw ParseError("--window must look like A..B");
    if (hi < r.lo) throw ParseError("--window is empty");
    return {r.lo, hi};
  } catch (const std::logic_error&) {
    throw ParseError("--window must look like A..B");
  }
}

// ---------------------------------------------------------------------------
// Signals

namespace {

Json state_json(StateView x) {
  Json a = Json::array();
  for (double v : x) a.push_back(v);
  return a;
}

Json rows_json(std::int64_t n_min, std::int64_t n_max, std::size_t dim,
               std::span<const double> data) {
  Json rows = Json::array();
  for (std::int64_t n = n_min; n <= n_max; ++n) {
    rows.push_back({{"n", n},
                    {"value", state_json(data.subspan(
                                  static_cast<std::size_t>(n - n_min) * dim, dim))}});
  }
  return rows;
}

struct Rows {
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  std::optional<State> zero_value;
};

Rows rows_from_json(const Json& j, const std::string& path) {
  Rows r;
  r.n_min = as_int(require(j, "n_min", path), join(path, "n_min"));
  r.n_max = as_int(require(j, "n_max", path), join(path, "n_max"));
  const std::int64_t dim = as_int(require(j, "dim", path), join(path, "dim"));
  if (dim < 1) throw ParseError("field '" + join(path, "dim") + "' must be >= 1");
  if (r.n_max < r.n_min) throw ParseError("field '" + join(path, "n_max") + "' < n_min");
  r.dim = static_cast<std::size_t>(dim);
  const std::string rows_path = join(path, "rows");
  const Json& rows = require_array(require(j, "rows", path), rows_path);
  const auto expected = static_cast<std::size_t>(r.n_max - r.n_min + 1);
  if (rows.size() != expected) {
    throw ParseError("field '" + rows_path + "' must have " + std::to_string(expected) +
                     " rows");
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string rp = at_index(rows_path, k);
    const std::int64_t n = as_int(require(rows[k], "n", rp), join(rp, "n"));
    if (n != r.n_min + static_cast<std::int64_t>(k)) {
      throw ParseError("field '" + join(rp, "n") + "' out of sequence");
    }
    const State v = as_state(require(rows[k], "value", rp), join(rp, "value"));
    if (v.size() != r.dim) throw ParseError("field '" + join(rp, "value") + "' has wrong length");
    r.values.insert(r.values.end(), v.begin(), v.end());
  }
  if (j.contains("zero_value")) {
    r.zero_value = as_state(j["zero_value"], join(path, "zero_value"));
    if (r.zero_value->size() != r.dim) {
      throw ParseError("field '" + join(path, "zero_value") + "' has wrong length");
    }
  }
  return r;
}

}  // namespace

Json to_json(const GridFunction& f) {
  const QLattice& lat = f.lattice();
  Json j;
  if (lat.is_quantum()) {
    j["q"] = lat.q();
  } else {
    j["lattice"] = "integer";
  }
  j["n_min"] = lat.n_min();
  j["n_max"] = lat.n_max();
  j["dim"] = f.dim();
  j["rows"] = rows_json(lat.n_min(), lat.n_max(), f.dim(), f.data());
  if (f.zero_value()) j["zero_value"] = state_json(*f.zero_value());
  return j;
}

Json to_json(const LogSignal& s) {
  Json j;
  j["n_min"] = s.n_min();
  j["n_max"] = s.n_max();
  j["dim"] = s.dim();
  j["rows"] = rows_json(s.n_min(), s.n_max(), s.dim(), s.data());
  if (s.ninf_value()) j["zero_value"] = state_json(*s.ninf_value());
  return j;
}

GridFunction grid_function_from_json(const Json& j, const std::string& path) {
  Rows r = rows_from_json(j, path);
  const bool integer = j.contains("lattice") && j["lattice"] == "integer";
  try {
    if (integer) {
      return GridFunction(QLattice::integer(r.n_min, r.n_max, r.zero_value.has_value()),
                          r.dim, std::move(r.values), std::move(r.zero_value));
    }
    const double q = as_double(require(j, "q", path), join(path, "q"));
    return GridFunction(QLattice::quantum(q, r.n_min, r.n_max, r.zero_value.has_value()),
                        r.dim, std::move(r.values), std::move(r.zero_value));
  } catch (const std::invalid_argument& e) {
    throw ParseError("field '" + join(path, integer ? "rows" : "q") + "': " + e.what());
  }
}

LogSignal log_signal_from_json(const Json& j, const std::string& path) {
  Rows r = rows_from_json(j, path);
  try {
    return LogSignal(r.n_min, r.n_max, r.dim, std::move(r.values), std::move(r.zero_value));
  } catch (const std::invalid_argument& e) {
    throw ParseError("field '" + join(path, "rows") + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Generators and translation reports

namespace {

Component component_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return Component{as_double(j, path), {}};
  Component c;
  c.offset = j.contains("offset") ? as_double(j["offset"], join(path, "offset")) : 0.0;
  if (j.contains("terms")) {
    const std::string tp = join(path, "terms");
    const Json& terms = require_array(j["terms"], tp);
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const std::string p = at_index(tp, k);
      Term t;
      t.amp = as_double(require(terms[k], "amp", p), join(p, "amp"));
      t.freq = as_double(require(terms[k], "freq", p), join(p, "freq"));
      t.phase = terms[k].contains("phase")
                    ? as_double(terms[k]["phase"], join(p, "phase"))
                    : 0.0;
      c.terms.push_back(t);
    }
  } else if (!j.is_object()) {
    throw ParseError("field '" + path + "' must be a number or {offset, terms}");
  }
  return c;
}

Json component_json(const Component& c) {
  Json terms = Json::array();
  for (const Term& t : c.terms) {
    terms.push_back({{"amp", t.amp}, {"freq", t.freq}, {"phase", t.phase}});
  }
  return {{"offset", c.offset}, {"terms", terms}};
}

// Scalar coefficient: a number, or {offset, terms}.
ApGenerator scalar_gen_from_json(const Json& j, const std::string& path) {
  return ApGenerator({component_from_json(j, path)});
}

Json scalar_gen_json(const ApGenerator& g) {
  const Component& c = g.components().front();
  if (c.terms.empty() && g.gain() == 1.0) return c.offset;
  Json j = component_json(c);
  if (g.gain() != 1.0) j["gain"] = g.gain();
  if (g.shift() != 0) j["shift"] = g.shift();
  return j;
}

}  // namespace

Json to_json(const ApGenerator& g) {
  Json comps = Json::array();
  for (const Component& c : g.components()) comps.push_back(component_json(c));
  Json j;
  j["dim"] = g.dim();
  j["components"] = comps;
  if (g.zero_limit()) j["zero_limit"] = state_json(*g.zero_limit());
  if (g.shift() != 0) j["shift"] = g.shift();
  if (g.gain() != 1.0) j["gain"] = g.gain();
  return j;
}

ApGenerator ap_generator_from_json(const Json& j, const std::string& path) {
  const std::string cp = join(path, "components");
  const Json& comps = require_array(require(j, "components", path), cp);
  std::vector<Component> out;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    out.push_back(component_from_json(comps[k], at_index(cp, k)));
  }
  if (j.contains("dim") &&
      as_int(j["dim"], join(path, "dim")) != static_cast<std::int64_t>(out.size())) {
    throw ParseError("field '" + join(path, "dim") + "' does not match components");
  }
  std::optional<State> zero;
  if (j.contains("zero_limit")) zero = as_state(j["zero_limit"], join(path, "zero_limit"));
  try {
    ApGenerator g(std::move(out), std::move(zero));
    if (j.contains("shift")) g = g.with_shift(as_int(j["shift"], join(path, "shift")));
    if (j.contains("gain")) g = g.with_gain(as_double(j["gain"], join(path, "gain")));
    return g;
  } catch (const std::invalid_argument& e) {
    throw ParseError("field '" + cp + "': " + e.what());
  }
}

Json to_json(const TranslationReport& r) {
  Json j;
  j["epsilon"] = r.epsilon;
  j["mode"] = std::string(to_string(r.mode));
  j["tau_range"] = {r.tau_range.lo, r.tau_range.hi};
  j["window"] = {r.window.lo, r.window.hi};
  j["member_count"] = r.members.size();
  j["members"] = r.members;
  j["inclusion_length"] =
      r.inclusion_length ? Json(*r.inclusion_length) : Json(nullptr);
  j["relatively_dense"] = relatively_dense(r);
  return j;
}

std::string to_csv(const TranslationReport& r) {
  std::string out = "tau,sup_diff,member_flag\n";
  for (std::int64_t tau = r.tau_range.lo; tau <= r.tau_range.hi; ++tau) {
    const double d = r.sup_diff_at(tau);
    out += std::to_string(tau) + "," + format_double(d) + "," +
           (d < r.epsilon ? "1" : "0") + "\n";
  }
  return out;
}

Json to_json(const ApClassification& c) {
  Json per = Json::array();
  for (const EpsilonVerdict& v : c.per_epsilon) per.push_back(to_json(v.report));
  Json j;
  j["verdict"] = c.ap_evidence ? "AP_EVIDENCE" : "NO_AP_EVIDENCE";
  j["note"] = std::string(ApClassification::kNote);
  j["per_epsilon"] = per;
  return j;
}

// ---------------------------------------------------------------------------
// Trajectories

std::string trajectory_csv(const LogSignal& x, std::optional<double> q) {
  std::string out = "n";
  if (q) out += ",t";
  for (std::size_t c = 0; c < x.dim(); ++c) out += ",x_" + std::to_string(c + 1);
  out += "\n";
  for (std::int64_t n = x.n_min(); n <= x.n_max(); ++n) {
    out += std::to_string(n);
    if (q) out += "," + format_double(qpow(*q, n));
    for (double v : x.at(n)) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::string trajectory_csv(const GridFunction& x) {
  const QLattice& lat = x.lattice();
  return trajectory_csv(lift(x),
                        lat.is_quantum() ? std::optional<double>(lat.q()) : std::nullopt);
}

// ---------------------------------------------------------------------------
// Hopfield

namespace {

DelaySequence int_gen_from_json(const Json& j, const std::string& path) {
  std::vector<std::int64_t> cycle;
  if (j.is_number()) {
    cycle.push_back(as_int(j, path));
  } else {
    const std::string cp = join(path, "cycle");
    const Json& c = require_array(require(j, "cycle", path), cp);
    for (std::size_t k = 0; k < c.size(); ++k) cycle.push_back(as_int(c[k], at_index(cp, k)));
  }
  try {
    return DelaySequence(std::move(cycle));
  } catch (const std::invalid_argument& e) {
    throw ParseError("field '" + path + "': " + e.what());
  }
}

Json int_gen_json(const DelaySequence& d) {
  if (d.cycle().size() == 1) return d.cycle().front();
  return {{"cycle", d.cycle()}};
}

// Reads a nested array of the given depth into a flat row-major vector.
template <typename T, typename Fn>
std::vector<T> nested(const Json& j, const std::string& path, std::size_t m,
                      int depth, Fn read) {
  std::vector<T> out;
  require_array(j, path);
  if (j.size() != m) {
    throw ParseError("field '" + path + "' must have " + std::to_string(m) + " entries");
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (depth == 1) {
      out.push_back(read(j[k], at_index(path, k)));
    } else {
      auto inner = nested<T>(j[k], at_index(path, k), m, depth - 1, read);
      out.insert(out.end(), inner.begin(), inner.end());
    }
  }
  return out;
}

template <typename T, typename Fn>
Json nested_json(const std::vector<T>& flat, std::size_t m, int depth, std::size_t base,
                 Fn write) {
  Json a = Json::array();
  std::size_t stride = 1;
  for (int d = 1; d < depth; ++d) stride *= m;
  for (std::size_t k = 0; k < m; ++k) {
    if (depth == 1) {
      a.push_back(write(flat[base + k]));
    } else {
      a.push_back(nested_json(flat, m, depth - 1, base + k * stride, write));
    }
  }
  return a;
}

PiecewiseLinear table_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  std::vector<std::pair<double, double>> knots;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = at_index(path, k);
    if (!j[k].is_array() || j[k].size() != 2) {
      throw ParseError("field '" + p + "' must be a pair [u, value]");
    }
    knots.emplace_back(as_double(j[k][0], at_index(p, 0)), as_double(j[k][1], at_index(p, 1)));
  }
  try {
    return PiecewiseLinear(std::move(knots));
  } catch (const std::invalid_argument& e) {
    throw ParseError("field '" + path + "': " + e.what());
  }
}

Json table_json(const PiecewiseLinear& t) {
  Json a = Json::array();
  for (const auto& [u, v] : t.knots()) a.push_back({u, v});
  return a;
}

Activation activation_from_json(const Json& j, const std::string& path) {
  Activation a;
  const Json& kind = require(j, "kind", path);
  if (kind == "tanh") {
    a.kind = Activation::Kind::kTanh;
  } else if (kind == "custom-table") {
    a.kind = Activation::Kind::kTable;
    a.f_table = table_from_json(require(j, "f_table", path), join(path, "f_table"));
    if (j.contains("g_table")) a.g_table = table_from_json(j["g_table"], join(path, "g_table"));
  } else {
    throw ParseError("field '" + join(path, "kind") + "' must be tanh or custom-table");
  }
  auto opt = [&](const char* key, double fallback) {
    return j.contains(key) ? as_double(j[key], join(path, key)) : fallback;
  };
  a.lip_f = opt("lip_f", 1.0);
  a.lip_g = opt("lip_g", 1.0);
  a.bound_g = opt("N", 1.0);
  a.f0 = opt("f0", 0.0);
  a.g0 = opt("g0", 0.0);
  return a;
}

Json activation_json(const Activation& a) {
  Json j;
  j["kind"] = a.kind == Activation::Kind::kTanh ? "tanh" : "custom-table";
  j["lip_f"] = a.lip_f;
  j["lip_g"] = a.lip_g;
  j["N"] = a.bound_g;
  j["f0"] = a.f0;
  j["g0"] = a.g0;
  if (a.kind == Activation::Kind::kTable) {
    j["f_table"] = table_json(a.f_table);
    if (!a.g_table.empty()) j["g_table"] = table_json(a.g_table);
  }
  return j;
}

}  // namespace

HopfieldSpec hopfield_spec_from_json(const Json& j, const std::string& path) {
  const std::int64_t m = as_int(require(j, "m", path), join(path, "m"));
  if (m < 1) throw ParseError("field '" + join(path, "m") + "' must be >= 1");
  HopfieldSpec spec = HopfieldSpec::zeros(static_cast<std::size_t>(m), 0.5);
  const auto mm = static_cast<std::size_t>(m);
  if (j.contains("q") && !j["q"].is_null()) {
    spec.q = as_double(j["q"], join(path, "q"));
    if (!(*spec.q > 1.0)) throw ParseError("field '" + join(path, "q") + "' must be > 1");
  }
  spec.c_hat = nested<ApGenerator>(require(j, "c_hat", path), join(path, "c_hat"), mm, 1,
                                   scalar_gen_from_json);
  if (j.contains("a_hat")) {
    spec.a_hat = nested<ApGenerator>(j["a_hat"], join(path, "a_hat"), mm, 2,
                                     scalar_gen_from_json);
  }
  if (j.contains("b_hat")) {
    spec.b_hat = nested<ApGenerator>(j["b_hat"], join(path, "b_hat"), mm, 3,
                                     scalar_gen_from_json);
  }
  if (j.contains("I_hat")) {
    spec.I_hat = nested<ApGenerator>(j["I_hat"], join(path, "I_hat"), mm, 1,
                                     scalar_gen_from_json);
  }
  if (j.contains("activations")) {
    spec.activations = nested<Activation>(j["activations"], join(path, "activations"), mm,
                                          1, activation_from_json);
  }
  if (j.contains("delays")) {
    const Json& d = j["delays"];
    const std::string dp = join(path, "delays");
    if (d.contains("gamma")) {
      spec.gamma = nested<DelaySequence>(d["gamma"], join(dp, "gamma"), mm, 2, int_gen_from_json);
    }
    if (d.contains("omega")) {
      spec.omega = nested<DelaySequence>(d["omega"], join(dp, "omega"), mm, 3, int_gen_from_json);
    }
    if (d.contains("v")) {
      spec.v = nested<DelaySequence>(d["v"], join(dp, "v"), mm, 3, int_gen_from_json);
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("field '") + (path.empty() ? "<root>" : path) + "': " +
                     e.what());
  }
  return spec;
}

Json to_json(const HopfieldSpec& spec) {
  const std::size_t m = spec.m;
  Json j;
  j["m"] = m;
  j["q"] = spec.q ? Json(*spec.q) : Json(nullptr);
  j["c_hat"] = nested_json(spec.c_hat, m, 1, 0, scalar_gen_json);
  j["a_hat"] = nested_json(spec.a_hat, m, 2, 0, scalar_gen_json);
  j["b_hat"] = nested_json(spec.b_hat, m, 3, 0, scalar_gen_json);
  j["I_hat"] = nested_json(spec.I_hat, m, 1, 0, scalar_gen_json);
  j["activations"] = nested_json(spec.activations, m, 1, 0, activation_json);
  j["delays"] = {{"gamma", nested_json(spec.gamma, m, 2, 0, int_gen_json)},
                 {"omega", nested_json(spec.omega, m, 3, 0, int_gen_json)},
                 {"v", nested_json(spec.v, m, 3, 0, int_gen_json)}};
  return j;
}

Json to_json(const ContractionCertificate& cert) {
  const double max_eta_bar =
      *std::max_element(cert.eta_bar.begin(), cert.eta_bar.end());
  const double min_c = *std::min_element(cert.c_minus.begin(), cert.c_minus.end());
  Json j;
  j["r0"] = cert.r0;
  j["window"] = {cert.window.lo, cert.window.hi};
  j["c_minus"] = cert.c_minus;
  j["c_plus"] = cert.c_plus;
  j["c_window_min"] = cert.c_window_min;
  j["a_plus"] = cert.a_plus;
  j["b_plus"] = cert.b_plus;
  j["I_plus"] = cert.I_plus;
  j["eta"] = cert.eta;
  j["eta_bar"] = cert.eta_bar;
  j["L"] = cert.L;
  j["rho"] = cert.rho;
  j["H4_ball"] = {{"lhs", cert.ball_lhs}, {"r0", cert.r0}, {"ok", cert.ball_ok}};
  j["H4_contraction"] = {{"max_eta_bar", max_eta_bar},
                         {"min_c_minus", min_c},
                         {"ok", cert.contraction_ok}};
  j["feasible"] = cert.feasible();
  return j;
}

Json to_json(const R0Interval& r) {
  Json j;
  j["contraction_ok"] = r.contraction_ok;
  j["empty"] = r.empty();
  j["lo"] = r.lo ? Json(*r.lo) : Json(nullptr);
  j["hi"] = r.hi ? Json(*r.hi) : Json(nullptr);
  j["unbounded"] = r.unbounded;
  return j;
}

Json to_json(const R0GridSearch& g) {
  Json j;
  j["grid"] = {1e-3, 1e3};
  j["points"] = g.points;
  j["feasible_points"] = g.feasible_points;
  j["first"] = g.first ? Json(*g.first) : Json(nullptr);
  j["last"] = g.last ? Json(*g.last) : Json(nullptr);
  return j;
}

Json to_json(const ActivationCheck& c) {
  Json j;
  j["samples"] = c.samples;
  j["pass"] = c.pass();
  j["violations"] = c.violations;
  return j;
}

Json to_json(const ConvergenceLog& log) {
  Json j;
  j["converged"] = log.converged;
  j["iterations"] = log.deltas.size();
  j["deltas"] = log.deltas;
  return j;
}

// ---------------------------------------------------------------------------
// Systems

namespace {

State linear_tanh_rhs(const SystemSpec& s, std::int64_t n, StateView x, StateView delayed) {
  State out(s.dim, 0.0);
  for (std::size_t i = 0; i < s.dim; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s.dim; ++j) {
      sum += s.A[i * s.dim + j].eval(n, 0) * x[j];
      if (!s.C.empty()) sum += s.C[i * s.dim + j].eval(n, 0) * std::tanh(delayed[j]);
    }
    if (!s.u.empty()) sum += s.u[i].eval(n, 0);
    out[i] = sum;
  }
  return out;
}

}  // namespace

DynamicSystem SystemSpec::log_system() const {
  const SystemSpec self = *this;
  DynamicSystem sys;
  sys.dim = dim;
  sys.max_delay = delay.max();
  sys.delays.push_back([d = delay](std::int64_t n) { return d(n); });
  sys.rhs = [self](LogIndex n, StateView x, const DelayedStates& delayed) -> State {
    if (n.is_neg_inf()) return State(self.dim, 0.0);
    return linear_tanh_rhs(self, n.value(), x, delayed[0]);
  };
  return sys;
}

QuantumSystem SystemSpec::quantum_system() const {
  const SystemSpec self = *this;
  QuantumSystem sys;
  sys.dim = dim;
  sys.max_delay = delay.max();
  sys.delays.push_back([d = delay](std::int64_t n) { return d(n); });
  sys.rhs = [self](const QPoint& at, StateView x, const DelayedStates& delayed) -> State {
    if (at.n.is_neg_inf()) return State(self.dim, 0.0);
    return linear_tanh_rhs(self, at.n.value(), x, delayed[0]);
  };
  return sys;
}

SystemSpec system_spec_from_json(const Json& j, const std::string& path) {
  SystemSpec s;
  const std::int64_t dim = as_int(require(j, "dim", path), join(path, "dim"));
  if (dim < 1) throw ParseError("field '" + join(path, "dim") + "' must be >= 1");
  s.dim = static_cast<std::size_t>(dim);
  if (j.contains("scale")) {
    if (j["scale"] == "log") {
      s.scale = SystemSpec::Scale::kLog;
    } else if (j["scale"] == "quantum") {
      s.scale = SystemSpec::Scale::kQuantum;
    } else {
      throw ParseError("field '" + join(path, "scale") + "' must be log or quantum");
    }
  }
  if (j.contains("q") && !j["q"].is_null()) {
    s.q = as_double(j["q"], join(path, "q"));
    if (!(*s.q > 1.0)) throw ParseError("field '" + join(path, "q") + "' must be > 1");
  }
  s.A = nested<ApGenerator>(require(j, "A", path), join(path, "A"), s.dim, 2,
                            scalar_gen_from_json);
  if (j.contains("C")) {
    s.C = nested<ApGenerator>(j["C"], join(path, "C"), s.dim, 2, scalar_gen_from_json);
  }
  if (j.contains("u")) {
    s.u = nested<ApGenerator>(j["u"], join(path, "u"), s.dim, 1, scalar_gen_from_json);
  }
  if (j.contains("delay")) s.delay = int_gen_from_json(j["delay"], join(path, "delay"));
  return s;
}

}  // namespace qtime::io
