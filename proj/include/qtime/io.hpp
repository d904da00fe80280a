#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtime/apgen.hpp"
#include "qtime/core.hpp"
#include "qtime/dynamics.hpp"
#include "qtime/hopfield.hpp"
#include "qtime/logmap.hpp"
#include "qtime/qlattice.hpp"

namespace qtime::io {

using Json = nlohmann::ordered_json;

/// Pretty JSON with doubles as 17-significant-digit decimals; flat objects
/// and arrays of scalars stay on one line. Ends with a newline.
std::string dump(const Json& j);

/// Throws ParseError.
Json parse(const std::string& text, const std::string& source = "<input>");
Json read_json(const std::string& path);
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

std::string format_double(double v);

// Field access that reports the offending path in ParseError messages.
const Json& require(const Json& j, const std::string& key, const std::string& path);
double as_double(const Json& j, const std::string& path);
std::int64_t as_int(const Json& j, const std::string& path);
State as_state(const Json& j, const std::string& path);
IndexRange as_range(const Json& j, const std::string& path);
/// "A..B" as used on the command line.
IndexRange parse_range(const std::string& text);

// Signals.
Json to_json(const GridFunction& f);
Json to_json(const LogSignal& s);
GridFunction grid_function_from_json(const Json& j, const std::string& path = "");
LogSignal log_signal_from_json(const Json& j, const std::string& path = "");

// Generators and translation analysis.
Json to_json(const ApGenerator& g);
ApGenerator ap_generator_from_json(const Json& j, const std::string& path = "");
Json to_json(const TranslationReport& r);
std::string to_csv(const TranslationReport& r);
Json to_json(const ApClassification& c);

// Trajectories: columns n, t (when q is known), x_1..x_m.
std::string trajectory_csv(const LogSignal& x, std::optional<double> q = std::nullopt);
std::string trajectory_csv(const GridFunction& x);

// Hopfield networks.
HopfieldSpec hopfield_spec_from_json(const Json& j, const std::string& path = "");
Json to_json(const HopfieldSpec& spec);
Json to_json(const ContractionCertificate& cert);
Json to_json(const R0Interval& r);
Json to_json(const R0GridSearch& g);
Json to_json(const ActivationCheck& c);
Json to_json(const ConvergenceLog& log);

/// Data description of the systems the solve subcommand runs:
///   rhs_i(n) = sum_j A_ij(n) x_j(n) + sum_j C_ij(n) tanh(x_j(n - d(n))) + u_i(n)
/// read either on Z directly (scale "log") or as a quantum-scale right-hand
/// side D_q x = rhs that is transformed with (q-1) q^n (scale "quantum").
struct SystemSpec {
  enum class Scale { kLog, kQuantum };

  std::size_t dim = 1;
  Scale scale = Scale::kLog;
  std::optional<double> q;
  std::vector<ApGenerator> A;  // dim*dim
  std::vector<ApGenerator> C;  // dim*dim, may be empty
  std::vector<ApGenerator> u;  // dim, may be empty
  DelaySequence delay;

  DynamicSystem log_system() const;
  QuantumSystem quantum_system() const;
};

SystemSpec system_spec_from_json(const Json& j, const std::string& path = "");

}  // namespace qtime::io
