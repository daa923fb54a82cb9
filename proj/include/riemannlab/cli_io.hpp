// Command-line front end and serialization: CSV tables, JSON metadata and
// SVG polylines.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "riemannlab/numerics.hpp"
#include "riemannlab/theta_sums.hpp"

namespace riemannlab {

inline constexpr const char* kVersion = "0.1.0";

enum class ParamKind { Real, Integer, Rational, RealList, IntegerList, Choice };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::Real;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // for Choice
};

struct CommandSpec {
  std::string group, verb, help;
  std::vector<ParamSpec> params;
  bool svg = false;  // accepts --svg
};

// All commands, grouped as theta, gauss, ss, nls, frame, bf, mf.
const std::vector<CommandSpec>& command_table();

struct RunConfig {
  std::string group, verb;
  // every parameter of the command in table order, raw text, defaults filled in
  std::vector<std::pair<std::string, std::string>> params;
  std::string out;  // CSV path; metadata goes to out + ".meta.json"
  std::string svg;  // optional SVG path
  std::string help;  // non-empty when --help was given: the text to print

  const std::string& raw(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  RationalTorsion rational(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;
};

class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, std::string usage_text)
      : std::runtime_error(what), usage(std::move(usage_text)) {}
  std::string usage;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// riemannlab <group> <verb> [--key value]... [--out path] [--svg path].
// Throws UsageError for unknown groups, verbs or flags and invalid values.
// With --help the returned config carries only the help text.
RunConfig parse_args(int argc, const char* const* argv);

// "a/b" with b >= 1, gcd(a, b) = 1.
RationalTorsion parse_rational(const std::string& text);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_complex_columns(const std::string& name) {
    columns.push_back(name + "_re");
    columns.push_back(name + "_im");
  }
};

// Header row, then comma-separated rows with reals at 17 significant digits.
void write_csv(const Table& table, const std::string& path);
Table read_csv(const std::string& path);

// One JSON object, keys in insertion order.
void write_json(const nlohmann::ordered_json& metadata, const std::string& path);

// One polyline in the viewBox 0 0 1 1, aspect kept, y pointing up.
void write_svg_polyline(const std::vector<std::pair<double, double>>& points, const std::string& path);

// Runs a parsed command, writing its CSV, metadata and optional SVG.
// Returns the process exit code: 0 success, 1 numerical failure (a JSON
// error report goes to err).
int run_command(const RunConfig& config, std::string& err);

// Full entry point with the exit-code contract (2 for usage errors).
int cli_main(int argc, const char* const* argv);

}  // namespace riemannlab
