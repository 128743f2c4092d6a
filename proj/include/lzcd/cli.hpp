#pragma once

// Batch front-end: flat key-value configs, named scenarios that regenerate the
// figure datasets, CSV/JSON emission.
//
// Config files hold one `key = value` per line; `#` starts a comment and a
// repeated key adds a point to that grid axis. Values from the command line
// replace a key entirely, then the config file, then the scenario default.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lzcd/models.hpp"

namespace lzcd::cli {

using ConfigMap = std::map<std::string, std::vector<std::string>>;

/// Throws ConfigError naming every malformed line.
ConfigMap parse_config(std::istream& in);
ConfigMap load_config(const std::filesystem::path& path);

/// Global flags. Unset fields fall through to the config and defaults.
struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::filesystem::path> out;
  std::optional<double> rtol;
  bool serial = false;
};

/// Accepts plain numbers and multiples of pi ("pi/2", "3*pi/4", "-pi").
double parse_angle(std::string_view text);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

struct Scenario {
  std::string name;
  std::vector<double> a, b, mu, sigma, sigma_ratio, phi, epsilon, T;
  std::vector<PulseKind> pulse;
  std::vector<ErrorKind> error_kind;
  std::vector<SweepKind> sweep;
  double c = 1.0;  // Tan sweep shape parameter (the sweeps scenario uses c = mu)
  std::size_t samples = 1000;
  std::uint64_t seed = 7;
  double rtol = 1e-9;
  bool optimize = false;  // golden-section b* instead of b* = b0(mu)
  bool serial = false;
  std::filesystem::path out = "lzcd-out";
};

const std::vector<std::string>& scenario_names();

/// Keys that parameterize the named scenario; also its CSV parameter echo.
const std::vector<std::string>& scenario_keys(std::string_view name);

Scenario default_scenario(std::string_view name);

/// Scenario default, overlaid with the config, overlaid with the flags.
/// Throws ConfigError listing every violated field.
Scenario make_scenario(std::string_view name, const ConfigMap& config = {}, const GlobalOptions& flags = {});

void validate(const Scenario& s);

/// The scenario's parameter fragment in config form (what the CSV headers echo).
ConfigMap echo(const Scenario& s);

/// Equality on the keys the scenario actually uses.
bool same_fragment(const Scenario& x, const Scenario& y);

struct FileRecord {
  std::string path;  // relative to the output root
  std::size_t bytes = 0;
  std::string fnv1a64;
  double seconds = 0.0;  // compute time of the panel
};

struct ScenarioReport {
  std::string name;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  std::vector<FileRecord> files;
};

/// Writes <out>/<name>/*.csv and <out>/<name>/manifest.json. On failure every
/// file written by this call is removed and the report carries the error.
ScenarioReport run_scenario(const Scenario& s);

struct RunAllReport {
  std::vector<ScenarioReport> scenarios;
  std::filesystem::path manifest;
  bool ok() const;
};

/// Runs every registered scenario under <out>, continuing past failures, and
/// writes <out>/manifest.json. An unusable output directory is a ConfigError
/// raised before anything is written.
RunAllReport run_all(std::uint64_t seed, const ConfigMap& config = {}, const GlobalOptions& flags = {});

/// Throws ConfigError when `dir` cannot be created or written.
void ensure_writable(const std::filesystem::path& dir);

/// `# key=value` header lines of an emitted CSV, as a config map.
ConfigMap read_csv_header(std::istream& in);

/// Rebuilds the scenario fragment echoed in a CSV header.
Scenario scenario_from_header(const ConfigMap& header);

std::string fnv1a64_hex(std::string_view data);

}  // namespace lzcd::cli
