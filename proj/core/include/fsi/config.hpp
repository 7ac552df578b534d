/// @file config.hpp
/// Plain-text configuration (`section.key = value`, `#` comments) with typed
/// defaults for every key, command-line overrides, and a canonical effective
/// listing whose FNV-1a hash is stamped into every output file. Unknown keys
/// and malformed values are rejected with the offending line number.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fsi/bench.hpp"
#include "fsi/schemes.hpp"

namespace fsi {

struct RunConfig {
  Scenario scenario;
  SchemeConfig scheme;
  double t_end = 1.0;
  StudyPlan study;
  std::vector<double> sweep_taus;
  std::vector<int> mms_ns;
  std::string output_dir = "out";
  int snapshot_interval = 0;
  int threads = 0;               ///< 0 defers to IMMERSED_FSI_THREADS / hardware

  std::string effective_text;    ///< canonical key = value listing, defaults marked
  std::uint64_t hash = 0;        ///< FNV-1a 64-bit hash of effective_text
  int defaulted_keys = 0;
};

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a(const std::string& text);

/// Load `path` (empty string: defaults only), then apply overrides in order.
/// Throws ConfigError with a line number for unknown keys, syntax errors, or
/// values that fail to convert; std::invalid_argument for semantic errors
/// detected by the typed validators.
RunConfig parse_config(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

/// Names of every accepted key, in canonical order.
std::vector<std::string> config_keys();

/// Execute one subcommand (run, sweep, converge, stokes-mms, check) with the
/// given configuration. Output files go into cfg.output_dir, always including
/// effective_config.txt. Returns the process exit code: 0 success, 1 aborted
/// or failed experiment, 2 usage errors.
int dispatch(const std::string& subcommand, const RunConfig& cfg, std::ostream& out,
             std::ostream& err);

}  // namespace fsi
