#pragma once

// Experiment configuration: a flat `key = value` file with `#` comments,
// overridable key by key from the command line. Every command declares its
// own defaults; unknown keys and malformed values raise ConfigError before
// any computation starts.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcl/kernels.hpp"
#include "dcl/multipliers.hpp"
#include "dcl/oscint.hpp"
#include "dcl/rationals.hpp"

namespace dcl {

/// Raw key/value pairs in insertion-independent (sorted) order.
class RawConfig {
 public:
  /// Parses `key = value` lines. Blank lines and text after `#` are ignored.
  static RawConfig parse(const std::string& text);
  static RawConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
  std::string command;

  std::string kernel = "sign";
  int kernel_index = 0;
  int d = 1;
  int n = 1;
  double eps1 = 1.0 / 64.0;
  double eps2 = 1.0 / 32.0;
  CutoffSpec cutoff;
  QuadratureSpec quad;

  int j_min = 1;
  int j_max = 1;
  int s_max = 1;
  std::int64_t q_max = 1;
  std::int64_t q_max_2d = 1;  // cap used when n = 2
  int d_max = 1;
  int n_max = 1;
  int J_min = 1;
  int J_max = 1;
  std::int64_t N = 0;  // 0 selects 2^(j+3)
  std::int64_t M = 1;
  int samples = 1;
  int trials = 1;
  std::int64_t radius = 1;
  std::int64_t w_max = 0;
  double tol = 1e-9;
  double lambda_exp_lo = 0.0;
  double lambda_exp_hi = 0.0;
  double xi_exp_lo = 0.0;
  double xi_exp_hi = 0.0;
  double grid_step = 1.0;
  int refine = 2;
  bool dump = false;
  std::string suite = "all";
  std::string fault = "none";

  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out = "out";

  /// Command defaults, then the raw values on top. Throws ConfigError.
  static ExperimentConfig resolve(const std::string& command, const RawConfig& raw);
  /// Checks cross-field preconditions of the command. Throws ConfigError.
  void validate() const;

  KernelFamily family() const;
  ArcParams arc_params() const;
  /// The resolved configuration as sorted `key = value` lines, without the
  /// worker count and output path (which must not change emitted bytes).
  std::string dump_text() const;
};

/// Commands understood by resolve().
const std::vector<std::string>& command_names();

}  // namespace dcl
