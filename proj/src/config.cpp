#include "dcl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dcl/error.hpp"
#include "dcl/grid_io.hpp"

namespace dcl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc{} || r.ptr != last) throw ConfigError("config: bad value for " + key + ": '" + text + "'");
  return v;
}

/// Real numbers may also be written as p/q.
double parse_real(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number<double>(key, text);
  const double num = parse_number<double>(key, trim(text.substr(0, slash)));
  const double den = parse_number<double>(key, trim(text.substr(slash + 1)));
  if (den == 0.0) throw ConfigError("config: zero denominator for " + key);
  return num / den;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + text + "'");
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Field int_field(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

template <class Owner, class T>
Field nested_int(Owner ExperimentConfig::*owner, T Owner::*member) {
  return {[=](ExperimentConfig& c, const std::string& k, const std::string& v) { (c.*owner).*member = parse_number<T>(k, v); },
          [=](const ExperimentConfig& c) { return std::to_string((c.*owner).*member); }};
}

Field real_field(double ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*member = parse_real(k, v); },
          [member](const ExperimentConfig& c) { return fmt_double(c.*member); }};
}

template <class Owner>
Field nested_real(Owner ExperimentConfig::*owner, double Owner::*member) {
  return {[=](ExperimentConfig& c, const std::string& k, const std::string& v) { (c.*owner).*member = parse_real(k, v); },
          [=](const ExperimentConfig& c) { return fmt_double((c.*owner).*member); }};
}

Field string_field(std::string ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

const std::map<std::string, Field>& fields() {
  using C = ExperimentConfig;
  static const std::map<std::string, Field> table = {
      {"kernel", string_field(&C::kernel)},
      {"kernel_index", int_field(&C::kernel_index)},
      {"d", int_field(&C::d)},
      {"n", int_field(&C::n)},
      {"eps1", real_field(&C::eps1)},
      {"eps2", real_field(&C::eps2)},
      {"cutoff_scale", nested_int(&C::cutoff, &CutoffSpec::scale_exponent)},
      {"tilde_plateau", nested_real(&C::cutoff, &CutoffSpec::tilde_plateau)},
      {"tilde_support", nested_real(&C::cutoff, &CutoffSpec::tilde_support)},
      {"quad_resolution", nested_real(&C::quad, &QuadratureSpec::resolution)},
      {"quad_min_panels", nested_int(&C::quad, &QuadratureSpec::min_panels)},
      {"quad_max_refinements", nested_int(&C::quad, &QuadratureSpec::max_refinements)},
      {"quad_abs_tol", nested_real(&C::quad, &QuadratureSpec::abs_tol)},
      {"quad_node_budget", nested_int(&C::quad, &QuadratureSpec::node_budget)},
      {"j_min", int_field(&C::j_min)},
      {"j_max", int_field(&C::j_max)},
      {"s_max", int_field(&C::s_max)},
      {"q_max", int_field(&C::q_max)},
      {"q_max_2d", int_field(&C::q_max_2d)},
      {"d_max", int_field(&C::d_max)},
      {"n_max", int_field(&C::n_max)},
      {"J_min", int_field(&C::J_min)},
      {"J_max", int_field(&C::J_max)},
      {"N", int_field(&C::N)},
      {"M", int_field(&C::M)},
      {"samples", int_field(&C::samples)},
      {"trials", int_field(&C::trials)},
      {"radius", int_field(&C::radius)},
      {"w_max", int_field(&C::w_max)},
      {"tol", real_field(&C::tol)},
      {"lambda_exp_lo", real_field(&C::lambda_exp_lo)},
      {"lambda_exp_hi", real_field(&C::lambda_exp_hi)},
      {"xi_exp_lo", real_field(&C::xi_exp_lo)},
      {"xi_exp_hi", real_field(&C::xi_exp_hi)},
      {"grid_step", real_field(&C::grid_step)},
      {"refine", int_field(&C::refine)},
      {"dump", {[](C& c, const std::string& k, const std::string& v) { c.dump = parse_bool(k, v); },
                [](const C& c) { return std::string(c.dump ? "true" : "false"); }}},
      {"suite", string_field(&C::suite)},
      {"fault", string_field(&C::fault)},
      {"seed", int_field(&C::seed)},
      {"workers", int_field(&C::workers)},
      {"out", string_field(&C::out)},
  };
  return table;
}

using Defaults = std::map<std::string, std::string>;

const std::map<std::string, Defaults>& command_defaults() {
  static const std::map<std::string, Defaults> table = {
      {"weyl", {{"q_max", "64"}}},
      {"approx", {{"j_min", "6"}, {"j_max", "11"}, {"q_max", "8"}, {"samples", "200"}}},
      {"phi",
       {{"j_min", "4"}, {"j_max", "8"}, {"lambda_exp_lo", "-24"}, {"lambda_exp_hi", "-4"},
        {"xi_exp_lo", "-11"}, {"xi_exp_hi", "-1"}, {"grid_step", "1"}, {"refine", "2"}}},
      {"arcs",
       {{"s_max", "3"}, {"samples", "10000"}, {"j_min", "6"}, {"j_max", "11"}, {"trials", "16"},
        {"tol", "1e-10"}}},
      {"carleson", {{"J_min", "6"}, {"J_max", "8"}, {"trials", "50"}, {"radius", "64"}, {"M", "4096"}}},
      {"kappa", {{"q_max", "12"}, {"q_max_2d", "8"}, {"w_max", "24"}, {"d_max", "2"}, {"n_max", "2"}}},
      {"verify", {{"suite", "all"}, {"samples", "2000"}, {"s_max", "3"}}},
  };
  return table;
}

}  // namespace

RawConfig RawConfig::parse(const std::string& text) {
  RawConfig raw;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config: line " + std::to_string(lineno) + " has an empty key");
    raw.set(key, trim(line.substr(eq + 1)));
  }
  return raw;
}

RawConfig RawConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"weyl", "approx", "phi", "arcs", "carleson", "kappa", "verify"};
  return names;
}

ExperimentConfig ExperimentConfig::resolve(const std::string& command, const RawConfig& raw) {
  const auto& defs = command_defaults();
  const auto it = defs.find(command);
  if (it == defs.end()) throw ConfigError("config: unknown command '" + command + "'");
  ExperimentConfig c;
  c.command = command;
  const auto& table = fields();
  for (const auto* source : {&it->second, &raw.values()}) {
    for (const auto& [k, v] : *source) {
      const auto f = table.find(k);
      if (f == table.end()) throw ConfigError("config: unknown key '" + k + "'");
      f->second.set(c, k, v);
    }
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  (void)family();  // kernel, kernel_index, n, d
  arc_params().validate();
  cutoff.validate(n);
  quad.validate();
  require(j_min >= 1 && j_max >= j_min, "need 1 <= j_min <= j_max");
  require(J_min >= 1 && J_max >= J_min, "need 1 <= J_min <= J_max");
  require(s_max >= 1, "s_max must be positive");
  require(q_max >= 0 && q_max_2d >= 0, "q_max must be nonnegative");
  require(d_max >= 1 && n_max >= 1 && n_max <= 2, "need d_max >= 1 and 1 <= n_max <= 2");
  require(N == 0 || (N > 0 && (N & (N - 1)) == 0), "N must be 0 or a power of two");
  require(M >= 1, "M must be positive");
  require(samples >= 0 && trials >= 1, "need samples >= 0 and trials >= 1");
  require(radius >= 0 && w_max >= 0, "radius and w_max must be nonnegative");
  require(tol > 0.0, "tol must be positive");
  require(lambda_exp_lo <= lambda_exp_hi && xi_exp_lo <= xi_exp_hi, "exponent ranges are empty");
  require(grid_step > 0.0 && refine >= 1, "need grid_step > 0 and refine >= 1");
  require(fault == "none" || fault == "shrink_tilde", "fault must be none or shrink_tilde");
  static const std::vector<std::string> suites = {"all", "partition", "phi", "disjointness", "factorization",
                                                   "kappa", "rm", "decay", "orthogonality"};
  require(std::find(suites.begin(), suites.end(), suite) != suites.end(), "unknown suite '" + suite + "'");
  require(!out.empty(), "out must name a directory");
  if (command == "weyl") require(q_max >= 1 && n <= 2, "weyl needs q_max >= 1 and n <= 2");
  if (command == "approx") require(n == 1 || n == 2, "approx supports n <= 2");
  if (command == "carleson") require(n <= 2 && J_max <= 12, "carleson supports n <= 2 and J_max <= 12");
}

KernelFamily ExperimentConfig::family() const {
  return KernelFamily::from_name(kernel, n, d, kernel_index);
}

ArcParams ExperimentConfig::arc_params() const {
  ArcParams p;
  p.eps1 = eps1;
  p.eps2 = eps2;
  p.d = d;
  p.n = n;
  return p;
}

std::string ExperimentConfig::dump_text() const {
  std::string s = "# command: " + command + "\n";
  for (const auto& [k, f] : fields()) {
    if (k == "workers" || k == "out") continue;  // must not affect emitted bytes
    s += k + " = " + f.get(*this) + "\n";
  }
  return s;
}

}  // namespace dcl
