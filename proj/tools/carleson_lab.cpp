// Experiment driver: carleson_lab <command> [--config PATH] [--seed U64]
// [--workers N] [--out DIR] [--<key> VALUE ...]

#include <map>
#include <CLI11.hpp>
#include <iostream>

#include "dcl/commands.hpp"
#include "dcl/config.hpp"
#include "dcl/error.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string seed, workers, out;
  bool show_config = false;
};

/// Turns leftover `--key value` / `--key=value` tokens into overrides.
void apply_overrides(const std::vector<std::string>& extras, dcl::RawConfig& raw) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() == 2) throw dcl::ConfigError("unexpected argument '" + tok + "'");
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      raw.set(tok.substr(2, eq - 2), tok.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw dcl::ConfigError("missing value for '" + tok + "'");
      raw.set(tok.substr(2), extras[++i]);
    }
  }
}

}  // namespace

const std::map<std::string, std::string> kDescriptions = {
    {"weyl", "complete Weyl sums: orthogonality check and decay fit"},
    {"approx", "multiplier approximation error against its bound"},
    {"phi", "oscillatory integral decay constant on a dyadic grid"},
    {"arcs", "arc disjointness, factorization and error-term decay"},
    {"carleson", "maximal operator norm ratios on random inputs"},
    {"kappa", "agreement of the two TT* kernel forms"},
    {"verify", "property suites with PASS/FAIL per suite"},
};

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the discrete Carleson operator"};
  app.require_subcommand(1);
  CommonOptions opt;
  std::vector<CLI::App*> subs;
  for (const auto& name : dcl::command_names()) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->allow_extras();
    sub->add_option("--config", opt.config_path, "flat key = value configuration file");
    sub->add_option("--seed", opt.seed, "experiment seed (u64)");
    sub->add_option("--workers", opt.workers, "worker threads, 0 = hardware");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_flag("--show-config", opt.show_config, "print the resolved configuration and exit");
    sub->footer("Any configuration key may be overridden with --<key> VALUE.");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dcl::kConfigError;
  }
  try {
    CLI::App* sub = nullptr;
    for (auto* s : subs) {
      if (s->parsed()) sub = s;
    }
    dcl::RawConfig raw;
    if (!opt.config_path.empty()) raw = dcl::RawConfig::load(opt.config_path);
    apply_overrides(sub->remaining(), raw);
    if (!opt.seed.empty()) raw.set("seed", opt.seed);
    if (!opt.workers.empty()) raw.set("workers", opt.workers);
    if (!opt.out.empty()) raw.set("out", opt.out);
    const auto cfg = dcl::ExperimentConfig::resolve(sub->get_name(), raw);
    if (opt.show_config) {
      std::cout << cfg.dump_text();
      return 0;
    }
    return dcl::run_command(cfg, std::cout, std::cerr);
  } catch (const dcl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dcl::kConfigError;
  } catch (const dcl::DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dcl::kConfigError;
  }
}
