#pragma once

// Subcommands of the experiment driver. Each writes its tables into
// config.out (created if missing) and one-line summaries to `log`; every
// emitted byte depends only on the configuration, never on the worker count.

#include <ostream>

#include "dcl/config.hpp"

namespace dcl {

/// Exit statuses shared by every command.
enum ExitStatus : int { kPass = 0, kVerifyFailed = 1, kConfigError = 2, kBudgetError = 3 };

int cmd_weyl(const ExperimentConfig& cfg, std::ostream& log);
int cmd_approx(const ExperimentConfig& cfg, std::ostream& log);
int cmd_phi(const ExperimentConfig& cfg, std::ostream& log);
int cmd_arcs(const ExperimentConfig& cfg, std::ostream& log);
int cmd_carleson(const ExperimentConfig& cfg, std::ostream& log);
int cmd_kappa(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& log);

/// Dispatches on cfg.command with the worker count applied; maps library
/// exceptions to exit statuses and reports them on `err`.
int run_command(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace dcl
