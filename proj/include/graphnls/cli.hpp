#pragma once

#include <string>

#include "graphnls/config.hpp"

namespace graphnls {

// Command entry points; they throw ValidationError / ConvergenceError /
// BlowupError, which run_command maps onto exit codes 2 / 3 / 4.
int cmd_profile(const RunConfig& cfg);
int cmd_ground_state(const RunConfig& cfg);
int cmd_spectrum(const RunConfig& cfg, const std::string& operator_name);
int cmd_instability(const RunConfig& cfg);
int cmd_evolve(const RunConfig& cfg);
int cmd_rearrange(const RunConfig& cfg, const std::string& input_csv);

int run_command(const std::string& command, const RunConfig& cfg,
                const std::string& operator_name, const std::string& input_csv);

} // namespace graphnls
