#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "graphnls/dynamics.hpp"
#include "graphnls/operators.hpp"
#include "graphnls/variational.hpp"

namespace graphnls {

// All files carry a header block with the artifact version and the resolved
// config; numbers are printed with 17 significant digits and '\n' endings.
std::string format_number(double x);

void write_field_csv(const std::string& path, const nlohmann::json& config,
                     const TwoComponentState& state);
// Reads a field CSV written by write_field_csv.
TwoComponentState read_field_csv(const std::string& path);

void write_spectrum_csv(const std::string& path, const nlohmann::json& config,
                        const SpectrumReport& report);

void write_trace_csv(const std::string& path, const nlohmann::json& config,
                     const EvolutionTrace& trace);

void write_iteration_csv(const std::string& path, const nlohmann::json& config,
                         const std::vector<IterationRecord>& trace);

void write_json(const std::string& path, const nlohmann::json& config, nlohmann::json body);

} // namespace graphnls
