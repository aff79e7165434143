// SPDX-License-Identifier: Apache-2.0
//
// JSON for configs, scenario snapshots and solver problems; CSV for traces.
// Power quantities are written in dBm/dB and converted to linear on read.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "mamc/ao_driver.hpp"
#include "mamc/channel_model.hpp"
#include "mamc/conic_kernel.hpp"

namespace mamc {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json config_to_json(const SystemConfig& cfg);
/// Missing keys keep their defaults. Unknown keys raise ConfigError.
SystemConfig config_from_json(const nlohmann::json& j);
SystemConfig load_config(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const MaxEtaProblem& p);
MaxEtaProblem problem_from_json(const nlohmann::json& j);
void dump_problem(const MaxEtaProblem& p, const std::filesystem::path& path);

inline constexpr const char* kTraceHeader = "iteration,objective,objective_db,beam_status,tx_status,rx_status";
void write_trace_csv(std::ostream& os, const IterationTrace& trace);
void write_trace_csv(const IterationTrace& trace, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mamc
