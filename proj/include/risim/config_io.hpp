#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "risim/pipeline.hpp"

namespace risim {

/// JSON round-trips. from_json variants start from defaults and apply only
/// the keys present, so configs can stay minimal.
nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const std::string& path,
                            const ExperimentConfig& cfg);

/// Flat-section scenario file with [geometry], [radio], [phase] and
/// [pathloss] sections of `key = value` lines; vector values are
/// whitespace-separated, RIS rows are `ris_<i> = x y`. Unknown sections or
/// keys are errors. Applies on top of defaults like the JSON reader.
Scenario scenario_from_ini(std::istream& in);
Scenario load_scenario_ini(const std::string& path);
void save_scenario_ini(const std::string& path, const Scenario& sc);

/// FNV-1a over the canonical (sorted-key) JSON dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace risim
