#pragma once

#include <string>

#include "physim/physication.hpp"
#include "physim/scenarios.hpp"

namespace physim {

inline constexpr const char* kVersion = "0.1.0";

// JSON object model: complex numbers as [re, im] pairs, matrices row-major.
// Parsing accepts the documented schema; emission is hand-rolled so the
// byte stream is deterministic (fixed key order, sorted maps, %.17g doubles).
ScenarioConfig config_from_json(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);
std::string config_to_json(const ScenarioConfig& config);

// Line-delimited output records (single line each, no trailing newline).
std::string header_record(const ScenarioConfig& config);
std::string ledger_event_record(std::size_t trial, const LedgerEvent& event);
std::string summary_record(const RunStatistics& stats);

}  // namespace physim
