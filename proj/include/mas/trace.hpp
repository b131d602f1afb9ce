#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mas/simulator.hpp"

namespace mas {

inline constexpr const char* kToolVersion = "0.1.0";

/// JSON-lines trace: a header echoing the resolved scenario, one step record
/// per tick, and a terminating end record. Deterministic byte-for-byte for a
/// given config (wall times live in the metrics file, not here).
void write_trace(std::ostream& out, const SimConfig& config, const RunResult& result);

nlohmann::json metrics_to_json(const SimConfig& config, const RunResult& result);

struct ReplaySummary {
  bool ok = false;
  std::string error;           // first safety/consistency failure
  int ticks = 0;
  int records = 0;
  std::vector<std::pair<std::string, int>> deviation;  // per agent, from goal events
};

/// Re-checks a trace from scratch: rebuilds the environment from the header,
/// verifies every recorded position, re-evaluates safety at every tick (and
/// across ticks for swap-aware safety), confirms the recorded actions produce
/// the recorded positions, and recomputes deviation metrics from the trace
/// alone.
ReplaySummary replay_trace(std::istream& in);

}  // namespace mas
