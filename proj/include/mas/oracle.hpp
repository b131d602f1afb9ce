#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mas/environment.hpp"
#include "mas/safety.hpp"
#include "mas/simulator.hpp"
#include "mas/types.hpp"

namespace mas {

/// Brute-force centralized joint search used as a completeness oracle at desk
/// scale (at most 3 agents, 16 vertices, lookahead 4). Searches the product
/// space for equal-length words of length <= lookahead+k that keep phi safe at
/// every instant and end with every agent parked on its first-block goal.
/// Returns the per-agent words, or nullopt when no safe joint plan exists.
/// Throws InstanceTooLarge beyond the hard caps.
std::optional<std::vector<std::string>> centralized_oracle(const Environment& env,
                                                           std::span<const AgentSpec> agents,
                                                           const SafetyFn& phi, int lookahead,
                                                           int k);

}  // namespace mas
