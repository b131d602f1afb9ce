#pragma once

#include <cstdint>

namespace mas {

using VertexId = std::int32_t;
using AgentId = std::int32_t;

inline constexpr VertexId kInvalidVertex = -1;
inline constexpr AgentId kInvalidAgent = -1;

// Agent sets are kept as bitmasks; runs are capped accordingly.
inline constexpr int kMaxAgents = 64;

}  // namespace mas
