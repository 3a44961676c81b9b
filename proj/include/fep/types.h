#ifndef FEP_TYPES_H
#define FEP_TYPES_H

#include <compare>
#include <cstdint>

namespace fep
{

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

/// Simulation time in milliseconds.
using SimTime = double;

/// Directed link a -> b.
struct Edge
{
    NodeId from = kNoNode;
    NodeId to = kNoNode;

    auto operator<=>(const Edge&) const = default;
};

using SessionId = int;

} // namespace fep

#endif // FEP_TYPES_H
