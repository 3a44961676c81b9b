#ifndef FEP_ROUTING_H
#define FEP_ROUTING_H

// Source-routed on-demand discovery with up to three cached router sequences
// per destination and discovery-free switching between them.

#include "fep/fuzzy.h"
#include "fep/types.h"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace fep
{

inline constexpr std::size_t kMaxCachedRoutes = 3;

struct Route
{
    std::vector<NodeId> hops;
    FuzzyGrade grade = FuzzyGrade::A1;

    std::size_t HopCount() const
    {
        return hops.empty() ? 0 : hops.size() - 1;
    }

    bool Contains(NodeId node) const;
    bool UsesEdge(const Edge& edge) const;

    bool operator==(const Route&) const = default;
};

/// Grade of a route: 1 - hopCount / maxHops, fuzzified.
FuzzyGrade RouteGrade(std::size_t hopCount, int maxHops);

/// Acyclic, at least one hop, hop count within maxHops.
bool IsValidPath(const std::vector<NodeId>& hops, int maxHops);

/// Throws std::invalid_argument when the path is not valid.
Route MakeRoute(std::vector<NodeId> hops, int maxHops);

/// Remembers which (source, broadcast id) floods this node has already seen.
class DiscoveryState
{
  public:
    /// True the first time the pair is seen.
    bool MarkSeen(NodeId source, std::uint32_t broadcastId);
    bool Seen(NodeId source, std::uint32_t broadcastId) const;

  private:
    std::set<std::pair<NodeId, std::uint32_t>> m_seen;
};

enum class RreqVerdict
{
    Forward,
    DropDuplicate,
    DropLoop,
    DropTtl,
};

/// Decision of an intermediate node on a received route request whose
/// accumulated path does not yet include `self`.
RreqVerdict CheckRouteRequest(DiscoveryState& state,
                              NodeId self,
                              NodeId source,
                              std::uint32_t broadcastId,
                              const std::vector<NodeId>& path,
                              int maxHops);

/// Ranks the paths a destination collected: hop count, then lexicographic
/// node sequence. Routes #2 and #3 prefer paths whose routers are disjoint
/// from the best path's routers.
std::vector<Route> SelectReplyRoutes(std::vector<std::vector<NodeId>> paths,
                                     std::size_t maxRoutes,
                                     int maxHops);

enum class SwitchReason
{
    LinkBreak,
    SleepRedirect,
};

/// Routes to one destination held at a source, best first.
class RouteCache
{
  public:
    /// Replaces the cached routes and activates the best eligible one.
    void Install(std::vector<Route> routes, SimTime now);

    const Route* Active() const;

    std::optional<std::size_t> ActiveIndex() const
    {
        return m_active;
    }

    const std::vector<Route>& Routes() const
    {
        return m_routes;
    }

    bool Empty() const
    {
        return m_routes.empty();
    }

    /// Drops every route using the edge; true if the active route was dropped.
    bool InvalidateEdge(const Edge& edge);

    void Suspend(const Edge& edge, SimTime until);
    bool IsSuspended(const Edge& edge, SimTime now) const;
    bool Eligible(const Route& route, SimTime now) const;
    bool ActiveEligible(SimTime now) const;

    /// Activates the best-ranked eligible route, or clears the active route
    /// and returns nullptr when none is left.
    const Route* SwitchRoute(SimTime now);

    /// Cached routes other than the active one.
    std::vector<const Route*> Alternatives() const;

    /// Incremented on every activation.
    std::uint64_t Epoch() const
    {
        return m_epoch;
    }

  private:
    std::vector<Route> m_routes;
    std::optional<std::size_t> m_active;
    std::map<Edge, SimTime> m_suspended;
    std::uint64_t m_epoch = 0;
};

} // namespace fep

#endif // FEP_ROUTING_H
