#include "fep/routing.h"

#include <algorithm>
#include <stdexcept>

namespace fep
{

bool
Route::Contains(NodeId node) const
{
    return std::find(hops.begin(), hops.end(), node) != hops.end();
}

bool
Route::UsesEdge(const Edge& edge) const
{
    for (std::size_t i = 0; i + 1 < hops.size(); ++i)
    {
        if (hops[i] == edge.from && hops[i + 1] == edge.to)
        {
            return true;
        }
    }
    return false;
}

FuzzyGrade
RouteGrade(std::size_t hopCount, int maxHops)
{
    if (maxHops <= 0)
    {
        throw std::invalid_argument("RouteGrade: maxHops must be positive");
    }
    const double ratio = static_cast<double>(hopCount) / static_cast<double>(maxHops);
    return FuzzifyUnit(std::clamp(1.0 - ratio, 0.0, 1.0));
}

bool
IsValidPath(const std::vector<NodeId>& hops, int maxHops)
{
    if (hops.size() < 2 || static_cast<int>(hops.size() - 1) > maxHops)
    {
        return false;
    }
    std::vector<NodeId> sorted = hops;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

Route
MakeRoute(std::vector<NodeId> hops, int maxHops)
{
    if (!IsValidPath(hops, maxHops))
    {
        throw std::invalid_argument("MakeRoute: invalid router sequence");
    }
    Route route;
    route.grade = RouteGrade(hops.size() - 1, maxHops);
    route.hops = std::move(hops);
    return route;
}

bool
DiscoveryState::MarkSeen(NodeId source, std::uint32_t broadcastId)
{
    return m_seen.emplace(source, broadcastId).second;
}

bool
DiscoveryState::Seen(NodeId source, std::uint32_t broadcastId) const
{
    return m_seen.contains({source, broadcastId});
}

RreqVerdict
CheckRouteRequest(DiscoveryState& state,
                  NodeId self,
                  NodeId source,
                  std::uint32_t broadcastId,
                  const std::vector<NodeId>& path,
                  int maxHops)
{
    if (!state.MarkSeen(source, broadcastId))
    {
        return RreqVerdict::DropDuplicate;
    }
    if (std::find(path.begin(), path.end(), self) != path.end())
    {
        return RreqVerdict::DropLoop;
    }
    // Rebroadcasting from here yields at least path.size() + 1 hops at the
    // next receiver.
    if (static_cast<int>(path.size()) >= maxHops)
    {
        return RreqVerdict::DropTtl;
    }
    return RreqVerdict::Forward;
}

namespace
{

bool
RoutersDisjoint(const std::vector<NodeId>& a, const std::vector<NodeId>& b)
{
    for (std::size_t i = 1; i + 1 < a.size(); ++i)
    {
        for (std::size_t j = 1; j + 1 < b.size(); ++j)
        {
            if (a[i] == b[j])
            {
                return false;
            }
        }
    }
    return true;
}

} // namespace

std::vector<Route>
SelectReplyRoutes(std::vector<std::vector<NodeId>> paths, std::size_t maxRoutes, int maxHops)
{
    std::erase_if(paths, [maxHops](const auto& p) { return !IsValidPath(p, maxHops); });
    std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size())
        {
            return a.size() < b.size();
        }
        return a < b;
    });
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

    std::vector<Route> out;
    if (paths.empty() || maxRoutes == 0)
    {
        return out;
    }
    out.push_back(MakeRoute(paths.front(), maxHops));
    const auto& best = paths.front();

    std::vector<const std::vector<NodeId>*> ordered;
    for (std::size_t i = 1; i < paths.size(); ++i)
    {
        if (RoutersDisjoint(best, paths[i]))
        {
            ordered.push_back(&paths[i]);
        }
    }
    for (std::size_t i = 1; i < paths.size(); ++i)
    {
        if (!RoutersDisjoint(best, paths[i]))
        {
            ordered.push_back(&paths[i]);
        }
    }
    for (const auto* p : ordered)
    {
        if (out.size() >= maxRoutes)
        {
            break;
        }
        out.push_back(MakeRoute(*p, maxHops));
    }
    return out;
}

void
RouteCache::Install(std::vector<Route> routes, SimTime now)
{
    if (routes.size() > kMaxCachedRoutes)
    {
        routes.resize(kMaxCachedRoutes);
    }
    for (const auto& r : routes)
    {
        if (r.hops.size() < 2 || r.hops.front() != routes.front().hops.front() ||
            r.hops.back() != routes.front().hops.back())
        {
            throw std::invalid_argument("RouteCache: routes disagree on endpoints");
        }
    }
    m_routes = std::move(routes);
    m_active.reset();
    SwitchRoute(now);
}

const Route*
RouteCache::Active() const
{
    return m_active ? &m_routes[*m_active] : nullptr;
}

bool
RouteCache::InvalidateEdge(const Edge& edge)
{
    const Route* active = Active();
    const bool activeHit = active != nullptr && active->UsesEdge(edge);
    std::optional<Route> keep;
    if (active != nullptr && !activeHit)
    {
        keep = *active;
    }
    std::erase_if(m_routes, [&edge](const Route& r) { return r.UsesEdge(edge); });
    m_active.reset();
    if (keep)
    {
        auto it = std::find(m_routes.begin(), m_routes.end(), *keep);
        m_active = static_cast<std::size_t>(it - m_routes.begin());
    }
    return activeHit;
}

void
RouteCache::Suspend(const Edge& edge, SimTime until)
{
    auto& slot = m_suspended[edge];
    slot = std::max(slot, until);
}

bool
RouteCache::IsSuspended(const Edge& edge, SimTime now) const
{
    auto it = m_suspended.find(edge);
    return it != m_suspended.end() && it->second > now;
}

bool
RouteCache::Eligible(const Route& route, SimTime now) const
{
    for (std::size_t i = 0; i + 1 < route.hops.size(); ++i)
    {
        if (IsSuspended(Edge{route.hops[i], route.hops[i + 1]}, now))
        {
            return false;
        }
    }
    return true;
}

bool
RouteCache::ActiveEligible(SimTime now) const
{
    const Route* r = Active();
    return r != nullptr && Eligible(*r, now);
}

const Route*
RouteCache::SwitchRoute(SimTime now)
{
    std::erase_if(m_suspended, [now](const auto& kv) { return kv.second <= now; });
    for (std::size_t i = 0; i < m_routes.size(); ++i)
    {
        if (Eligible(m_routes[i], now))
        {
            m_active = i;
            ++m_epoch;
            return &m_routes[i];
        }
    }
    m_active.reset();
    return nullptr;
}

std::vector<const Route*>
RouteCache::Alternatives() const
{
    std::vector<const Route*> out;
    for (std::size_t i = 0; i < m_routes.size(); ++i)
    {
        if (!m_active || *m_active != i)
        {
            out.push_back(&m_routes[i]);
        }
    }
    return out;
}

} // namespace fep
