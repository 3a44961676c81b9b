#include "fep/sleep.h"

#include <algorithm>
#include <stdexcept>

namespace fep
{

SleepBudget::SleepBudget(std::uint32_t cap)
    : m_cap(cap)
{
}

bool
SleepBudget::CooledDown(SimTime now, SimTime cooldownMs) const
{
    return !m_lastShot || now - *m_lastShot >= cooldownMs;
}

void
SleepBudget::RecordShot(SimTime now)
{
    if (Exhausted())
    {
        throw std::logic_error("SleepBudget: shot beyond budget");
    }
    ++m_used;
    m_lastShot = now;
}

bool
ShotPermitted(const EnableFlags& flags,
              const SleepBudget& budget,
              SimTime now,
              SimTime cooldownMs,
              std::size_t uplinkCount)
{
    return flags.Any() && !budget.Exhausted() && budget.CooledDown(now, cooldownMs) &&
           uplinkCount > 0;
}

void
SleepTable::Add(const EdgeSleep& sleep)
{
    const Edge key{sleep.granter, sleep.sleeper};
    auto it = m_edges.find(key);
    if (it == m_edges.end() || it->second.until < sleep.until)
    {
        m_edges[key] = sleep;
    }
}

bool
SleepTable::IsSuspended(NodeId granter, NodeId sleeper, SimTime now) const
{
    auto it = m_edges.find(Edge{granter, sleeper});
    return it != m_edges.end() && it->second.until > now;
}

std::optional<EdgeSleep>
SleepTable::Find(NodeId granter, NodeId sleeper) const
{
    auto it = m_edges.find(Edge{granter, sleeper});
    if (it == m_edges.end())
    {
        return std::nullopt;
    }
    return it->second;
}

std::vector<EdgeSleep>
SleepTable::Expire(SimTime now)
{
    std::vector<EdgeSleep> out;
    for (auto it = m_edges.begin(); it != m_edges.end();)
    {
        if (it->second.until <= now)
        {
            out.push_back(it->second);
            it = m_edges.erase(it);
        }
        else
        {
            ++it;
        }
    }
    return out;
}

} // namespace fep
