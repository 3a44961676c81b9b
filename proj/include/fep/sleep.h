#ifndef FEP_SLEEP_H
#define FEP_SLEEP_H

// Sleep budget at the requester and per-edge suspensions at granters.

#include "fep/fuzzy.h"
#include "fep/types.h"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace fep
{

/// Installments (shots) a node may spend on sleep requests in one lifetime.
class SleepBudget
{
  public:
    explicit SleepBudget(std::uint32_t cap);

    bool Exhausted() const
    {
        return m_used >= m_cap;
    }

    std::uint32_t Used() const
    {
        return m_used;
    }

    std::uint32_t Cap() const
    {
        return m_cap;
    }

    std::optional<SimTime> LastShot() const
    {
        return m_lastShot;
    }

    bool CooledDown(SimTime now, SimTime cooldownMs) const;

    /// One shot costs one installment however many neighbours it addresses.
    /// Throws std::logic_error when the budget is spent.
    void RecordShot(SimTime now);

  private:
    std::uint32_t m_cap;
    std::uint32_t m_used = 0;
    std::optional<SimTime> m_lastShot;
};

/// Gate for emitting a sleep request: an enable input fired, budget remains,
/// the cooldown elapsed and somebody is there to ask.
bool ShotPermitted(const EnableFlags& flags,
                   const SleepBudget& budget,
                   SimTime now,
                   SimTime cooldownMs,
                   std::size_t uplinkCount);

/// The granter stops forwarding to the sleeper until `until`.
struct EdgeSleep
{
    NodeId granter = kNoNode;
    NodeId sleeper = kNoNode;
    SimTime since = 0.0;
    SimTime until = 0.0;
};

class SleepTable
{
  public:
    /// A later grant on the same edge extends the suspension.
    void Add(const EdgeSleep& sleep);
    bool IsSuspended(NodeId granter, NodeId sleeper, SimTime now) const;
    std::optional<EdgeSleep> Find(NodeId granter, NodeId sleeper) const;
    /// Removes and returns every record with until <= now.
    std::vector<EdgeSleep> Expire(SimTime now);

    std::size_t Size() const
    {
        return m_edges.size();
    }

  private:
    std::map<Edge, EdgeSleep> m_edges;
};

/// Sleep given up by a grant shorter than the maximum nap.
inline double
LostSleep(double napMs, double maxNapMs)
{
    return maxNapMs - napMs;
}

} // namespace fep

#endif // FEP_SLEEP_H
