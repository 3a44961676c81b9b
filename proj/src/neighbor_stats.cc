#include "fep/neighbor_stats.h"

#include <algorithm>
#include <stdexcept>

namespace fep
{

RateEstimator::RateEstimator(SimTime windowMs)
    : m_windowMs(windowMs)
{
    if (!(windowMs > 0.0))
    {
        throw std::invalid_argument("RateEstimator: window must be positive");
    }
}

void
RateEstimator::Record(SimTime now)
{
    m_times.push_back(now);
}

std::size_t
RateEstimator::CountInWindow(SimTime now)
{
    const SimTime start = now - m_windowMs;
    while (!m_times.empty() && m_times.front() < start)
    {
        m_times.pop_front();
    }
    std::size_t count = 0;
    for (SimTime t : m_times)
    {
        if (t <= now)
        {
            ++count;
        }
    }
    return count;
}

double
RateEstimator::Rate(SimTime now)
{
    return static_cast<double>(CountInWindow(now)) / (m_windowMs / 1000.0);
}

ServiceTracker::ServiceTracker(double alpha)
    : m_alpha(alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
    {
        throw std::invalid_argument("ServiceTracker: alpha must lie in (0,1]");
    }
}

void
ServiceTracker::RecordArrival(SimTime now)
{
    if (m_hasArrival)
    {
        const double gap = now - m_lastArrival;
        m_tr = m_hasTr ? m_alpha * gap + (1.0 - m_alpha) * m_tr : gap;
        m_hasTr = true;
    }
    m_hasArrival = true;
    m_lastArrival = now;
}

void
ServiceTracker::RecordService(double serviceMs)
{
    m_ts = m_hasTs ? m_alpha * serviceMs + (1.0 - m_alpha) * m_ts : serviceMs;
    m_hasTs = true;
}

NeighborLedger::NeighborLedger(SimTime windowMs, double ewmaAlpha)
    : m_windowMs(windowMs),
      m_service(ewmaAlpha)
{
}

NeighborLedger::Counters&
NeighborLedger::Entry(NodeId id)
{
    auto it = m_neighbors.find(id);
    if (it == m_neighbors.end())
    {
        it = m_neighbors.emplace(id, Counters{0, 0, 0, RateEstimator(m_windowMs)}).first;
    }
    return it->second;
}

void
NeighborLedger::RecordArrival(NodeId from, SimTime now)
{
    auto& c = Entry(from);
    ++c.sent;
    c.arrivals.Record(now);
    m_service.RecordArrival(now);
}

void
NeighborLedger::RecordForwarded(NodeId from, double serviceMs)
{
    auto it = m_neighbors.find(from);
    if (it == m_neighbors.end() || it->second.forwarded >= it->second.sent)
    {
        throw std::logic_error("NeighborLedger: forward without matching arrival");
    }
    ++it->second.forwarded;
    m_service.RecordService(serviceMs);
}

void
NeighborLedger::RecordSleepRequest(NodeId to)
{
    ++Entry(to).sleepRequests;
}

std::vector<NodeId>
NeighborLedger::UplinkSet(SimTime now)
{
    std::vector<NodeId> out;
    for (auto& [id, c] : m_neighbors)
    {
        if (c.arrivals.CountInWindow(now) > 0)
        {
            out.push_back(id);
        }
    }
    return out;
}

double
NeighborLedger::Rate(NodeId from, SimTime now)
{
    auto it = m_neighbors.find(from);
    return it == m_neighbors.end() ? 0.0 : it->second.arrivals.Rate(now);
}

PhRecord
NeighborLedger::History(NodeId neighbor) const
{
    auto it = m_neighbors.find(neighbor);
    if (it == m_neighbors.end())
    {
        return {};
    }
    return PhRecord{it->second.sent, it->second.forwarded, it->second.sleepRequests};
}

EnergyAccount::EnergyAccount(std::int64_t capacityNj, std::int64_t initialConsumedNj)
    : m_capacity(capacityNj),
      m_consumed(initialConsumedNj)
{
    if (capacityNj <= 0)
    {
        throw std::domain_error("EnergyAccount: capacity must be positive");
    }
    if (initialConsumedNj < 0 || initialConsumedNj > capacityNj)
    {
        throw std::domain_error("EnergyAccount: initial consumption out of range");
    }
}

std::int64_t
EnergyAccount::Debit(EnergyUse, std::int64_t amountNj)
{
    if (amountNj < 0)
    {
        throw std::domain_error("EnergyAccount: negative debit");
    }
    const std::int64_t applied = std::min(amountNj, Residual());
    m_consumed += applied;
    return applied;
}

} // namespace fep
