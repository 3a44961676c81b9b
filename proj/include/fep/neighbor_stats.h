#ifndef FEP_NEIGHBOR_STATS_H
#define FEP_NEIGHBOR_STATS_H

// Per-node bookkeeping that feeds the sleep controller.

#include "fep/fuzzy.h"
#include "fep/types.h"

#include <cstdint>
#include <deque>
#include <map>
#include <vector>

namespace fep
{

/// Sliding-window arrival counter. Rate(t) = #arrivals in [t - W, t] / W.
class RateEstimator
{
  public:
    explicit RateEstimator(SimTime windowMs);

    void Record(SimTime now);
    /// Arrivals in [now - W, now]; drops older timestamps.
    std::size_t CountInWindow(SimTime now);
    /// Packets per second.
    double Rate(SimTime now);

    SimTime Window() const
    {
        return m_windowMs;
    }

    std::size_t Held() const
    {
        return m_times.size();
    }

  private:
    SimTime m_windowMs;
    std::deque<SimTime> m_times;
};

/// Exponentially weighted inter-arrival (TR) and per-packet service (TS) times.
/// The first sample initialises the mean.
class ServiceTracker
{
  public:
    explicit ServiceTracker(double alpha);

    void RecordArrival(SimTime now);
    void RecordService(double serviceMs);

    /// 0 until two arrivals were seen.
    double InterArrivalMs() const
    {
        return m_tr;
    }

    /// 0 until one service completed.
    double InterServiceMs() const
    {
        return m_ts;
    }

  private:
    double m_alpha;
    double m_tr = 0.0;
    double m_ts = 0.0;
    bool m_hasTr = false;
    bool m_hasTs = false;
    bool m_hasArrival = false;
    SimTime m_lastArrival = 0.0;
};

/// Counters the node keeps about each uplink neighbour that hands it packets
/// for forwarding.
class NeighborLedger
{
  public:
    NeighborLedger(SimTime windowMs, double ewmaAlpha);

    void RecordArrival(NodeId from, SimTime now);
    /// Throws std::logic_error if forwarded would exceed sent.
    void RecordForwarded(NodeId from, double serviceMs);
    void RecordSleepRequest(NodeId to);

    /// Neighbours with at least one forwarding arrival in the rate window.
    std::vector<NodeId> UplinkSet(SimTime now);
    double Rate(NodeId from, SimTime now);
    PhRecord History(NodeId neighbor) const;

    const ServiceTracker& Service() const
    {
        return m_service;
    }

  private:
    struct Counters
    {
        std::uint64_t sent = 0;
        std::uint64_t forwarded = 0;
        std::uint64_t sleepRequests = 0;
        RateEstimator arrivals;
    };

    Counters& Entry(NodeId id);

    SimTime m_windowMs;
    std::map<NodeId, Counters> m_neighbors;
    ServiceTracker m_service;
};

enum class EnergyUse
{
    TxControl,
    RxControl,
    TxData,
    RxData,
    IdleTick,
};

/// Battery account in integer nanojoules so sums are exact.
class EnergyAccount
{
  public:
    explicit EnergyAccount(std::int64_t capacityNj, std::int64_t initialConsumedNj = 0);

    /// Returns the amount actually applied (saturates at capacity).
    /// Throws std::domain_error on a negative amount.
    std::int64_t Debit(EnergyUse use, std::int64_t amountNj);

    bool Alive() const
    {
        return m_consumed < m_capacity;
    }

    std::int64_t Capacity() const
    {
        return m_capacity;
    }

    std::int64_t Consumed() const
    {
        return m_consumed;
    }

    std::int64_t Residual() const
    {
        return m_capacity - m_consumed;
    }

    double ResidualFraction() const
    {
        return static_cast<double>(Residual()) / static_cast<double>(m_capacity);
    }

  private:
    std::int64_t m_capacity;
    std::int64_t m_consumed;
};

} // namespace fep

#endif // FEP_NEIGHBOR_STATS_H
