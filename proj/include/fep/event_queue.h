#ifndef FEP_EVENT_QUEUE_H
#define FEP_EVENT_QUEUE_H

#include "fep/types.h"

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace fep
{

enum class EventKind
{
    PacketRx,
    ServiceDone,
    Timer,
    MobilityTick,
    TrafficEmit,
    SamplePartitions,
    SleepCheck,
    SleepExpiry,
};

/// Time-ordered queue; equal times dequeue in scheduling order.
class EventQueue
{
  public:
    using Action = std::function<void()>;

    struct Event
    {
        SimTime time;
        std::uint64_t seq;
        EventKind kind;
        Action action;
    };

    std::uint64_t Schedule(SimTime time, EventKind kind, Action action)
    {
        if (time < m_now)
        {
            throw std::logic_error("EventQueue: scheduling into the past");
        }
        const std::uint64_t seq = m_nextSeq++;
        m_heap.push(Event{time, seq, kind, std::move(action)});
        return seq;
    }

    bool Empty() const
    {
        return m_heap.empty();
    }

    SimTime NextTime() const
    {
        return m_heap.top().time;
    }

    /// Removes the earliest event and advances the clock to its time.
    Event Pop()
    {
        Event e = std::move(const_cast<Event&>(m_heap.top()));
        m_heap.pop();
        if (e.time < m_now)
        {
            throw std::logic_error("EventQueue: clock went backwards");
        }
        m_now = e.time;
        m_current = e.seq;
        return e;
    }

    SimTime Now() const
    {
        return m_now;
    }

    /// Sequence number of the event being executed.
    std::uint64_t CurrentSeq() const
    {
        return m_current;
    }

  private:
    struct Later
    {
        bool operator()(const Event& a, const Event& b) const
        {
            if (a.time != b.time)
            {
                return a.time > b.time;
            }
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> m_heap;
    SimTime m_now = 0.0;
    std::uint64_t m_nextSeq = 0;
    std::uint64_t m_current = 0;
};

} // namespace fep

#endif // FEP_EVENT_QUEUE_H
