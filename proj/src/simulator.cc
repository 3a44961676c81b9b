#include "fep/simulator.h"

#include "fep/event_log.h"
#include "fep/event_queue.h"
#include "fep/neighbor_stats.h"
#include "fep/rng.h"
#include "fep/routing.h"
#include "fep/sleep.h"
#include "fep/topology.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>

namespace fep
{

namespace
{

enum class PacketKind
{
    Rreq,
    Rrep,
    RouteError,
    RouteSwitch,
    SleepRequest,
    SleepGrant,
    SleepDeny,
    Data,
};

std::string_view
KindName(PacketKind k)
{
    switch (k)
    {
    case PacketKind::Rreq:
        return "rreq";
    case PacketKind::Rrep:
        return "rrep";
    case PacketKind::RouteError:
        return "route_error";
    case PacketKind::RouteSwitch:
        return "route_switch";
    case PacketKind::SleepRequest:
        return "sleep_request";
    case PacketKind::SleepGrant:
        return "sleep_grant";
    case PacketKind::SleepDeny:
        return "sleep_deny";
    case PacketKind::Data:
        return "data";
    }
    return "?";
}

/// Why a control packet was sent: first discovery, recovery after a link
/// break, or the sleep overlay.
enum class Cause
{
    Initial,
    Break,
    Sleep,
};

std::string_view
CauseName(Cause c)
{
    switch (c)
    {
    case Cause::Initial:
        return "initial";
    case Cause::Break:
        return "break";
    case Cause::Sleep:
        return "sleep";
    }
    return "?";
}

struct DataBody
{
    SessionId session = 0;
    std::uint32_t seq = 0;
    SimTime created = 0.0;
    std::uint32_t total = 0;
    std::uint32_t remaining = 0;
    std::vector<NodeId> route;
    /// Index in route of the node the packet is travelling to.
    std::size_t hop = 0;
    std::uint64_t epoch = 0;
    std::vector<Route> alternatives;
    int bounces = 0;
};

struct RreqBody
{
    NodeId source = kNoNode;
    NodeId destination = kNoNode;
    std::uint32_t bid = 0;
    std::vector<NodeId> path;
};

struct RrepBody
{
    NodeId source = kNoNode;
    NodeId destination = kNoNode;
    std::uint32_t bid = 0;
    std::vector<Route> routes;
    std::vector<NodeId> path;
    std::size_t hop = 0;
};

/// Route error or route switch travelling back to a source.
struct NoticeBody
{
    NodeId source = kNoNode;
    NodeId destination = kNoNode;
    SessionId session = 0;
    Edge edge;
    SimTime until = 0.0;
    std::vector<NodeId> path;
    std::size_t hop = 0;
    std::vector<DataBody> carried;
};

struct SleepRequestBody
{
    NodeId requester = kNoNode;
    std::uint32_t shot = 0;
    std::vector<std::pair<NodeId, SlReqInputs>> entries;
};

struct SleepReplyBody
{
    NodeId granter = kNoNode;
    NodeId sleeper = kNoNode;
    std::uint32_t shot = 0;
    double napMs = 0.0;
    SimTime until = 0.0;
};

struct Packet
{
    PacketKind kind = PacketKind::Data;
    std::uint64_t id = 0;
    NodeId from = kNoNode;
    NodeId to = kNoNode; ///< kNoNode for a broadcast
    Cause cause = Cause::Initial;
    std::int64_t chain = -1;
    std::variant<DataBody, RreqBody, RrepBody, NoticeBody, SleepRequestBody, SleepReplyBody> body;
};

struct SourceDiscovery
{
    bool pending = false;
    bool everInstalled = false;
    int attempts = 0;
    std::uint32_t bid = 0;
    Cause cause = Cause::Initial;
    std::int64_t chain = -1;
    std::uint64_t token = 0;
    std::deque<DataBody> waiting;
};

struct Collector
{
    std::vector<std::vector<NodeId>> paths;
    Cause cause = Cause::Initial;
    std::int64_t chain = -1;
    bool closed = false;
};

/// What a router knows about one session arriving from one uplink.
struct SessionView
{
    std::uint64_t forwarded = 0;
    std::uint64_t pending = 0;
    std::vector<FuzzyGrade> altGrades;
    SimTime lastArrival = 0.0;
};

struct SeenRoute
{
    std::vector<NodeId> route;
    SimTime lastSeen = 0.0;
};

struct Node
{
    Node(NodeId nodeId,
         RandomWaypoint motion,
         double radioRange,
         std::int64_t capacityNj,
         std::int64_t initialNj,
         const ScenarioConfig& c)
        : id(nodeId),
          mobility(std::move(motion)),
          range(radioRange),
          energy(capacityNj, initialNj),
          initialConsumed(initialNj),
          ledger(c.rateWindowS * 1000.0, c.ewmaAlpha),
          budget(c.sleepBudget)
    {
    }

    NodeId id;
    RandomWaypoint mobility;
    double range;
    EnergyAccount energy;
    std::int64_t initialConsumed;
    bool alive = true;

    NeighborLedger ledger;
    std::deque<Packet> queue;
    std::optional<Packet> inService;

    DiscoveryState discovery;
    std::uint32_t nextBid = 0;
    std::map<NodeId, RouteCache> routes;
    std::map<NodeId, SourceDiscovery> sources;
    std::map<std::pair<NodeId, std::uint32_t>, Collector> collectors;
    std::map<std::pair<NodeId, SessionId>, SessionView> views;
    std::map<SessionId, SeenRoute> seenRoutes;
    std::map<NodeId, SimTime> asleepUntil;

    SleepBudget budget;
    bool armed = false;
    bool router = false;
    std::uint64_t forwarded = 0;
    /// Longest nap granted per shot.
    std::map<std::uint32_t, double> bestNap;
};

struct Session
{
    SessionId id = 0;
    SessionSpec spec;
    std::uint32_t originated = 0;
    std::set<std::uint64_t> brokenEpochs;
};

bool
PathUsesEdge(const std::vector<NodeId>& hops, const Edge& e)
{
    for (std::size_t i = 0; i + 1 < hops.size(); ++i)
    {
        if (hops[i] == e.from && hops[i + 1] == e.to)
        {
            return true;
        }
    }
    return false;
}

Json
GradesJson(const std::vector<FuzzyGrade>& grades)
{
    Json out = Json::array();
    for (auto g : grades)
    {
        out.push_back(ToString(g));
    }
    return out;
}

Json
InputsJson(const SlReqInputs& in)
{
    Json sessions = Json::array();
    for (const auto& v : in.sessions)
    {
        sessions.push_back(
            {{"alpha1", v.forwarded}, {"alpha2", v.pending}, {"alt_grades", GradesJson(v.alternativeGrades)}});
    }
    return {{"s", in.history.sent},
            {"r", in.history.forwarded},
            {"sl", in.history.sleepRequests},
            {"tau_ab", in.tauAb},
            {"uplink_taus", in.uplinkTaus},
            {"sessions", sessions}};
}

Json
TraceJson(const SlReqTrace& t)
{
    return {{"cl", t.cl.cl},
            {"cl_low", t.cl.bounds.low},
            {"cl_high", t.cl.bounds.high},
            {"cl_degenerate", t.cl.bounds.degenerate},
            {"ph", t.ph},
            {"ccs", t.ccs},
            {"cl_grade", ToString(t.clGrade)},
            {"ph_grade", ToString(t.phGrade)},
            {"ccs_grade", ToString(t.ccsGrade)},
            {"temp", ToString(t.temp)},
            {"slpr", ToString(t.slpr)},
            {"nap_ms", t.napMs ? Json(*t.napMs) : Json(nullptr)}};
}

class Simulator
{
  public:
    Simulator(const ScenarioConfig& config, const RunOptions& options);
    RunResult Run();

  private:
    SimTime Now() const
    {
        return m_events.Now();
    }

    bool Fep() const
    {
        return m_cfg.protocol == Protocol::Fep;
    }

    template <typename F>
    void Log(std::string_view kind, NodeId node, F&& make)
    {
        if (m_log.Enabled())
        {
            m_log.Append(Now(), kind, node, make());
        }
    }

    void At(SimTime t, EventKind kind, EventQueue::Action action)
    {
        if (t <= m_endMs)
        {
            m_events.Schedule(t, kind, std::move(action));
        }
    }

    bool Linked(NodeId a, NodeId b) const
    {
        return LinkUp(m_nodes[a].mobility.Position(),
                      m_nodes[a].range,
                      m_nodes[b].mobility.Position(),
                      m_nodes[b].range);
    }

    std::int64_t Debit(NodeId id, EnergyUse use, std::int64_t nj);
    void CheckDeath(NodeId id);
    void Kill(NodeId id);

    // traffic
    void Originate(SessionId s, std::uint32_t seq);
    void Deliver(const DataBody& body, NodeId at);
    void Drop(const DataBody& body, NodeId at, std::string_view reason);
    void Discard(const Packet& p, NodeId at, std::string_view reason);

    // queueing and radio
    void Enqueue(NodeId id, Packet p);
    void StartService(NodeId id);
    void OnServiceDone(NodeId id);
    void Emit(NodeId id, Packet p);
    void OnReceive(NodeId id, Packet p);
    int Bytes(const Packet& p) const;

    // routing
    void SendData(NodeId src, DataBody body);
    void Buffer(NodeId src, NodeId dst, DataBody body);
    void Stamp(NodeId src, DataBody& body, const RouteCache& cache);
    void Flush(NodeId src, NodeId dst);
    void Resume(NodeId src, NodeId dst, Cause cause, std::int64_t chain);
    bool UseCache(NodeId src, NodeId dst, Cause cause, std::int64_t chain);
    bool SourceHasWork(NodeId src, NodeId dst) const;
    void StartDiscovery(NodeId src, NodeId dst, Cause cause, std::int64_t chain);
    void SendRreq(NodeId src, NodeId dst);
    void OnDiscoveryTimeout(NodeId src, NodeId dst, std::uint64_t token);
    void OnRreq(NodeId id, const Packet& p);
    void CloseCollector(NodeId dst, NodeId src, std::uint32_t bid);
    void OnRrep(NodeId id, Packet p);
    void OnData(NodeId id, Packet p);
    void RecordForwarded(NodeId id, const DataBody& body);
    void Bounce(NodeId id, DataBody body, Cause cause);
    void OnNotice(NodeId id, Packet p);
    void HandleNotice(NodeId src, PacketKind kind, NoticeBody nb, Cause cause, std::int64_t chain);

    // sleep overlay
    EnableFlags Flags(NodeId id);
    void UpdateFlags(NodeId id);
    void MaybeRequestSleep(NodeId id, std::string_view trigger);
    void OnSleepRequest(NodeId id, const Packet& p);
    void OnSleepReply(NodeId id, const Packet& p);
    void ApplyGrantRedirects(NodeId granter, NodeId sleeper, SimTime until, std::int64_t chain);
    void ExpireSleeps();

    // periodic
    void MobilityTick();
    void SamplePartitions();
    void PeriodicSleepCheck();

    const ScenarioConfig m_cfg;
    EventLog m_log;
    EventQueue m_events;
    SimTime m_endMs;
    std::vector<Node> m_nodes;
    std::vector<Session> m_sessions;
    SleepTable m_sleepTable;
    std::map<Edge, std::int64_t> m_edgeChain;
    std::int64_t m_nextChain = 0;
    std::uint64_t m_nextPacketId = 0;
    std::set<std::pair<SessionId, std::uint32_t>> m_live;

    std::int64_t m_txDataNj;
    std::int64_t m_rxDataNj;
    std::int64_t m_idleNj;
    double m_serviceMs;
    double m_windowMs;

    RunCounters m_c;
    std::int64_t m_debited = 0;
    TraceHash m_mobilityHash;
    TraceHash m_trafficHash;
};

Simulator::Simulator(const ScenarioConfig& config, const RunOptions& options)
    : m_cfg(config),
      m_log(options.recordLog),
      m_endMs(config.simTimeS * 1000.0),
      m_txDataNj(std::llround(config.energy.txDataMj * 1e6)),
      m_rxDataNj(std::llround(config.energy.rxDataMj * 1e6)),
      m_idleNj(std::llround(config.energy.idleMjPerTick * 1e6)),
      m_serviceMs(1000.0 / config.serviceRate),
      m_windowMs(config.rateWindowS * 1000.0)
{
    const auto& c = m_cfg;
    const std::int64_t capacityNj = std::llround(c.energy.capacityJ * 1e9);
    RandomStream placement(c.seed, "placement");
    RandomStream ranges(c.seed, "range");
    m_nodes.reserve(c.nodeCount);
    for (NodeId i = 0; i < c.nodeCount; ++i)
    {
        Vec2 start{placement.Uniform(0.0, c.arenaWidth), placement.Uniform(0.0, c.arenaHeight)};
        const double range = ranges.Uniform(c.rangeMin, c.rangeMax);
        std::int64_t initial = 0;
        for (const auto& p : c.placements)
        {
            if (p.id == i)
            {
                start = Vec2{p.x, p.y};
                initial = std::llround((1.0 - p.residualFraction) * static_cast<double>(capacityNj));
            }
        }
        RandomWaypoint motion(start,
                              c.arenaWidth,
                              c.arenaHeight,
                              c.speedMin,
                              c.speedMax,
                              RandomStream(c.seed, "mobility", static_cast<std::uint64_t>(i)));
        m_nodes.emplace_back(i, std::move(motion), range, capacityNj, initial, c);
    }

    std::vector<SessionSpec> specs = c.sessions;
    if (specs.empty())
    {
        RandomStream draw(c.seed, "sessions");
        for (int s = 0; s < c.sessionCount; ++s)
        {
            SessionSpec spec;
            spec.source = static_cast<NodeId>(draw.Below(c.nodeCount));
            NodeId dst = static_cast<NodeId>(draw.Below(c.nodeCount - 1));
            spec.destination = dst >= spec.source ? dst + 1 : dst;
            spec.rate = c.sessionRate;
            spec.total = c.packetsPerSession;
            spec.startS = draw.Uniform(0.0, c.sessionStartMaxS);
            specs.push_back(spec);
        }
    }
    for (std::size_t s = 0; s < specs.size(); ++s)
    {
        m_sessions.push_back(Session{static_cast<SessionId>(s), specs[s], 0, {}});
    }
}

std::int64_t
Simulator::Debit(NodeId id, EnergyUse use, std::int64_t nj)
{
    const std::int64_t applied = m_nodes[id].energy.Debit(use, nj);
    m_debited += applied;
    return applied;
}

void
Simulator::CheckDeath(NodeId id)
{
    if (m_nodes[id].alive && !m_nodes[id].energy.Alive())
    {
        Kill(id);
    }
}

void
Simulator::Kill(NodeId id)
{
    Node& n = m_nodes[id];
    n.alive = false;
    ++m_c.deaths;
    Log("death", id, [&] { return Json{{"consumed_nj", n.energy.Consumed()}}; });
    if (n.inService)
    {
        Packet p = std::move(*n.inService);
        n.inService.reset();
        Discard(p, id, "death");
    }
    while (!n.queue.empty())
    {
        Packet p = std::move(n.queue.front());
        n.queue.pop_front();
        Discard(p, id, "death");
    }
    for (auto& [dst, sd] : n.sources)
    {
        while (!sd.waiting.empty())
        {
            DataBody b = std::move(sd.waiting.front());
            sd.waiting.pop_front();
            Drop(b, id, "death");
        }
        sd.pending = false;
    }
}

void
Simulator::Originate(SessionId s, std::uint32_t seq)
{
    Session& session = m_sessions[s];
    const NodeId src = session.spec.source;
    if (!m_nodes[src].alive)
    {
        return;
    }
    ++session.originated;
    ++m_c.dataSent;
    m_live.emplace(s, seq);
    Log("originate", src, [&] {
        return Json{{"session", s}, {"seq", seq}, {"dst", session.spec.destination}};
    });

    DataBody body;
    body.session = s;
    body.seq = seq;
    body.created = Now();
    body.total = session.spec.total;
    body.remaining = session.spec.total - seq - 1;
    SendData(src, std::move(body));

    if (seq + 1 < session.spec.total)
    {
        const SimTime next = session.spec.startS * 1000.0 + (seq + 1) * 1000.0 / session.spec.rate;
        At(next, EventKind::TrafficEmit, [this, s, seq] { Originate(s, seq + 1); });
    }
}

void
Simulator::Deliver(const DataBody& body, NodeId at)
{
    if (m_live.erase({body.session, body.seq}) != 1)
    {
        throw std::logic_error("delivery of a packet that is not in flight");
    }
    ++m_c.dataDelivered;
    const double delay = Now() - body.created;
    m_c.delaySumMs += delay;
    Log("deliver", at, [&] {
        return Json{{"session", body.session}, {"seq", body.seq}, {"delay_ms", delay}};
    });
}

void
Simulator::Drop(const DataBody& body, NodeId at, std::string_view reason)
{
    if (m_live.erase({body.session, body.seq}) != 1)
    {
        throw std::logic_error("drop of a packet that is not in flight");
    }
    ++m_c.dataDropped;
    Log("drop", at, [&] {
        return Json{{"session", body.session}, {"seq", body.seq}, {"reason", reason}};
    });
}

void
Simulator::Discard(const Packet& p, NodeId at, std::string_view reason)
{
    if (p.kind == PacketKind::Data)
    {
        Drop(std::get<DataBody>(p.body), at, reason);
    }
    else if (p.kind == PacketKind::RouteError || p.kind == PacketKind::RouteSwitch)
    {
        for (const auto& b : std::get<NoticeBody>(p.body).carried)
        {
            Drop(b, at, reason);
        }
    }
}

void
Simulator::Enqueue(NodeId id, Packet p)
{
    if (!m_nodes[id].alive)
    {
        Discard(p, id, "death");
        return;
    }
    p.from = id;
    p.id = m_nextPacketId++;
    m_nodes[id].queue.push_back(std::move(p));
    StartService(id);
}

void
Simulator::StartService(NodeId id)
{
    Node& n = m_nodes[id];
    if (!n.alive || n.inService || n.queue.empty())
    {
        return;
    }
    n.inService = std::move(n.queue.front());
    n.queue.pop_front();
    const SimTime done = Now() + m_serviceMs;
    if (done > m_endMs)
    {
        // Stays in service; counted as in flight at the end of the run.
        return;
    }
    m_events.Schedule(done, EventKind::ServiceDone, [this, id] { OnServiceDone(id); });
}

void
Simulator::OnServiceDone(NodeId id)
{
    Node& n = m_nodes[id];
    if (!n.alive || !n.inService)
    {
        return;
    }
    Packet p = std::move(*n.inService);
    n.inService.reset();
    Emit(id, std::move(p));
    StartService(id);
}

int
Simulator::Bytes(const Packet& p) const
{
    const auto& s = m_cfg.sizes;
    switch (p.kind)
    {
    case PacketKind::Rreq:
        return s.rreqBase + s.rreqPerHop * static_cast<int>(std::get<RreqBody>(p.body).path.size());
    case PacketKind::Rrep: {
        int nodes = 0;
        for (const auto& r : std::get<RrepBody>(p.body).routes)
        {
            nodes += static_cast<int>(r.hops.size());
        }
        return s.rrepBase + s.rrepPerHopPerRoute * nodes;
    }
    case PacketKind::RouteError:
    case PacketKind::RouteSwitch:
        return s.notice;
    case PacketKind::SleepRequest:
    case PacketKind::SleepGrant:
    case PacketKind::SleepDeny:
        return s.sleepMessage;
    case PacketKind::Data:
        return s.dataPayload + (Fep() ? s.fepMetadata : 0);
    }
    return 0;
}

void
Simulator::Emit(NodeId id, Packet p)
{
    const bool data = p.kind == PacketKind::Data;
    if (data && Fep() && m_sleepTable.IsSuspended(id, p.to, Now()))
    {
        Bounce(id, std::move(std::get<DataBody>(p.body)), Cause::Sleep);
        return;
    }

    const int bytes = Bytes(p);
    const std::int64_t payload = m_cfg.sizes.dataPayload;
    const std::int64_t txNj = data ? m_txDataNj : m_txDataNj * bytes / payload;
    const std::int64_t rxNj = data ? m_rxDataNj : m_rxDataNj * bytes / payload;

    const std::int64_t txApplied = Debit(id, data ? EnergyUse::TxData : EnergyUse::TxControl, txNj);
    std::vector<std::pair<NodeId, std::int64_t>> rx;
    const EnergyUse rxUse = data ? EnergyUse::RxData : EnergyUse::RxControl;
    if (p.to == kNoNode)
    {
        for (NodeId j = 0; j < static_cast<NodeId>(m_nodes.size()); ++j)
        {
            if (j != id && m_nodes[j].alive && Linked(id, j))
            {
                rx.emplace_back(j, Debit(j, rxUse, rxNj));
            }
        }
    }
    else if (m_nodes[p.to].alive && Linked(id, p.to))
    {
        rx.emplace_back(p.to, Debit(p.to, rxUse, rxNj));
    }
    const bool linkOk = p.to == kNoNode || !rx.empty();

    ++m_c.txPackets;
    if (!data)
    {
        ++m_c.txControlPackets;
        if (p.cause == Cause::Break)
        {
            ++m_c.repairMessages;
        }
    }
    if (p.kind == PacketKind::Rreq)
    {
        ++m_c.rreqPackets;
    }

    Log("tx", id, [&] {
        Json rxJson = Json::array();
        for (const auto& [j, nj] : rx)
        {
            rxJson.push_back(Json::array({j, nj}));
        }
        Json j{{"pkt", KindName(p.kind)},
               {"id", p.id},
               {"bytes", bytes},
               {"to", p.to},
               {"cause", CauseName(p.cause)},
               {"chain", p.chain},
               {"control", !data},
               {"tx_nj", txApplied},
               {"rx", rxJson}};
        if (data)
        {
            const auto& b = std::get<DataBody>(p.body);
            j["session"] = b.session;
            j["seq"] = b.seq;
        }
        return j;
    });

    for (const auto& [j, nj] : rx)
    {
        At(Now() + m_cfg.propagationMs, EventKind::PacketRx, [this, j = j, p] { OnReceive(j, p); });
    }

    if (data)
    {
        DataBody& body = std::get<DataBody>(p.body);
        if (linkOk)
        {
            RecordForwarded(id, body);
        }
        else
        {
            CheckDeath(id);
            Bounce(id, std::move(body), Cause::Break);
        }
    }
    else if (!linkOk)
    {
        Discard(p, id, "lost");
    }

    CheckDeath(id);
    for (const auto& [j, nj] : rx)
    {
        CheckDeath(j);
        UpdateFlags(j);
    }
    UpdateFlags(id);
}

void
Simulator::OnReceive(NodeId id, Packet p)
{
    if (!m_nodes[id].alive || !Linked(p.from, id))
    {
        Discard(p, id, "lost");
        return;
    }
    switch (p.kind)
    {
    case PacketKind::Data:
        OnData(id, std::move(p));
        break;
    case PacketKind::Rreq:
        OnRreq(id, p);
        break;
    case PacketKind::Rrep:
        OnRrep(id, std::move(p));
        break;
    case PacketKind::RouteError:
    case PacketKind::RouteSwitch:
        OnNotice(id, std::move(p));
        break;
    case PacketKind::SleepRequest:
        OnSleepRequest(id, p);
        break;
    case PacketKind::SleepGrant:
    case PacketKind::SleepDeny:
        OnSleepReply(id, p);
        break;
    }
}

void
Simulator::SendData(NodeId src, DataBody body)
{
    const NodeId dst = m_sessions[body.session].spec.destination;
    RouteCache& cache = m_nodes[src].routes[dst];
    if (cache.ActiveEligible(Now()) && m_nodes[src].sources[dst].waiting.empty())
    {
        Stamp(src, body, cache);
        Packet p;
        p.kind = PacketKind::Data;
        p.to = body.route[1];
        p.body = std::move(body);
        Enqueue(src, std::move(p));
        return;
    }
    Buffer(src, dst, std::move(body));
    SourceDiscovery& sd = m_nodes[src].sources[dst];
    Resume(src, dst, sd.everInstalled ? Cause::Break : Cause::Initial, -1);
}

void
Simulator::Buffer(NodeId src, NodeId dst, DataBody body)
{
    auto& waiting = m_nodes[src].sources[dst].waiting;
    auto key = [](const DataBody& b) { return std::make_tuple(b.created, b.session, b.seq); };
    auto it = std::upper_bound(waiting.begin(), waiting.end(), body, [&](const DataBody& a, const DataBody& b) {
        return key(a) < key(b);
    });
    waiting.insert(it, std::move(body));
}

void
Simulator::Stamp(NodeId src, DataBody& body, const RouteCache& cache)
{
    const Route* active = cache.Active();
    body.route = active->hops;
    body.hop = 1;
    body.epoch = cache.Epoch();
    body.alternatives.clear();
    if (Fep())
    {
        for (const Route* r : cache.Alternatives())
        {
            body.alternatives.push_back(*r);
        }
    }
    m_nodes[src].seenRoutes[body.session] = SeenRoute{body.route, Now()};
}

void
Simulator::Flush(NodeId src, NodeId dst)
{
    Node& n = m_nodes[src];
    RouteCache& cache = n.routes[dst];
    auto& waiting = n.sources[dst].waiting;
    while (n.alive && !waiting.empty() && cache.ActiveEligible(Now()))
    {
        DataBody body = std::move(waiting.front());
        waiting.pop_front();
        Stamp(src, body, cache);
        Packet p;
        p.kind = PacketKind::Data;
        p.to = body.route[1];
        p.body = std::move(body);
        Enqueue(src, std::move(p));
    }
}

bool
Simulator::SourceHasWork(NodeId src, NodeId dst) const
{
    auto it = m_nodes[src].sources.find(dst);
    if (it != m_nodes[src].sources.end() && !it->second.waiting.empty())
    {
        return true;
    }
    for (const auto& s : m_sessions)
    {
        if (s.spec.source == src && s.spec.destination == dst && s.originated < s.spec.total &&
            s.spec.startS * 1000.0 + s.originated * 1000.0 / s.spec.rate <= m_endMs)
        {
            return true;
        }
    }
    return false;
}

bool
Simulator::UseCache(NodeId src, NodeId dst, Cause cause, std::int64_t chain)
{
    RouteCache& cache = m_nodes[src].routes[dst];
    if (cache.ActiveEligible(Now()))
    {
        Flush(src, dst);
        return true;
    }
    if (cache.Empty())
    {
        return false;
    }
    const Route* r = cache.SwitchRoute(Now());
    if (!r)
    {
        return false;
    }
    ++m_c.routeSwitches;
    Log("switch", src, [&] {
        return Json{{"dst", dst},
                    {"cause", CauseName(cause)},
                    {"chain", chain},
                    {"route", r->hops},
                    {"epoch", cache.Epoch()},
                    {"rreq", 0}};
    });
    Flush(src, dst);
    return true;
}

void
Simulator::Resume(NodeId src, NodeId dst, Cause cause, std::int64_t chain)
{
    Node& n = m_nodes[src];
    if (!n.alive)
    {
        return;
    }
    SourceDiscovery& sd = n.sources[dst];
    if (UseCache(src, dst, cause, chain))
    {
        // A cached route became usable again; the outstanding discovery is moot.
        if (sd.pending)
        {
            sd.pending = false;
            ++sd.token;
        }
        return;
    }
    if (sd.pending || !SourceHasWork(src, dst))
    {
        return;
    }
    StartDiscovery(src, dst, cause, chain);
}

void
Simulator::StartDiscovery(NodeId src, NodeId dst, Cause cause, std::int64_t chain)
{
    SourceDiscovery& sd = m_nodes[src].sources[dst];
    sd.pending = true;
    sd.attempts = 0;
    sd.cause = cause;
    sd.chain = chain;
    SendRreq(src, dst);
}

void
Simulator::SendRreq(NodeId src, NodeId dst)
{
    Node& n = m_nodes[src];
    SourceDiscovery& sd = n.sources[dst];
    ++sd.attempts;
    sd.bid = n.nextBid++;
    const std::uint64_t token = ++sd.token;
    ++m_c.discoveries;

    Log("discover", src, [&] {
        const RouteCache& cache = n.routes[dst];
        int eligible = 0;
        for (const auto& r : cache.Routes())
        {
            if (cache.Eligible(r, Now()))
            {
                ++eligible;
            }
        }
        return Json{{"dst", dst},
                    {"bid", sd.bid},
                    {"attempt", sd.attempts},
                    {"cause", CauseName(sd.cause)},
                    {"chain", sd.chain},
                    {"cached_routes", cache.Routes().size()},
                    {"eligible_routes", eligible}};
    });

    n.discovery.MarkSeen(src, sd.bid);
    Packet p;
    p.kind = PacketKind::Rreq;
    p.to = kNoNode;
    p.cause = sd.cause;
    p.chain = sd.chain;
    p.body = RreqBody{src, dst, sd.bid, {src}};
    Enqueue(src, std::move(p));
    At(Now() + m_cfg.discoveryTimeoutMs, EventKind::Timer, [this, src, dst, token] {
        OnDiscoveryTimeout(src, dst, token);
    });
}

void
Simulator::OnDiscoveryTimeout(NodeId src, NodeId dst, std::uint64_t token)
{
    Node& n = m_nodes[src];
    SourceDiscovery& sd = n.sources[dst];
    if (!n.alive || !sd.pending || sd.token != token)
    {
        return;
    }
    if (UseCache(src, dst, sd.cause, sd.chain))
    {
        sd.pending = false;
        ++sd.token;
        return;
    }
    if (sd.attempts < m_cfg.maxDiscoveryAttempts)
    {
        SendRreq(src, dst);
        return;
    }
    sd.pending = false;
    ++sd.token;
    Log("discover_failed", src, [&] { return Json{{"dst", dst}, {"attempts", sd.attempts}}; });
    while (!sd.waiting.empty())
    {
        DataBody b = std::move(sd.waiting.front());
        sd.waiting.pop_front();
        Drop(b, src, "no_route");
    }
}

void
Simulator::OnRreq(NodeId id, const Packet& p)
{
    Node& n = m_nodes[id];
    const auto& rq = std::get<RreqBody>(p.body);
    if (Fep())
    {
        auto it = n.asleepUntil.find(p.from);
        if (it != n.asleepUntil.end() && it->second > Now())
        {
            return;
        }
    }
    if (id == rq.destination)
    {
        const auto key = std::make_pair(rq.source, rq.bid);
        auto it = n.collectors.find(key);
        if (it == n.collectors.end())
        {
            it = n.collectors.emplace(key, Collector{{}, p.cause, p.chain, false}).first;
            const NodeId src = rq.source;
            const std::uint32_t bid = rq.bid;
            At(Now() + m_cfg.collectWindowMs, EventKind::Timer, [this, id, src, bid] {
                CloseCollector(id, src, bid);
            });
        }
        if (!it->second.closed && std::find(rq.path.begin(), rq.path.end(), id) == rq.path.end())
        {
            auto path = rq.path;
            path.push_back(id);
            it->second.paths.push_back(std::move(path));
        }
        return;
    }
    if (CheckRouteRequest(n.discovery, id, rq.source, rq.bid, rq.path, m_cfg.maxHops) !=
        RreqVerdict::Forward)
    {
        return;
    }
    Packet fwd;
    fwd.kind = PacketKind::Rreq;
    fwd.to = kNoNode;
    fwd.cause = p.cause;
    fwd.chain = p.chain;
    RreqBody body = rq;
    body.path.push_back(id);
    fwd.body = std::move(body);
    Enqueue(id, std::move(fwd));
}

void
Simulator::CloseCollector(NodeId dst, NodeId src, std::uint32_t bid)
{
    Node& n = m_nodes[dst];
    auto it = n.collectors.find({src, bid});
    if (!n.alive || it == n.collectors.end() || it->second.closed)
    {
        return;
    }
    Collector& col = it->second;
    col.closed = true;
    auto routes = SelectReplyRoutes(col.paths, Fep() ? kMaxCachedRoutes : 1, m_cfg.maxHops);
    col.paths.clear();
    if (routes.empty())
    {
        return;
    }
    RrepBody body;
    body.source = src;
    body.destination = dst;
    body.bid = bid;
    body.path = routes.front().hops;
    body.hop = body.path.size() - 2;
    body.routes = std::move(routes);
    Packet p;
    p.kind = PacketKind::Rrep;
    p.to = body.path[body.hop];
    p.cause = col.cause;
    p.chain = col.chain;
    p.body = std::move(body);
    Enqueue(dst, std::move(p));
}

void
Simulator::OnRrep(NodeId id, Packet p)
{
    auto& body = std::get<RrepBody>(p.body);
    if (body.hop > 0)
    {
        --body.hop;
        p.to = body.path[body.hop];
        Enqueue(id, std::move(p));
        return;
    }
    Node& n = m_nodes[id];
    SourceDiscovery& sd = n.sources[body.destination];
    RouteCache& cache = n.routes[body.destination];
    if (!sd.pending && cache.ActiveEligible(Now()))
    {
        return;
    }
    cache.Install(body.routes, Now());
    sd.pending = false;
    sd.everInstalled = true;
    ++sd.token;
    Log("route_installed", id, [&] {
        Json routes = Json::array();
        for (const auto& r : cache.Routes())
        {
            routes.push_back({{"hops", r.hops}, {"grade", ToString(r.grade)}});
        }
        return Json{{"dst", body.destination}, {"bid", body.bid}, {"routes", routes}};
    });
    Flush(id, body.destination);
}

void
Simulator::OnData(NodeId id, Packet p)
{
    Node& n = m_nodes[id];
    DataBody& body = std::get<DataBody>(p.body);
    if (body.hop + 1 == body.route.size())
    {
        Deliver(body, id);
        return;
    }
    const NodeId uplink = body.route[body.hop - 1];
    n.ledger.RecordArrival(uplink, Now());
    n.router = true;
    SessionView& view = n.views[{uplink, body.session}];
    view.pending = body.remaining;
    view.altGrades.clear();
    for (const auto& r : body.alternatives)
    {
        if (!r.Contains(id))
        {
            view.altGrades.push_back(r.grade);
        }
    }
    view.lastArrival = Now();
    n.seenRoutes[body.session] = SeenRoute{body.route, Now()};
    Log("fwd_arrival", id, [&] {
        return Json{{"from", uplink},
                    {"session", body.session},
                    {"seq", body.seq},
                    {"remaining", body.remaining},
                    {"alt_grades", GradesJson(view.altGrades)}};
    });

    ++body.hop;
    p.to = body.route[body.hop];
    Enqueue(id, std::move(p));
    UpdateFlags(id);
}

void
Simulator::RecordForwarded(NodeId id, const DataBody& body)
{
    if (body.hop < 2)
    {
        return;
    }
    Node& n = m_nodes[id];
    const NodeId uplink = body.route[body.hop - 2];
    n.ledger.RecordForwarded(uplink, m_serviceMs);
    ++n.views[{uplink, body.session}].forwarded;
    ++n.forwarded;
    Log("fwd_done", id, [&] {
        return Json{{"uplink", uplink}, {"session", body.session}, {"seq", body.seq}, {"service_ms", m_serviceMs}};
    });
}

void
Simulator::Bounce(NodeId id, DataBody body, Cause cause)
{
    const std::size_t idx = body.hop - 1;
    const Edge edge{id, body.route[body.hop]};
    Session& session = m_sessions[body.session];
    if (cause == Cause::Break && session.brokenEpochs.insert(body.epoch).second)
    {
        ++m_c.linkBreaks;
        Log("link_break", id, [&] {
            return Json{{"session", body.session}, {"epoch", body.epoch}, {"to", edge.to}};
        });
    }
    std::int64_t chain = -1;
    SimTime until = 0.0;
    if (cause == Cause::Sleep)
    {
        chain = m_edgeChain.at(edge);
        until = m_sleepTable.Find(edge.from, edge.to)->until;
    }
    if (!m_nodes[id].alive)
    {
        Drop(body, id, "death");
        return;
    }

    NoticeBody nb;
    nb.source = body.route.front();
    nb.destination = body.route.back();
    nb.session = body.session;
    nb.edge = edge;
    nb.until = until;
    nb.path.assign(body.route.begin(), body.route.begin() + static_cast<std::ptrdiff_t>(idx) + 1);
    ++body.bounces;
    if (body.bounces > m_cfg.maxBounces)
    {
        Drop(body, id, "bounce_limit");
    }
    else
    {
        nb.carried.push_back(std::move(body));
    }
    const PacketKind kind = cause == Cause::Break ? PacketKind::RouteError : PacketKind::RouteSwitch;
    if (idx == 0)
    {
        HandleNotice(id, kind, std::move(nb), cause, chain);
        return;
    }
    nb.hop = idx - 1;
    Packet p;
    p.kind = kind;
    p.to = nb.path[nb.hop];
    p.cause = cause;
    p.chain = chain;
    p.body = std::move(nb);
    Enqueue(id, std::move(p));
}

void
Simulator::OnNotice(NodeId id, Packet p)
{
    auto& nb = std::get<NoticeBody>(p.body);
    if (nb.hop == 0)
    {
        HandleNotice(id, p.kind, std::move(nb), p.cause, p.chain);
        return;
    }
    --nb.hop;
    p.to = nb.path[nb.hop];
    Enqueue(id, std::move(p));
}

void
Simulator::HandleNotice(NodeId src, PacketKind kind, NoticeBody nb, Cause cause, std::int64_t chain)
{
    Node& n = m_nodes[src];
    RouteCache& cache = n.routes[nb.destination];
    Log("notice_rx", src, [&] {
        return Json{{"pkt", KindName(kind)},
                    {"dst", nb.destination},
                    {"session", nb.session},
                    {"edge", {nb.edge.from, nb.edge.to}},
                    {"until", nb.until},
                    {"chain", chain},
                    {"carried", nb.carried.size()}};
    });
    if (kind == PacketKind::RouteError)
    {
        cache.InvalidateEdge(nb.edge);
    }
    else
    {
        cache.Suspend(nb.edge, nb.until);
    }
    for (auto& b : nb.carried)
    {
        Buffer(src, nb.destination, std::move(b));
    }
    Resume(src, nb.destination, cause, chain);
}

EnableFlags
Simulator::Flags(NodeId id)
{
    const Node& n = m_nodes[id];
    return ComputeEnableFlags(static_cast<double>(n.energy.Residual()),
                              static_cast<double>(n.energy.Capacity()),
                              n.ledger.Service().InterServiceMs(),
                              n.ledger.Service().InterArrivalMs(),
                              m_cfg.energyThreshold);
}

void
Simulator::UpdateFlags(NodeId id)
{
    Node& n = m_nodes[id];
    if (!Fep() || !n.alive)
    {
        return;
    }
    const bool armed = Flags(id).Any();
    if (armed && !n.armed)
    {
        At(Now(), EventKind::SleepCheck, [this, id] { MaybeRequestSleep(id, "flag"); });
    }
    n.armed = armed;
}

void
Simulator::MaybeRequestSleep(NodeId id, std::string_view trigger)
{
    Node& n = m_nodes[id];
    if (!Fep() || !n.alive)
    {
        return;
    }
    const EnableFlags flags = Flags(id);
    const std::vector<NodeId> uplinks = n.ledger.UplinkSet(Now());
    if (!ShotPermitted(flags, n.budget, Now(), m_cfg.cooldownMs, uplinks.size()))
    {
        return;
    }

    std::vector<double> taus;
    for (NodeId a : uplinks)
    {
        taus.push_back(n.ledger.Rate(a, Now()));
    }
    SleepRequestBody body;
    body.requester = id;
    body.shot = n.budget.Used();
    for (std::size_t i = 0; i < uplinks.size(); ++i)
    {
        SlReqInputs in;
        in.history = n.ledger.History(uplinks[i]);
        in.tauAb = taus[i];
        in.uplinkTaus = taus;
        for (const auto& [key, view] : n.views)
        {
            if (key.first == uplinks[i] && view.lastArrival >= Now() - m_windowMs)
            {
                in.sessions.push_back(HopSessionView{view.forwarded, view.pending, view.altGrades});
            }
        }
        body.entries.emplace_back(uplinks[i], std::move(in));
    }
    for (NodeId a : uplinks)
    {
        n.ledger.RecordSleepRequest(a);
    }
    n.budget.RecordShot(Now());
    ++m_c.sleepShots;
    Log("sleep_shot", id, [&] {
        return Json{{"shot", body.shot},
                    {"trigger", trigger},
                    {"e", flags.energy},
                    {"ol", flags.overload},
                    {"residual_nj", n.energy.Residual()},
                    {"capacity_nj", n.energy.Capacity()},
                    {"ts_ms", n.ledger.Service().InterServiceMs()},
                    {"tr_ms", n.ledger.Service().InterArrivalMs()},
                    {"addressees", uplinks}};
    });

    Packet p;
    p.kind = PacketKind::SleepRequest;
    p.to = kNoNode;
    p.body = std::move(body);
    Enqueue(id, std::move(p));
}

void
Simulator::OnSleepRequest(NodeId id, const Packet& p)
{
    const auto& rq = std::get<SleepRequestBody>(p.body);
    const SlReqInputs* inputs = nullptr;
    for (const auto& [addressee, in] : rq.entries)
    {
        if (addressee == id)
        {
            inputs = &in;
        }
    }
    if (inputs == nullptr)
    {
        return;
    }
    const NodeId sleeper = rq.requester;
    const SlReqTrace trace = Evaluate(*inputs, m_cfg.maxNapMs, m_cfg.variant);
    Log("slreq_eval", id, [&] {
        return Json{{"requester", sleeper},
                    {"shot", rq.shot},
                    {"inputs", InputsJson(*inputs)},
                    {"trace", TraceJson(trace)}};
    });

    SleepReplyBody reply{id, sleeper, rq.shot, 0.0, Now()};
    Packet out;
    out.to = sleeper;
    out.cause = Cause::Sleep;
    if (!trace.Granted())
    {
        ++m_c.denies;
        Log("deny", id, [&] { return Json{{"sleeper", sleeper}, {"shot", rq.shot}}; });
        out.kind = PacketKind::SleepDeny;
        out.body = reply;
        Enqueue(id, std::move(out));
        return;
    }

    const double nap = *trace.napMs;
    const SimTime until = Now() + nap;
    m_sleepTable.Add(EdgeSleep{id, sleeper, Now(), until});
    const std::int64_t chain = m_nextChain++;
    m_edgeChain[Edge{id, sleeper}] = chain;
    ++m_c.grants;
    auto& best = m_nodes[sleeper].bestNap[rq.shot];
    best = std::max(best, nap);
    reply.napMs = nap;
    reply.until = until;
    Log("grant", id, [&] {
        return Json{{"sleeper", sleeper}, {"shot", rq.shot}, {"nap_ms", nap}, {"until", until}, {"chain", chain}};
    });
    m_events.Schedule(until, EventKind::SleepExpiry, [this] { ExpireSleeps(); });

    out.kind = PacketKind::SleepGrant;
    out.chain = chain;
    out.body = reply;
    Enqueue(id, std::move(out));
    ApplyGrantRedirects(id, sleeper, until, chain);
}

void
Simulator::OnSleepReply(NodeId id, const Packet& p)
{
    const auto& reply = std::get<SleepReplyBody>(p.body);
    if (p.kind != PacketKind::SleepGrant)
    {
        return;
    }
    auto& until = m_nodes[id].asleepUntil[reply.granter];
    until = std::max(until, reply.until);
    Log("grant_rx", id, [&] {
        return Json{{"granter", reply.granter}, {"nap_ms", reply.napMs}, {"until", reply.until}};
    });
}

void
Simulator::ApplyGrantRedirects(NodeId granter, NodeId sleeper, SimTime until, std::int64_t chain)
{
    const Edge edge{granter, sleeper};
    // Copy: a local notice may update the granter's own route records.
    const auto seen = m_nodes[granter].seenRoutes;
    for (const auto& [session, sr] : seen)
    {
        if (sr.lastSeen < Now() - m_windowMs || !PathUsesEdge(sr.route, edge))
        {
            continue;
        }
        const auto pos = std::find(sr.route.begin(), sr.route.end(), granter) - sr.route.begin();
        const std::size_t idx = static_cast<std::size_t>(pos);
        Log("redirect", granter, [&] {
            return Json{{"session", session}, {"sleeper", sleeper}, {"source", sr.route.front()}, {"chain", chain}};
        });
        NoticeBody nb;
        nb.source = sr.route.front();
        nb.destination = sr.route.back();
        nb.session = session;
        nb.edge = edge;
        nb.until = until;
        nb.path.assign(sr.route.begin(), sr.route.begin() + pos + 1);
        if (idx == 0)
        {
            HandleNotice(granter, PacketKind::RouteSwitch, std::move(nb), Cause::Sleep, chain);
            continue;
        }
        nb.hop = idx - 1;
        Packet p;
        p.kind = PacketKind::RouteSwitch;
        p.to = nb.path[nb.hop];
        p.cause = Cause::Sleep;
        p.chain = chain;
        p.body = std::move(nb);
        Enqueue(granter, std::move(p));
    }
}

void
Simulator::ExpireSleeps()
{
    for (const auto& e : m_sleepTable.Expire(Now()))
    {
        Log("expire", e.granter, [&] { return Json{{"sleeper", e.sleeper}, {"since", e.since}}; });
    }
}

void
Simulator::MobilityTick()
{
    const double dt = m_cfg.mobilityTickMs;
    Json applied = Json::array();
    for (auto& n : m_nodes)
    {
        n.mobility.Advance(dt);
        m_mobilityHash.Add(n.mobility.Position().x);
        m_mobilityHash.Add(n.mobility.Position().y);
        std::int64_t nj = 0;
        if (n.alive)
        {
            nj = Debit(n.id, EnergyUse::IdleTick, m_idleNj);
        }
        if (m_log.Enabled())
        {
            applied.push_back(nj);
        }
    }
    Log("idle", kNoNode, [&] { return Json{{"nj", applied}}; });
    for (auto& n : m_nodes)
    {
        CheckDeath(n.id);
        UpdateFlags(n.id);
    }
    At(Now() + dt, EventKind::MobilityTick, [this] { MobilityTick(); });
}

void
Simulator::SamplePartitions()
{
    std::vector<bool> alive;
    for (const auto& n : m_nodes)
    {
        alive.push_back(n.alive);
    }
    const int components = CountComponents(alive, [this](std::size_t a, std::size_t b) {
        return Linked(static_cast<NodeId>(a), static_cast<NodeId>(b));
    });
    m_c.maxPartitions = std::max(m_c.maxPartitions, components);
    Log("partition", kNoNode, [&] { return Json{{"components", components}}; });
    At(Now() + m_cfg.partitionPeriodS * 1000.0, EventKind::SamplePartitions, [this] { SamplePartitions(); });
}

void
Simulator::PeriodicSleepCheck()
{
    for (auto& n : m_nodes)
    {
        MaybeRequestSleep(n.id, "periodic");
    }
    At(Now() + m_cfg.recheckMs, EventKind::SleepCheck, [this] { PeriodicSleepCheck(); });
}

RunResult
Simulator::Run()
{
    Log("run", kNoNode, [&] {
        return Json{{"protocol", ToString(m_cfg.protocol)},
                    {"seed", m_cfg.seed},
                    {"nodes", m_nodes.size()},
                    {"sessions", m_sessions.size()},
                    {"rate_window_ms", m_windowMs},
                    {"ewma_alpha", m_cfg.ewmaAlpha},
                    {"energy_threshold", m_cfg.energyThreshold},
                    {"max_nap_ms", m_cfg.maxNapMs},
                    {"sleep_budget", m_cfg.sleepBudget},
                    {"variant_ph", ToString(m_cfg.variant.ph)},
                    {"variant_ccs", ToString(m_cfg.variant.ccs)},
                    {"table3_orientation", ToString(m_cfg.variant.table3)}};
    });
    for (const auto& n : m_nodes)
    {
        m_mobilityHash.Add(n.mobility.Position().x);
        m_mobilityHash.Add(n.mobility.Position().y);
        m_mobilityHash.Add(n.range);
        Log("node", n.id, [&] {
            return Json{{"x", n.mobility.Position().x},
                        {"y", n.mobility.Position().y},
                        {"range", n.range},
                        {"capacity_nj", n.energy.Capacity()},
                        {"initial_consumed_nj", n.initialConsumed}};
        });
    }
    for (const auto& s : m_sessions)
    {
        m_trafficHash.Add(static_cast<std::uint64_t>(s.spec.source));
        m_trafficHash.Add(static_cast<std::uint64_t>(s.spec.destination));
        m_trafficHash.Add(s.spec.rate);
        m_trafficHash.Add(static_cast<std::uint64_t>(s.spec.total));
        m_trafficHash.Add(s.spec.startS);
        Log("session", s.spec.source, [&] {
            return Json{{"session", s.id},
                        {"dst", s.spec.destination},
                        {"rate", s.spec.rate},
                        {"total", s.spec.total},
                        {"start_s", s.spec.startS}};
        });
        if (s.spec.total > 0)
        {
            const SessionId id = s.id;
            At(s.spec.startS * 1000.0, EventKind::TrafficEmit, [this, id] { Originate(id, 0); });
        }
    }

    At(0.0, EventKind::SamplePartitions, [this] { SamplePartitions(); });
    At(m_cfg.mobilityTickMs, EventKind::MobilityTick, [this] { MobilityTick(); });
    if (Fep())
    {
        At(m_cfg.recheckMs, EventKind::SleepCheck, [this] { PeriodicSleepCheck(); });
    }

    while (!m_events.Empty() && m_events.NextTime() <= m_endMs)
    {
        auto e = m_events.Pop();
        e.action();
    }

    if (m_live.size() != m_c.dataSent - m_c.dataDelivered - m_c.dataDropped)
    {
        throw std::logic_error("packet conservation violated");
    }

    RunResult result;
    std::int64_t consumed = 0;
    for (const auto& n : m_nodes)
    {
        NodeSummary s;
        s.id = n.id;
        s.alive = n.alive;
        s.capacityNj = n.energy.Capacity();
        s.initialConsumedNj = n.initialConsumed;
        s.consumedNj = n.energy.Consumed();
        s.shots = n.budget.Used();
        for (const auto& [shot, nap] : n.bestNap)
        {
            s.lostSleepMs += LostSleep(nap, m_cfg.maxNapMs);
        }
        s.router = n.router;
        s.belowThreshold = n.energy.ResidualFraction() < m_cfg.energyThreshold;
        s.forwarded = n.forwarded;
        consumed += n.energy.Consumed() - n.initialConsumed;
        m_c.maxLostSleepMs = std::max(m_c.maxLostSleepMs, s.lostSleepMs);
        if (s.router)
        {
            ++m_c.routers;
            if (s.belowThreshold)
            {
                ++m_c.routersBelowThreshold;
            }
        }
        result.nodes.push_back(s);
    }
    if (consumed != m_debited)
    {
        throw std::logic_error("energy accounting mismatch");
    }
    m_c.nodes = static_cast<std::uint32_t>(m_nodes.size());
    m_c.sessions = static_cast<std::uint32_t>(m_sessions.size());
    m_c.energyConsumedNj = consumed;
    m_c.mobilityHash = m_mobilityHash.Value();
    m_c.trafficHash = m_trafficHash.Value();
    Log("end", kNoNode, [&] {
        return Json{{"in_flight", m_live.size()}, {"energy_consumed_nj", consumed}};
    });

    result.report = Finalize(m_c, m_cfg.protocol, m_cfg.seed);
    result.eventLog = m_log.Text();
    return result;
}

} // namespace

RunResult
RunScenario(const ScenarioConfig& config, const RunOptions& options)
{
    Validate(config);
    Simulator sim(config, options);
    return sim.Run();
}

} // namespace fep
