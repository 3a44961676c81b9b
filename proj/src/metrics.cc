#include "fep/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

namespace fep
{

namespace
{

std::optional<double>
Quotient(double num, double den)
{
    if (den == 0.0)
    {
        return std::nullopt;
    }
    return num / den;
}

std::string
Num(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string
Hex(std::uint64_t v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

MetricsReport
Finalize(const RunCounters& c, Protocol protocol, std::uint64_t seed)
{
    MetricsReport r;
    r.protocol = protocol;
    r.seed = seed;
    r.nodes = static_cast<int>(c.nodes);
    r.counters = c;

    const double nodes = c.nodes;
    const double sessions = c.sessions;
    r.deliveryRatioPct = Quotient(static_cast<double>(c.dataDelivered) * 100.0, c.dataSent);
    r.perNodeEnergyJ = Quotient(static_cast<double>(c.energyConsumedNj) / 1e9, nodes);
    r.perNodeMessageOverhead = Quotient(static_cast<double>(c.txPackets), nodes);
    r.perNodeControlOverhead = Quotient(static_cast<double>(c.txControlPackets), nodes);
    r.delayPerSessionMs = Quotient(c.delaySumMs, sessions);
    r.linkBreaksPerSession = Quotient(static_cast<double>(c.linkBreaks), sessions);
    r.repairCostPerNodePerSession =
        Quotient(static_cast<double>(c.repairMessages), sessions * nodes);
    r.maxPartitions = c.maxPartitions;
    return r;
}

std::vector<std::pair<std::string, std::optional<double>>>
MetricValues(const MetricsReport& r)
{
    return {
        {"delivery_ratio_pct", r.deliveryRatioPct},
        {"per_node_energy_j", r.perNodeEnergyJ},
        {"per_node_message_overhead", r.perNodeMessageOverhead},
        {"per_node_control_overhead", r.perNodeControlOverhead},
        {"delay_per_session_ms", r.delayPerSessionMs},
        {"link_breaks_per_session", r.linkBreaksPerSession},
        {"repair_cost_per_node_per_session", r.repairCostPerNodePerSession},
        {"max_partitions", static_cast<double>(r.maxPartitions)},
        {"rreq_packets", static_cast<double>(r.counters.rreqPackets)},
    };
}

std::string
CsvHeader()
{
    return "protocol,seed,nodes,delivery_ratio_pct,per_node_energy_j,per_node_message_overhead,"
           "per_node_control_overhead,delay_per_session_ms,link_breaks_per_session,"
           "repair_cost_per_node_per_session,max_partitions,sessions,data_sent,data_delivered,"
           "data_dropped,rreq_packets,discoveries,route_switches,sleep_shots,grants,denies,deaths,"
           "routers,routers_below_threshold,max_lost_sleep_ms,mobility_hash,traffic_hash";
}

std::string
CsvRow(const MetricsReport& r)
{
    auto opt = [](const std::optional<double>& v) { return v ? Num(*v) : std::string(); };
    const auto& c = r.counters;
    std::string row;
    row += std::string(ToString(r.protocol)) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.nodes) + ",";
    row += opt(r.deliveryRatioPct) + "," + opt(r.perNodeEnergyJ) + "," +
           opt(r.perNodeMessageOverhead) + "," + opt(r.perNodeControlOverhead) + "," +
           opt(r.delayPerSessionMs) + "," + opt(r.linkBreaksPerSession) + "," +
           opt(r.repairCostPerNodePerSession) + "," + std::to_string(r.maxPartitions) + ",";
    row += std::to_string(c.sessions) + "," + std::to_string(c.dataSent) + "," +
           std::to_string(c.dataDelivered) + "," + std::to_string(c.dataDropped) + "," +
           std::to_string(c.rreqPackets) + "," + std::to_string(c.discoveries) + "," +
           std::to_string(c.routeSwitches) + "," + std::to_string(c.sleepShots) + "," +
           std::to_string(c.grants) + "," + std::to_string(c.denies) + "," +
           std::to_string(c.deaths) + "," + std::to_string(c.routers) + "," +
           std::to_string(c.routersBelowThreshold) + "," + Num(c.maxLostSleepMs) + "," +
           Hex(c.mobilityHash) + "," + Hex(c.trafficHash);
    return row;
}

Json
ToJson(const MetricsReport& r)
{
    Json j;
    j["protocol"] = ToString(r.protocol);
    j["seed"] = r.seed;
    j["nodes"] = r.nodes;
    Json metrics = Json::object();
    for (const auto& [name, value] : MetricValues(r))
    {
        if (name == "rreq_packets")
            continue;
        metrics[name] = value ? Json(*value) : Json(nullptr);
    }
    j["metrics"] = metrics;
    const auto& c = r.counters;
    j["counters"] = {
        {"sessions", c.sessions},
        {"data_sent", c.dataSent},
        {"data_delivered", c.dataDelivered},
        {"data_dropped", c.dataDropped},
        {"delay_sum_ms", c.delaySumMs},
        {"energy_consumed_nj", c.energyConsumedNj},
        {"tx_packets", c.txPackets},
        {"tx_control_packets", c.txControlPackets},
        {"link_breaks", c.linkBreaks},
        {"repair_messages", c.repairMessages},
        {"rreq_packets", c.rreqPackets},
        {"discoveries", c.discoveries},
        {"route_switches", c.routeSwitches},
        {"sleep_shots", c.sleepShots},
        {"grants", c.grants},
        {"denies", c.denies},
        {"deaths", c.deaths},
        {"routers", c.routers},
        {"routers_below_threshold", c.routersBelowThreshold},
        {"max_lost_sleep_ms", c.maxLostSleepMs},
    };
    j["hashes"] = {{"mobility", Hex(c.mobilityHash)}, {"traffic", Hex(c.trafficHash)}};
    return j;
}

double
ImprovementPct(double x, double y)
{
    const double m = std::max(x, y);
    if (m == 0.0)
    {
        return 0.0;
    }
    return std::fabs(x - y) * 100.0 / m;
}

double
Median(std::vector<double> values)
{
    if (values.empty())
    {
        throw std::invalid_argument("Median of an empty set");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::map<std::string, MetricSummary>
Aggregate(const std::vector<MetricsReport>& reports)
{
    if (reports.empty())
    {
        throw std::invalid_argument("Aggregate: no reports");
    }
    std::map<std::string, std::vector<double>> columns;
    for (const auto& r : reports)
    {
        for (const auto& [name, value] : MetricValues(r))
        {
            if (value)
            {
                columns[name].push_back(*value);
            }
        }
    }
    std::map<std::string, MetricSummary> out;
    for (auto& [name, values] : columns)
    {
        MetricSummary s;
        s.count = values.size();
        s.median = Median(values);
        s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        s.min = *std::min_element(values.begin(), values.end());
        s.max = *std::max_element(values.begin(), values.end());
        out[name] = s;
    }
    return out;
}

PairedSummary
AggregatePaired(const std::vector<MetricsReport>& baseline, const std::vector<MetricsReport>& fep)
{
    std::map<std::uint64_t, const MetricsReport*> base;
    std::map<std::uint64_t, const MetricsReport*> treat;
    for (const auto& r : baseline)
    {
        base[r.seed] = &r;
    }
    for (const auto& r : fep)
    {
        treat[r.seed] = &r;
    }
    std::set<std::uint64_t> a, b;
    for (auto& kv : base)
        a.insert(kv.first);
    for (auto& kv : treat)
        b.insert(kv.first);
    if (a != b || a.empty() || base.size() != baseline.size() || treat.size() != fep.size())
    {
        throw std::invalid_argument("AggregatePaired: seed sets do not match");
    }

    PairedSummary out;
    std::map<std::string, std::vector<double>> baseCols, fepCols;
    for (std::uint64_t seed : a)
    {
        out.seeds.push_back(seed);
        const auto bv = MetricValues(*base[seed]);
        const auto fv = MetricValues(*treat[seed]);
        for (std::size_t i = 0; i < bv.size(); ++i)
        {
            if (bv[i].second && fv[i].second)
            {
                out.deltas[bv[i].first].push_back(*fv[i].second - *bv[i].second);
                baseCols[bv[i].first].push_back(*bv[i].second);
                fepCols[bv[i].first].push_back(*fv[i].second);
            }
        }
    }
    for (const auto& [name, d] : out.deltas)
    {
        out.medianDelta[name] = Median(d);
        out.baselineMedian[name] = Median(baseCols[name]);
        out.fepMedian[name] = Median(fepCols[name]);
        out.improvementPct[name] = ImprovementPct(out.fepMedian[name], out.baselineMedian[name]);
    }
    return out;
}

} // namespace fep
