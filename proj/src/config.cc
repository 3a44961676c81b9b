#include "fep/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fep
{

std::string_view
ToString(Protocol p)
{
    return p == Protocol::Baseline ? "baseline" : "fep";
}

std::optional<Protocol>
ParseProtocol(std::string_view text)
{
    if (text == "baseline")
        return Protocol::Baseline;
    if (text == "fep")
        return Protocol::Fep;
    return std::nullopt;
}

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message
                                  : source + ": " + message),
      m_line(line)
{
}

namespace
{

std::string_view
Trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view>
Fields(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size())
    {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double
ToDouble(std::string_view s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    {
        throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

template <typename Int>
Int
ToInt(std::string_view s)
{
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
    {
        throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

std::string
Num(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

Setter
Real(double ScenarioConfig::*field)
{
    return [field](ScenarioConfig& c, std::string_view v) { c.*field = ToDouble(v); };
}

Setter
EnergyField(double EnergyParams::*field)
{
    return [field](ScenarioConfig& c, std::string_view v) { c.energy.*field = ToDouble(v); };
}

Setter
SizeField(int PacketSizes::*field)
{
    return [field](ScenarioConfig& c, std::string_view v) { c.sizes.*field = ToInt<int>(v); };
}

const std::map<std::string, Setter, std::less<>>&
Setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"scenario.arena_width", Real(&ScenarioConfig::arenaWidth)},
        {"scenario.arena_height", Real(&ScenarioConfig::arenaHeight)},
        {"scenario.nodes",
         [](ScenarioConfig& c, std::string_view v) { c.nodeCount = ToInt<int>(v); }},
        {"scenario.speed_min", Real(&ScenarioConfig::speedMin)},
        {"scenario.speed_max", Real(&ScenarioConfig::speedMax)},
        {"scenario.range_min", Real(&ScenarioConfig::rangeMin)},
        {"scenario.range_max", Real(&ScenarioConfig::rangeMax)},
        {"scenario.sim_time_s", Real(&ScenarioConfig::simTimeS)},
        {"scenario.seed",
         [](ScenarioConfig& c, std::string_view v) { c.seed = ToInt<std::uint64_t>(v); }},
        {"scenario.protocol",
         [](ScenarioConfig& c, std::string_view v) {
             auto p = ParseProtocol(v);
             if (!p)
                 throw std::invalid_argument("protocol must be 'baseline' or 'fep'");
             c.protocol = *p;
         }},
        {"scenario.mobility_tick_ms", Real(&ScenarioConfig::mobilityTickMs)},
        {"scenario.partition_period_s", Real(&ScenarioConfig::partitionPeriodS)},

        {"traffic.sessions",
         [](ScenarioConfig& c, std::string_view v) { c.sessionCount = ToInt<int>(v); }},
        {"traffic.packets",
         [](ScenarioConfig& c, std::string_view v) {
             c.packetsPerSession = ToInt<std::uint32_t>(v);
         }},
        {"traffic.rate", Real(&ScenarioConfig::sessionRate)},
        {"traffic.start_max_s", Real(&ScenarioConfig::sessionStartMaxS)},
        {"traffic.session",
         [](ScenarioConfig& c, std::string_view v) {
             auto f = Fields(v);
             if (f.size() != 5)
                 throw std::invalid_argument("session needs 'src dst rate total start_s'");
             c.sessions.push_back(SessionSpec{ToInt<int>(f[0]),
                                              ToInt<int>(f[1]),
                                              ToDouble(f[2]),
                                              ToInt<std::uint32_t>(f[3]),
                                              ToDouble(f[4])});
         }},

        {"energy.capacity_j", EnergyField(&EnergyParams::capacityJ)},
        {"energy.tx_data_mj", EnergyField(&EnergyParams::txDataMj)},
        {"energy.rx_data_mj", EnergyField(&EnergyParams::rxDataMj)},
        {"energy.idle_mj_per_tick", EnergyField(&EnergyParams::idleMjPerTick)},

        {"fep.max_nap_ms", Real(&ScenarioConfig::maxNapMs)},
        {"fep.sleep_budget",
         [](ScenarioConfig& c, std::string_view v) { c.sleepBudget = ToInt<std::uint32_t>(v); }},
        {"fep.cooldown_ms", Real(&ScenarioConfig::cooldownMs)},
        {"fep.recheck_ms", Real(&ScenarioConfig::recheckMs)},
        {"fep.energy_threshold", Real(&ScenarioConfig::energyThreshold)},
        {"fep.rate_window_s", Real(&ScenarioConfig::rateWindowS)},
        {"fep.ewma_alpha", Real(&ScenarioConfig::ewmaAlpha)},
        {"fep.variant_ph",
         [](ScenarioConfig& c, std::string_view v) {
             auto p = ParsePhVariant(v);
             if (!p)
                 throw std::invalid_argument("variant_ph must be 'semantic' or 'as-printed'");
             c.variant.ph = *p;
         }},
        {"fep.variant_ccs",
         [](ScenarioConfig& c, std::string_view v) {
             auto p = ParseCcsVariant(v);
             if (!p)
                 throw std::invalid_argument("variant_ccs must be 'semantic' or 'as-printed'");
             c.variant.ccs = *p;
         }},
        {"fep.table3_orientation",
         [](ScenarioConfig& c, std::string_view v) {
             auto p = ParseTable3Orientation(v);
             if (!p)
                 throw std::invalid_argument(
                     "table3_orientation must be 'temp-dominant' or 'as-printed-rows'");
             c.variant.table3 = *p;
         }},

        {"routing.max_hops",
         [](ScenarioConfig& c, std::string_view v) { c.maxHops = ToInt<int>(v); }},
        {"routing.collect_window_ms", Real(&ScenarioConfig::collectWindowMs)},
        {"routing.discovery_timeout_ms", Real(&ScenarioConfig::discoveryTimeoutMs)},
        {"routing.max_discovery_attempts",
         [](ScenarioConfig& c, std::string_view v) { c.maxDiscoveryAttempts = ToInt<int>(v); }},
        {"routing.max_bounces",
         [](ScenarioConfig& c, std::string_view v) { c.maxBounces = ToInt<int>(v); }},

        {"radio.service_rate", Real(&ScenarioConfig::serviceRate)},
        {"radio.propagation_ms", Real(&ScenarioConfig::propagationMs)},

        {"packets.rreq_base", SizeField(&PacketSizes::rreqBase)},
        {"packets.rreq_per_hop", SizeField(&PacketSizes::rreqPerHop)},
        {"packets.rrep_base", SizeField(&PacketSizes::rrepBase)},
        {"packets.rrep_per_hop_route", SizeField(&PacketSizes::rrepPerHopPerRoute)},
        {"packets.notice", SizeField(&PacketSizes::notice)},
        {"packets.sleep_message", SizeField(&PacketSizes::sleepMessage)},
        {"packets.data_payload", SizeField(&PacketSizes::dataPayload)},
        {"packets.fep_metadata", SizeField(&PacketSizes::fepMetadata)},

        {"topology.node",
         [](ScenarioConfig& c, std::string_view v) {
             auto f = Fields(v);
             if (f.size() != 3 && f.size() != 4)
                 throw std::invalid_argument("node needs 'id x y [residual_fraction]'");
             NodePlacement p{ToInt<int>(f[0]), ToDouble(f[1]), ToDouble(f[2]), 1.0};
             if (f.size() == 4)
                 p.residualFraction = ToDouble(f[3]);
             c.placements.push_back(p);
         }},
    };
    return table;
}

void
Require(bool ok, const std::string& what)
{
    if (!ok)
    {
        throw ConfigError("<config>", 0, what);
    }
}

} // namespace

ScenarioConfig
ParseConfig(std::istream& in, const std::string& sourceName)
{
    ScenarioConfig config;
    std::string section;
    std::string raw;
    int lineNo = 0;
    while (std::getline(in, raw))
    {
        ++lineNo;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
        {
            line = line.substr(0, hash);
        }
        line = Trim(line);
        if (line.empty())
        {
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']')
            {
                throw ConfigError(sourceName, lineNo, "unterminated section header");
            }
            section = std::string(Trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError(sourceName, lineNo, "expected 'key = value'");
        }
        const std::string key = std::string(Trim(line.substr(0, eq)));
        const std::string_view value = Trim(line.substr(eq + 1));
        if (section.empty())
        {
            throw ConfigError(sourceName, lineNo, "key '" + key + "' outside any section");
        }
        const std::string full = section + "." + key;
        const auto& setters = Setters();
        auto it = setters.find(full);
        if (it == setters.end())
        {
            throw ConfigError(sourceName, lineNo, "unknown key '" + key + "' in [" + section + "]");
        }
        try
        {
            it->second(config, value);
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(sourceName, lineNo, full + ": " + e.what());
        }
    }
    return config;
}

ScenarioConfig
LoadConfig(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError(path, 0, "cannot open file");
    }
    return ParseConfig(in, path);
}

void
Validate(const ScenarioConfig& c)
{
    Require(c.arenaWidth > 0 && c.arenaHeight > 0, "arena dimensions must be positive");
    Require(c.nodeCount >= 1, "nodes must be at least 1");
    Require(c.speedMin >= 0 && c.speedMax >= c.speedMin, "speed range must satisfy 0 <= min <= max");
    Require(c.rangeMin > 0 && c.rangeMax >= c.rangeMin, "radio range must satisfy 0 < min <= max");
    Require(c.simTimeS > 0, "sim_time_s must be positive");
    Require(c.mobilityTickMs > 0, "mobility_tick_ms must be positive");
    Require(c.partitionPeriodS > 0, "partition_period_s must be positive");
    Require(c.sessionCount >= 0, "sessions must be non-negative");
    Require(c.sessionRate > 0, "traffic rate must be positive");
    Require(c.sessionStartMaxS >= 0, "start_max_s must be non-negative");
    Require(c.sessions.empty() || c.nodeCount >= 2, "sessions need at least two nodes");
    Require(!c.sessions.empty() || c.sessionCount == 0 || c.nodeCount >= 2,
            "sessions need at least two nodes");
    for (const auto& s : c.sessions)
    {
        Require(s.source >= 0 && s.source < c.nodeCount && s.destination >= 0 &&
                    s.destination < c.nodeCount && s.source != s.destination,
                "session endpoints must be distinct node ids");
        Require(s.rate > 0 && s.startS >= 0, "session rate must be positive and start non-negative");
    }
    Require(c.energy.capacityJ > 0, "capacity_j must be positive");
    Require(c.energy.txDataMj >= 0 && c.energy.rxDataMj >= 0 && c.energy.idleMjPerTick >= 0,
            "energy costs must be non-negative");
    Require(c.sizes.rreqBase > 0 && c.sizes.rreqPerHop >= 0 && c.sizes.rrepBase > 0 &&
                c.sizes.rrepPerHopPerRoute >= 0 && c.sizes.notice > 0 && c.sizes.sleepMessage > 0 &&
                c.sizes.dataPayload > 0 && c.sizes.fepMetadata >= 0,
            "packet sizes must be positive");
    Require(c.maxNapMs > 0, "max_nap_ms must be positive");
    Require(c.cooldownMs >= 0, "cooldown_ms must be non-negative");
    Require(c.recheckMs > 0, "recheck_ms must be positive");
    Require(c.energyThreshold > 0 && c.energyThreshold < 1, "energy_threshold must lie in (0,1)");
    Require(c.rateWindowS > 0, "rate_window_s must be positive");
    Require(c.ewmaAlpha > 0 && c.ewmaAlpha <= 1, "ewma_alpha must lie in (0,1]");
    Require(c.maxHops >= 1, "max_hops must be at least 1");
    Require(c.collectWindowMs >= 0, "collect_window_ms must be non-negative");
    Require(c.discoveryTimeoutMs > 0, "discovery_timeout_ms must be positive");
    Require(c.maxDiscoveryAttempts >= 1, "max_discovery_attempts must be at least 1");
    Require(c.maxBounces >= 0, "max_bounces must be non-negative");
    Require(c.serviceRate > 0, "service_rate must be positive");
    Require(c.propagationMs >= 0, "propagation_ms must be non-negative");
    if (!c.placements.empty())
    {
        Require(static_cast<int>(c.placements.size()) == c.nodeCount,
                "topology must place every node exactly once");
        std::vector<bool> seen(c.nodeCount, false);
        for (const auto& p : c.placements)
        {
            Require(p.id >= 0 && p.id < c.nodeCount && !seen[p.id], "topology node ids must be 0..nodes-1");
            seen[p.id] = true;
            Require(p.x >= 0 && p.x <= c.arenaWidth && p.y >= 0 && p.y <= c.arenaHeight,
                    "topology positions must lie in the arena");
            Require(p.residualFraction > 0 && p.residualFraction <= 1,
                    "residual_fraction must lie in (0,1]");
        }
    }
}

std::string
ToConfigText(const ScenarioConfig& c)
{
    std::ostringstream out;
    out << "[scenario]\n"
        << "arena_width = " << Num(c.arenaWidth) << "\n"
        << "arena_height = " << Num(c.arenaHeight) << "\n"
        << "nodes = " << c.nodeCount << "\n"
        << "speed_min = " << Num(c.speedMin) << "\n"
        << "speed_max = " << Num(c.speedMax) << "\n"
        << "range_min = " << Num(c.rangeMin) << "\n"
        << "range_max = " << Num(c.rangeMax) << "\n"
        << "sim_time_s = " << Num(c.simTimeS) << "\n"
        << "seed = " << c.seed << "\n"
        << "protocol = " << ToString(c.protocol) << "\n"
        << "mobility_tick_ms = " << Num(c.mobilityTickMs) << "\n"
        << "partition_period_s = " << Num(c.partitionPeriodS) << "\n"
        << "\n[traffic]\n"
        << "sessions = " << c.sessionCount << "\n"
        << "packets = " << c.packetsPerSession << "\n"
        << "rate = " << Num(c.sessionRate) << "\n"
        << "start_max_s = " << Num(c.sessionStartMaxS) << "\n";
    for (const auto& s : c.sessions)
    {
        out << "session = " << s.source << " " << s.destination << " " << Num(s.rate) << " "
            << s.total << " " << Num(s.startS) << "\n";
    }
    out << "\n[energy]\n"
        << "capacity_j = " << Num(c.energy.capacityJ) << "\n"
        << "tx_data_mj = " << Num(c.energy.txDataMj) << "\n"
        << "rx_data_mj = " << Num(c.energy.rxDataMj) << "\n"
        << "idle_mj_per_tick = " << Num(c.energy.idleMjPerTick) << "\n"
        << "\n[fep]\n"
        << "max_nap_ms = " << Num(c.maxNapMs) << "\n"
        << "sleep_budget = " << c.sleepBudget << "\n"
        << "cooldown_ms = " << Num(c.cooldownMs) << "\n"
        << "recheck_ms = " << Num(c.recheckMs) << "\n"
        << "energy_threshold = " << Num(c.energyThreshold) << "\n"
        << "rate_window_s = " << Num(c.rateWindowS) << "\n"
        << "ewma_alpha = " << Num(c.ewmaAlpha) << "\n"
        << "variant_ph = " << ToString(c.variant.ph) << "\n"
        << "variant_ccs = " << ToString(c.variant.ccs) << "\n"
        << "table3_orientation = " << ToString(c.variant.table3) << "\n"
        << "\n[routing]\n"
        << "max_hops = " << c.maxHops << "\n"
        << "collect_window_ms = " << Num(c.collectWindowMs) << "\n"
        << "discovery_timeout_ms = " << Num(c.discoveryTimeoutMs) << "\n"
        << "max_discovery_attempts = " << c.maxDiscoveryAttempts << "\n"
        << "max_bounces = " << c.maxBounces << "\n"
        << "\n[radio]\n"
        << "service_rate = " << Num(c.serviceRate) << "\n"
        << "propagation_ms = " << Num(c.propagationMs) << "\n"
        << "\n[packets]\n"
        << "rreq_base = " << c.sizes.rreqBase << "\n"
        << "rreq_per_hop = " << c.sizes.rreqPerHop << "\n"
        << "rrep_base = " << c.sizes.rrepBase << "\n"
        << "rrep_per_hop_route = " << c.sizes.rrepPerHopPerRoute << "\n"
        << "notice = " << c.sizes.notice << "\n"
        << "sleep_message = " << c.sizes.sleepMessage << "\n"
        << "data_payload = " << c.sizes.dataPayload << "\n"
        << "fep_metadata = " << c.sizes.fepMetadata << "\n";
    if (!c.placements.empty())
    {
        out << "\n[topology]\n";
        for (const auto& p : c.placements)
        {
            out << "node = " << p.id << " " << Num(p.x) << " " << Num(p.y) << " "
                << Num(p.residualFraction) << "\n";
        }
    }
    return out.str();
}

} // namespace fep
