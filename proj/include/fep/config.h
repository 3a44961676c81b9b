#ifndef FEP_CONFIG_H
#define FEP_CONFIG_H

// Scenario description and its flat "key = value" file format.

#include "fep/fuzzy.h"
#include "fep/types.h"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fep
{

enum class Protocol
{
    Baseline,
    Fep,
};

std::string_view ToString(Protocol p);
std::optional<Protocol> ParseProtocol(std::string_view text);

struct SessionSpec
{
    NodeId source = 0;
    NodeId destination = 0;
    double rate = 4.0; ///< packets per second
    std::uint32_t total = 200;
    double startS = 0.0;
};

/// Fixed placement for constructed topologies.
struct NodePlacement
{
    NodeId id = 0;
    double x = 0.0;
    double y = 0.0;
    double residualFraction = 1.0;
};

struct EnergyParams
{
    double capacityJ = 25.0;
    double txDataMj = 5.0;
    double rxDataMj = 3.0;
    double idleMjPerTick = 0.1;
};

/// Bytes on air per packet kind.
struct PacketSizes
{
    int rreqBase = 64;
    int rreqPerHop = 8;
    int rrepBase = 64;
    int rrepPerHopPerRoute = 8;
    int notice = 64;
    int sleepMessage = 32;
    int dataPayload = 512;
    int fepMetadata = 24;
};

struct ScenarioConfig
{
    // scenario
    double arenaWidth = 600.0;
    double arenaHeight = 600.0;
    int nodeCount = 60;
    double speedMin = 5.0;
    double speedMax = 15.0;
    double rangeMin = 100.0;
    double rangeMax = 100.0;
    double simTimeS = 200.0;
    std::uint64_t seed = 1;
    Protocol protocol = Protocol::Fep;
    double mobilityTickMs = 100.0;
    double partitionPeriodS = 10.0;

    // traffic; `sessions` overrides the random draw when non-empty
    int sessionCount = 20;
    std::uint32_t packetsPerSession = 200;
    double sessionRate = 4.0;
    double sessionStartMaxS = 50.0;
    std::vector<SessionSpec> sessions;

    EnergyParams energy;
    PacketSizes sizes;

    // sleep overlay
    double maxNapMs = 50.0;
    std::uint32_t sleepBudget = 10;
    double cooldownMs = 50.0;
    double recheckMs = 1000.0;
    double energyThreshold = 0.4;
    double rateWindowS = 5.0;
    double ewmaAlpha = 0.2;
    FormulaVariant variant;

    // routing
    int maxHops = 16;
    double collectWindowMs = 30.0;
    double discoveryTimeoutMs = 500.0;
    int maxDiscoveryAttempts = 3;
    int maxBounces = 5;

    // radio
    double serviceRate = 200.0; ///< packets per second
    double propagationMs = 1.0;

    std::vector<NodePlacement> placements;
};

/// Parse or validation failure. line() is 0 for whole-config problems.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(const std::string& source, int line, const std::string& message);

    int line() const
    {
        return m_line;
    }

  private:
    int m_line;
};

/// Reads a config over the defaults above. Throws ConfigError.
ScenarioConfig ParseConfig(std::istream& in, const std::string& sourceName = "<config>");
ScenarioConfig LoadConfig(const std::string& path);

/// Throws ConfigError describing the first invalid field.
void Validate(const ScenarioConfig& config);

/// Writes a config that ParseConfig reads back to an equal scenario.
std::string ToConfigText(const ScenarioConfig& config);

} // namespace fep

#endif // FEP_CONFIG_H
