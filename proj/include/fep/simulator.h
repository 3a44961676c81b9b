#ifndef FEP_SIMULATOR_H
#define FEP_SIMULATOR_H

// One deterministic run of a scenario under the baseline or the FEP protocol.

#include "fep/config.h"
#include "fep/metrics.h"

#include <cstdint>
#include <string>
#include <vector>

namespace fep
{

struct RunOptions
{
    /// Keep the JSON-lines event log in the result.
    bool recordLog = false;
};

struct NodeSummary
{
    NodeId id = kNoNode;
    bool alive = true;
    std::int64_t capacityNj = 0;
    std::int64_t initialConsumedNj = 0;
    std::int64_t consumedNj = 0;
    std::uint32_t shots = 0;
    double lostSleepMs = 0.0;
    /// Received at least one data packet for forwarding.
    bool router = false;
    bool belowThreshold = false;
    std::uint64_t forwarded = 0;
};

struct RunResult
{
    MetricsReport report;
    std::string eventLog;
    std::vector<NodeSummary> nodes;
};

/// Validates the config, then executes the run to sim_time_s.
/// Throws ConfigError on an invalid config and std::logic_error when an
/// internal accounting invariant fails.
RunResult RunScenario(const ScenarioConfig& config, const RunOptions& options = {});

} // namespace fep

#endif // FEP_SIMULATOR_H
