#ifndef FEP_METRICS_H
#define FEP_METRICS_H

// Per-run metrics and multi-seed summaries.

#include "fep/config.h"
#include "fep/event_log.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fep
{

/// Raw totals collected by one run.
struct RunCounters
{
    std::uint32_t nodes = 0;
    std::uint32_t sessions = 0;
    std::uint64_t dataSent = 0;
    std::uint64_t dataDelivered = 0;
    std::uint64_t dataDropped = 0;
    double delaySumMs = 0.0;
    std::int64_t energyConsumedNj = 0;
    std::uint64_t txPackets = 0;
    std::uint64_t txControlPackets = 0;
    std::uint64_t linkBreaks = 0;
    std::uint64_t repairMessages = 0;
    int maxPartitions = 0;
    std::uint64_t rreqPackets = 0;
    std::uint64_t discoveries = 0;
    std::uint64_t routeSwitches = 0;
    std::uint64_t sleepShots = 0;
    std::uint64_t grants = 0;
    std::uint64_t denies = 0;
    std::uint64_t deaths = 0;
    std::uint32_t routers = 0;
    std::uint32_t routersBelowThreshold = 0;
    double maxLostSleepMs = 0.0;
    std::uint64_t mobilityHash = 0;
    std::uint64_t trafficHash = 0;
};

struct MetricsReport
{
    Protocol protocol = Protocol::Fep;
    std::uint64_t seed = 0;
    int nodes = 0;

    std::optional<double> deliveryRatioPct;
    std::optional<double> perNodeEnergyJ;
    std::optional<double> perNodeMessageOverhead;
    std::optional<double> perNodeControlOverhead;
    std::optional<double> delayPerSessionMs;
    std::optional<double> linkBreaksPerSession;
    std::optional<double> repairCostPerNodePerSession;
    int maxPartitions = 0;

    RunCounters counters;
};

/// Applies each quotient definition; a zero denominator leaves the metric absent.
MetricsReport Finalize(const RunCounters& counters, Protocol protocol, std::uint64_t seed);

/// The derived metrics in report column order.
std::vector<std::pair<std::string, std::optional<double>>> MetricValues(const MetricsReport& report);

std::string CsvHeader();
std::string CsvRow(const MetricsReport& report);
Json ToJson(const MetricsReport& report);

/// |x - y| * 100 / max(x, y); 0 when both are 0.
double ImprovementPct(double x, double y);

struct MetricSummary
{
    double median = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

double Median(std::vector<double> values);

/// Order statistics per metric over the reports that carry it.
std::map<std::string, MetricSummary> Aggregate(const std::vector<MetricsReport>& reports);

struct PairedSummary
{
    std::vector<std::uint64_t> seeds;
    /// Per metric: fep minus baseline, one entry per seed.
    std::map<std::string, std::vector<double>> deltas;
    std::map<std::string, double> medianDelta;
    std::map<std::string, double> baselineMedian;
    std::map<std::string, double> fepMedian;
    /// Improvement of the medians in percent.
    std::map<std::string, double> improvementPct;
};

/// Pairs runs by seed. Throws std::invalid_argument when the seed sets differ.
PairedSummary AggregatePaired(const std::vector<MetricsReport>& baseline,
                              const std::vector<MetricsReport>& fep);

} // namespace fep

#endif // FEP_METRICS_H
