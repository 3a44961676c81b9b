#ifndef FEP_TESTS_ORACLE_H
#define FEP_TESTS_ORACLE_H

// Independent reference computations for tests. Nothing here calls into the
// library's controller or bookkeeping code; values are recomputed from raw
// counters and from the run log alone.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oracle
{

struct SessionIn
{
    std::uint64_t alpha1 = 0;
    std::uint64_t alpha2 = 0;
    std::vector<int> altGrades; ///< 0..3 for A1..A4
};

struct RawInputs
{
    std::uint64_t s = 0;
    std::uint64_t r = 0;
    std::uint64_t sl = 0;
    double tauAb = 0.0;
    std::vector<double> taus;
    std::vector<SessionIn> sessions;
};

struct Variant
{
    bool phAsPrinted = false;
    bool ccsAsPrinted = false;
    bool rowsAreTemp = false;
};

struct FuzzyOut
{
    double cl = 0.0;
    double clLow = 0.0;
    double clHigh = 0.0;
    bool degenerate = false;
    double ph = 0.0;
    double ccs = 0.0;
    int clGrade = 0;
    int phGrade = 0;
    int ccsGrade = 0;
    int temp = 0;
    int slpr = 0;
    std::optional<double> nap;
};

/// Straight evaluation of the controller from its written-out definitions.
FuzzyOut Evaluate(const RawInputs& in, double maxNapMs, const Variant& variant);

int GradeIndex(const std::string& name);

/// Everything recomputed from one JSON-lines run log.
struct Replay
{
    std::string protocol;
    std::uint64_t nodes = 0;
    std::uint64_t sessions = 0;
    double maxNapMs = 0.0;
    std::uint64_t budget = 0;

    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    double delaySum = 0.0;
    std::int64_t energyNj = 0;
    std::uint64_t tx = 0;
    std::uint64_t txControl = 0;
    std::uint64_t repair = 0;
    std::uint64_t linkBreaks = 0;
    int maxPartitions = 0;
    std::uint64_t rreq = 0;

    std::uint64_t shots = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t grants = 0;
    std::uint64_t denies = 0;
    std::uint64_t switches = 0;
    std::uint64_t redirects = 0;
    std::map<std::int64_t, std::uint64_t> shotsPerNode;
    std::map<std::int64_t, double> lostSleepPerNode;
    std::vector<double> grantNaps;

    /// Route requests belonging to a grant chain while the source still held
    /// an eligible cached route.
    std::uint64_t chainRreqWithAlternatives = 0;
    std::uint64_t chainRreq = 0;
    /// Data transmissions over an edge while it was suspended.
    std::uint64_t suspendedEdgeTx = 0;

    /// Grant windows (granter, sleeper, since, until).
    struct Window
    {
        std::int64_t granter;
        std::int64_t sleeper;
        double since;
        double until;
    };
    std::vector<Window> windows;

    /// (time, node, uplink) of every completed forward.
    struct Forward
    {
        double time;
        std::int64_t node;
        std::int64_t uplink;
    };
    std::vector<Forward> forwards;

    /// Largest deviation between logged and recomputed controller values.
    double maxFormulaError = 0.0;
    /// Human-readable descriptions of every mismatch found.
    std::vector<std::string> failures;

    /// The seven metrics, absent where the denominator is zero.
    std::map<std::string, std::optional<double>> Metrics() const;
};

Replay ReplayLog(const std::string& logText);

} // namespace oracle

#endif // FEP_TESTS_ORACLE_H
