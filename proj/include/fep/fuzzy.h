#ifndef FEP_FUZZY_H
#define FEP_FUZZY_H

// Sleep-grant fuzzy controller: input formulas, fuzzification, rule tables
// and nap duration. Everything here is a pure function of its arguments.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fep
{

/// Four-level ordinal fuzzy variable. A1 is the lowest class, A4 the highest.
enum class FuzzyGrade : std::uint8_t
{
    A1 = 0,
    A2 = 1,
    A3 = 2,
    A4 = 3,
};

inline constexpr FuzzyGrade kAllGrades[] = {FuzzyGrade::A1,
                                            FuzzyGrade::A2,
                                            FuzzyGrade::A3,
                                            FuzzyGrade::A4};

/// Centre of the grade's crisp interval on [0,1].
double Mid(FuzzyGrade grade);
std::string_view ToString(FuzzyGrade grade);
std::optional<FuzzyGrade> ParseGrade(std::string_view text);

enum class PhVariant
{
    Semantic,
    AsPrinted,
};

enum class CcsVariant
{
    Semantic,
    AsPrinted,
};

/// How the temp/cl rule table is indexed.
enum class Table3Orientation
{
    TempDominant,  ///< printed rows are cl, printed columns are temp
    AsPrintedRows, ///< printed rows are temp, printed columns are cl
};

struct FormulaVariant
{
    PhVariant ph = PhVariant::Semantic;
    CcsVariant ccs = CcsVariant::Semantic;
    Table3Orientation table3 = Table3Orientation::TempDominant;

    bool operator==(const FormulaVariant&) const = default;
};

std::string_view ToString(PhVariant v);
std::string_view ToString(CcsVariant v);
std::string_view ToString(Table3Orientation v);
std::optional<PhVariant> ParsePhVariant(std::string_view text);
std::optional<CcsVariant> ParseCcsVariant(std::string_view text);
std::optional<Table3Orientation> ParseTable3Orientation(std::string_view text);

/// Dynamic range of the comparative load ratio: [min/mean, max/mean].
struct ClBounds
{
    double low = 0.0;
    double high = 0.0;
    /// All uplink rates were zero; the grade is forced to A4.
    bool degenerate = false;
};

struct ClResult
{
    double cl = 0.0;
    ClBounds bounds;
};

/// Forwarding history of a downlink neighbour with respect to one uplink.
struct PhRecord
{
    std::uint64_t sent = 0;          ///< packets handed over for forwarding
    std::uint64_t forwarded = 0;     ///< of those, transmitted onward
    std::uint64_t sleepRequests = 0; ///< earlier sleep requests to this uplink
};

/// One live session crossing the hop under evaluation.
struct HopSessionView
{
    std::uint64_t forwarded = 0; ///< packets of the session already forwarded
    std::uint64_t pending = 0;   ///< packets of the session still to come
    std::vector<FuzzyGrade> alternativeGrades;
};

struct EnableFlags
{
    bool energy = false;
    bool overload = false;

    bool Any() const
    {
        return energy || overload;
    }
};

struct SlReqInputs
{
    PhRecord history;
    std::vector<HopSessionView> sessions;
    double tauAb = 0.0;
    std::vector<double> uplinkTaus;
};

/// Every intermediate value of one controller evaluation.
struct SlReqTrace
{
    ClResult cl;
    double ph = 0.0;
    double ccs = 0.0;
    FuzzyGrade clGrade = FuzzyGrade::A1;
    FuzzyGrade phGrade = FuzzyGrade::A1;
    FuzzyGrade ccsGrade = FuzzyGrade::A1;
    FuzzyGrade temp = FuzzyGrade::A1;
    FuzzyGrade slpr = FuzzyGrade::A1;
    /// Nap length in ms when granted.
    std::optional<double> napMs;

    bool Granted() const
    {
        return napMs.has_value();
    }
};

/// Quartile class of x in [0,1]; a boundary point belongs to the upper class.
/// Throws std::domain_error outside [0,1] (with 1e-12 slack).
FuzzyGrade FuzzifyUnit(double x);

/// Quartile class of cl within [bounds.low, bounds.high], clamped at both ends.
FuzzyGrade FuzzifyCl(double cl, const ClBounds& bounds);

/// cl = tauAb / mean(uplinkTaus), bounds = (min, max) / mean.
ClResult ComputeCl(double tauAb, std::span<const double> uplinkTaus);

double ComputePh(const PhRecord& record, PhVariant variant);

/// alpha1 / (alpha1 + alpha2); 1 when both are zero.
double ComputeF1(std::uint64_t forwarded, std::uint64_t pending);

/// Mean of Mid() over the alternatives; 0 with no alternatives.
double ComputeF2(std::span<const FuzzyGrade> alternativeGrades);

/// Mean session score over the hop; 1 when no session crosses it.
double ComputeCcs(std::span<const HopSessionView> sessions, CcsVariant variant);

FuzzyGrade CombineTemp(FuzzyGrade ph, FuzzyGrade ccs);
FuzzyGrade CombineSlpr(FuzzyGrade temp, FuzzyGrade cl, Table3Orientation orientation);

/// A4 -> L, A3 -> L * Mid(A3) / Mid(A4), otherwise no nap.
std::optional<double> SleepDuration(FuzzyGrade slpr, double maxNapMs);

/// e: residual/capacity below the threshold. ol: inter-service time exceeds
/// inter-arrival time (tr == 0 means no arrivals were seen, so ol stays 0).
EnableFlags ComputeEnableFlags(double residual,
                               double capacity,
                               double interServiceMs,
                               double interArrivalMs,
                               double energyThreshold = 0.4);

SlReqTrace Evaluate(const SlReqInputs& inputs, double maxNapMs, const FormulaVariant& variant);

} // namespace fep

#endif // FEP_FUZZY_H
