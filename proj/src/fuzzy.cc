#include "fep/fuzzy.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fep
{

namespace
{

using Row = std::array<FuzzyGrade, 4>;
constexpr FuzzyGrade A1 = FuzzyGrade::A1;
constexpr FuzzyGrade A2 = FuzzyGrade::A2;
constexpr FuzzyGrade A3 = FuzzyGrade::A3;
constexpr FuzzyGrade A4 = FuzzyGrade::A4;

// Rows indexed by ph, columns by ccs.
constexpr std::array<Row, 4> kTempTable = {{
    {A1, A1, A1, A2},
    {A1, A1, A2, A2},
    {A1, A2, A3, A3},
    {A2, A2, A3, A4},
}};

// Printed layout of the SLPR table. Which argument selects the row is decided
// by Table3Orientation.
constexpr std::array<Row, 4> kSlprTable = {{
    {A1, A1, A2, A3},
    {A1, A1, A2, A3},
    {A1, A2, A3, A4},
    {A1, A2, A4, A4},
}};

constexpr double kUnitSlack = 1e-12;

std::size_t Index(FuzzyGrade g)
{
    return static_cast<std::size_t>(g);
}

} // namespace

double
Mid(FuzzyGrade grade)
{
    switch (grade)
    {
    case FuzzyGrade::A1:
        return 0.125;
    case FuzzyGrade::A2:
        return 0.375;
    case FuzzyGrade::A3:
        return 0.625;
    case FuzzyGrade::A4:
        return 0.875;
    }
    throw std::invalid_argument("Mid: invalid grade");
}

std::string_view
ToString(FuzzyGrade grade)
{
    static constexpr std::string_view names[] = {"A1", "A2", "A3", "A4"};
    return names[Index(grade)];
}

std::optional<FuzzyGrade>
ParseGrade(std::string_view text)
{
    for (FuzzyGrade g : kAllGrades)
    {
        if (text == ToString(g))
        {
            return g;
        }
    }
    return std::nullopt;
}

std::string_view
ToString(PhVariant v)
{
    return v == PhVariant::Semantic ? "semantic" : "as-printed";
}

std::string_view
ToString(CcsVariant v)
{
    return v == CcsVariant::Semantic ? "semantic" : "as-printed";
}

std::string_view
ToString(Table3Orientation v)
{
    return v == Table3Orientation::TempDominant ? "temp-dominant" : "as-printed-rows";
}

std::optional<PhVariant>
ParsePhVariant(std::string_view text)
{
    if (text == "semantic")
        return PhVariant::Semantic;
    if (text == "as-printed")
        return PhVariant::AsPrinted;
    return std::nullopt;
}

std::optional<CcsVariant>
ParseCcsVariant(std::string_view text)
{
    if (text == "semantic")
        return CcsVariant::Semantic;
    if (text == "as-printed")
        return CcsVariant::AsPrinted;
    return std::nullopt;
}

std::optional<Table3Orientation>
ParseTable3Orientation(std::string_view text)
{
    if (text == "temp-dominant")
        return Table3Orientation::TempDominant;
    if (text == "as-printed-rows")
        return Table3Orientation::AsPrintedRows;
    return std::nullopt;
}

FuzzyGrade
FuzzifyUnit(double x)
{
    if (!std::isfinite(x) || x < -kUnitSlack || x > 1.0 + kUnitSlack)
    {
        throw std::domain_error("FuzzifyUnit: value outside [0,1]");
    }
    if (x < 0.25)
        return FuzzyGrade::A1;
    if (x < 0.5)
        return FuzzyGrade::A2;
    if (x < 0.75)
        return FuzzyGrade::A3;
    return FuzzyGrade::A4;
}

FuzzyGrade
FuzzifyCl(double cl, const ClBounds& bounds)
{
    if (!std::isfinite(cl) || !std::isfinite(bounds.low) || !std::isfinite(bounds.high))
    {
        throw std::domain_error("FuzzifyCl: non-finite input");
    }
    if (bounds.low < 0.0 || bounds.low > bounds.high)
    {
        throw std::domain_error("FuzzifyCl: invalid bounds");
    }
    if (bounds.degenerate || bounds.low == bounds.high)
    {
        return FuzzyGrade::A4;
    }
    const double lo = bounds.low;
    const double hi = bounds.high;
    if (cl < 0.25 * (3.0 * lo + hi))
        return FuzzyGrade::A1;
    if (cl < 0.5 * (lo + hi))
        return FuzzyGrade::A2;
    if (cl < 0.25 * (lo + 3.0 * hi))
        return FuzzyGrade::A3;
    return FuzzyGrade::A4;
}

ClResult
ComputeCl(double tauAb, std::span<const double> uplinkTaus)
{
    if (uplinkTaus.empty())
    {
        throw std::domain_error("ComputeCl: empty uplink set");
    }
    if (!std::isfinite(tauAb) || tauAb < 0.0)
    {
        throw std::domain_error("ComputeCl: invalid rate");
    }
    for (double t : uplinkTaus)
    {
        if (!std::isfinite(t) || t < 0.0)
        {
            throw std::domain_error("ComputeCl: invalid uplink rate");
        }
    }
    const double sum = std::accumulate(uplinkTaus.begin(), uplinkTaus.end(), 0.0);
    if (sum == 0.0)
    {
        return ClResult{0.0, ClBounds{0.0, 0.0, true}};
    }
    const double mean = sum / static_cast<double>(uplinkTaus.size());
    const auto [mn, mx] = std::minmax_element(uplinkTaus.begin(), uplinkTaus.end());
    return ClResult{tauAb / mean, ClBounds{*mn / mean, *mx / mean, false}};
}

double
ComputePh(const PhRecord& record, PhVariant variant)
{
    if (record.forwarded > record.sent)
    {
        throw std::domain_error("ComputePh: forwarded exceeds sent");
    }
    if (record.sent == 0)
    {
        return 1.0;
    }
    const double ratio = static_cast<double>(record.forwarded) / static_cast<double>(record.sent);
    const double sl = static_cast<double>(record.sleepRequests);
    if (variant == PhVariant::Semantic)
    {
        return std::exp(ratio - 1.0) / (1.0 + sl);
    }
    const double raw = (1.0 - 1.0 / std::max(sl, 1.0)) * std::exp(1.0 - ratio);
    return std::clamp(raw, 0.0, 1.0);
}

double
ComputeF1(std::uint64_t forwarded, std::uint64_t pending)
{
    if (forwarded == 0 && pending == 0)
    {
        return 1.0;
    }
    return static_cast<double>(forwarded) / static_cast<double>(forwarded + pending);
}

double
ComputeF2(std::span<const FuzzyGrade> alternativeGrades)
{
    if (alternativeGrades.empty())
    {
        return 0.0;
    }
    double sum = 0.0;
    for (FuzzyGrade g : alternativeGrades)
    {
        sum += Mid(g);
    }
    return sum / static_cast<double>(alternativeGrades.size());
}

double
ComputeCcs(std::span<const HopSessionView> sessions, CcsVariant variant)
{
    if (sessions.empty())
    {
        return 1.0;
    }
    double sum = 0.0;
    for (const auto& view : sessions)
    {
        const double f1 = ComputeF1(view.forwarded, view.pending);
        const double f2 = ComputeF2(view.alternativeGrades);
        sum += variant == CcsVariant::Semantic ? f1 * std::exp(f2 - 1.0) : f1 * std::exp(1.0 - f2);
    }
    const double mean = sum / static_cast<double>(sessions.size());
    return variant == CcsVariant::Semantic ? mean : std::clamp(mean, 0.0, 1.0);
}

FuzzyGrade
CombineTemp(FuzzyGrade ph, FuzzyGrade ccs)
{
    return kTempTable[Index(ph)][Index(ccs)];
}

FuzzyGrade
CombineSlpr(FuzzyGrade temp, FuzzyGrade cl, Table3Orientation orientation)
{
    if (orientation == Table3Orientation::TempDominant)
    {
        return kSlprTable[Index(cl)][Index(temp)];
    }
    return kSlprTable[Index(temp)][Index(cl)];
}

std::optional<double>
SleepDuration(FuzzyGrade slpr, double maxNapMs)
{
    if (!(maxNapMs > 0.0))
    {
        throw std::domain_error("SleepDuration: nap limit must be positive");
    }
    switch (slpr)
    {
    case FuzzyGrade::A4:
        return maxNapMs;
    case FuzzyGrade::A3:
        return maxNapMs * Mid(FuzzyGrade::A3) / Mid(FuzzyGrade::A4);
    default:
        return std::nullopt;
    }
}

EnableFlags
ComputeEnableFlags(double residual,
                   double capacity,
                   double interServiceMs,
                   double interArrivalMs,
                   double energyThreshold)
{
    if (!(capacity > 0.0))
    {
        throw std::domain_error("ComputeEnableFlags: capacity must be positive");
    }
    EnableFlags flags;
    flags.energy = residual / capacity < energyThreshold;
    flags.overload = interArrivalMs > 0.0 && interServiceMs / interArrivalMs > 1.0;
    return flags;
}

SlReqTrace
Evaluate(const SlReqInputs& inputs, double maxNapMs, const FormulaVariant& variant)
{
    SlReqTrace trace;
    trace.cl = ComputeCl(inputs.tauAb, inputs.uplinkTaus);
    trace.clGrade = FuzzifyCl(trace.cl.cl, trace.cl.bounds);
    trace.ph = ComputePh(inputs.history, variant.ph);
    trace.phGrade = FuzzifyUnit(trace.ph);
    trace.ccs = ComputeCcs(inputs.sessions, variant.ccs);
    trace.ccsGrade = FuzzifyUnit(trace.ccs);
    trace.temp = CombineTemp(trace.phGrade, trace.ccsGrade);
    trace.slpr = CombineSlpr(trace.temp, trace.clGrade, variant.table3);
    trace.napMs = SleepDuration(trace.slpr, maxNapMs);
    return trace;
}

} // namespace fep
