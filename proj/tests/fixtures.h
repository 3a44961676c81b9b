#ifndef FEP_TESTS_FIXTURES_H
#define FEP_TESTS_FIXTURES_H

// Scenario builders shared by the unit and acceptance tests.

#include "fep/config.h"

#include <random>
#include <string>

namespace fixtures
{

inline std::string
ConfigPath(const std::string& name)
{
    return std::string(FEP_CONFIG_DIR) + "/" + name;
}

/// Small mobile network with random budget, nap limit and starting charge.
inline fep::ScenarioConfig
FiveNode(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    fep::ScenarioConfig c;
    c.arenaWidth = 160;
    c.arenaHeight = 160;
    c.nodeCount = 5;
    c.speedMin = 0;
    c.speedMax = 5;
    c.rangeMin = 80;
    c.rangeMax = 100;
    c.simTimeS = 1.5;
    c.seed = seed;
    c.protocol = fep::Protocol::Fep;
    c.sessionCount = 2;
    c.packetsPerSession = 40;
    c.sessionRate = 40;
    c.sessionStartMaxS = 0.2;
    c.energy.capacityJ = 2.0;
    c.sleepBudget = 1 + static_cast<std::uint32_t>(rng() % 10);
    c.maxNapMs = 10.0 + static_cast<double>(rng() % 91);
    c.cooldownMs = c.maxNapMs;
    c.recheckMs = 100.0;
    c.rateWindowS = 1.0;
    std::uniform_real_distribution<double> pos(0.0, 160.0);
    std::uniform_real_distribution<double> charge(0.05, 1.0);
    for (int i = 0; i < c.nodeCount; ++i)
    {
        c.placements.push_back(fep::NodePlacement{i, pos(rng), pos(rng), charge(rng)});
    }
    if (rng() % 2 == 0)
    {
        c.variant.ph = fep::PhVariant::AsPrinted;
        c.variant.ccs = fep::CcsVariant::AsPrinted;
    }
    return c;
}

} // namespace fixtures

#endif // FEP_TESTS_FIXTURES_H
