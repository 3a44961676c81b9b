#include "fep/config.h"
#include "fep/event_queue.h"
#include "fep/rng.h"
#include "fep/topology.h"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace fep;

namespace
{

ScenarioConfig
Parse(const std::string& text)
{
    std::istringstream in(text);
    return ParseConfig(in, "test.conf");
}

int
ErrorLine(const std::string& text)
{
    try
    {
        Parse(text);
    }
    catch (const ConfigError& e)
    {
        return e.line();
    }
    return -1;
}

} // namespace

TEST_SUITE("config")
{
    TEST_CASE("defaults and overrides")
    {
        const ScenarioConfig c = Parse("[scenario]\nnodes = 12 # comment\nprotocol = baseline\n"
                                       "[fep]\nvariant_ph = as-printed\n");
        CHECK(c.nodeCount == 12);
        CHECK(c.protocol == Protocol::Baseline);
        CHECK(c.variant.ph == PhVariant::AsPrinted);
        CHECK(c.variant.ccs == CcsVariant::Semantic);
        CHECK(c.maxNapMs == 50.0);
        CHECK(c.sleepBudget == 10);
        CHECK(c.energy.capacityJ == 25.0);
        CHECK_NOTHROW(Validate(c));
    }

    TEST_CASE("parse errors carry the line number")
    {
        CHECK(ErrorLine("[scenario]\nnodes = 5\nbogus = 1\n") == 3);
        CHECK(ErrorLine("nodes = 5\n") == 1);
        CHECK(ErrorLine("[scenario]\n\nnodes = five\n") == 3);
        CHECK(ErrorLine("[scenario\n") == 1);
        CHECK(ErrorLine("[scenario]\nnodes\n") == 2);
        CHECK(ErrorLine("[traffic]\nsession = 1 2\n") == 2);
        CHECK(ErrorLine("[fep]\nvariant_ph = maybe\n") == 2);
        try
        {
            Parse("[scenario]\nnodes = x\n");
        }
        catch (const ConfigError& e)
        {
            CHECK(std::string(e.what()).find("test.conf:2") != std::string::npos);
        }
    }

    TEST_CASE("validation rejects inconsistent scenarios")
    {
        ScenarioConfig c;
        c.speedMin = 10;
        c.speedMax = 5;
        CHECK_THROWS_AS(Validate(c), ConfigError);
        c = ScenarioConfig{};
        c.sessions = {SessionSpec{0, 0, 1, 1, 0}};
        CHECK_THROWS_AS(Validate(c), ConfigError);
        c = ScenarioConfig{};
        c.nodeCount = 2;
        c.placements = {NodePlacement{0, 1, 1, 1}};
        CHECK_THROWS_AS(Validate(c), ConfigError);
        c.placements.push_back(NodePlacement{1, 1, 1, 0.0});
        CHECK_THROWS_AS(Validate(c), ConfigError);
        c = ScenarioConfig{};
        c.energyThreshold = 1.0;
        CHECK_THROWS_AS(Validate(c), ConfigError);
        CHECK_THROWS_AS(LoadConfig("/nonexistent/none.conf"), ConfigError);
    }

    TEST_CASE("text form round-trips")
    {
        ScenarioConfig c;
        c.nodeCount = 3;
        c.seed = 77;
        c.energy.capacityJ = 7.5;
        c.variant.table3 = Table3Orientation::AsPrintedRows;
        c.sessions = {SessionSpec{0, 2, 2.5, 40, 1.25}};
        c.placements = {NodePlacement{0, 1.5, 2, 1}, NodePlacement{1, 3, 4, 0.3}, NodePlacement{2, 5, 6, 1}};
        const std::string text = ToConfigText(c);
        const ScenarioConfig back = Parse(text);
        CHECK(ToConfigText(back) == text);
        CHECK(back.seed == 77);
        CHECK(back.sessions.size() == 1);
        CHECK(back.sessions[0].startS == 1.25);
        CHECK(back.placements[1].residualFraction == 0.3);
        CHECK(back.variant.table3 == Table3Orientation::AsPrintedRows);
    }

    TEST_CASE("shipped configs load")
    {
        for (const char* name : {"desk.conf", "ac8.conf", "two_uplink.conf"})
        {
            CAPTURE(name);
            CHECK_NOTHROW(Validate(LoadConfig(std::string(FEP_CONFIG_DIR) + "/" + name)));
        }
    }
}

TEST_SUITE("topology")
{
    TEST_CASE("disc link rule uses the shorter range")
    {
        CHECK(LinkUp({0, 0}, 50, {30, 0}, 40));
        CHECK_FALSE(LinkUp({0, 0}, 50, {45, 0}, 40));
        CHECK(LinkUp({0, 0}, 40, {40, 0}, 40));
        CHECK(LinkUp({3, 3}, 10, {3, 3}, 10));
        CHECK(Distance({0, 0}, {3, 4}) == 5.0);
    }

    TEST_CASE("random waypoint kinematics")
    {
        RandomWaypoint m({300, 300}, 600, 600, 10, 10, RandomStream(1, "mobility", 0));
        CHECK(m.Speed() == 10.0);
        const Vec2 before = m.Position();
        const Vec2 wp = m.Waypoint();
        m.Advance(100.0);
        CHECK(Distance(before, m.Position()) == doctest::Approx(1.0));
        // Still heading for the same waypoint.
        CHECK(m.Waypoint().x == wp.x);
        CHECK(Distance(m.Position(), wp) == doctest::Approx(Distance(before, wp) - 1.0));

        RandomWaypoint fast({0, 0}, 600, 600, 5, 15, RandomStream(2, "mobility", 3));
        for (int i = 0; i < 20000; ++i)
        {
            fast.Advance(100.0);
            const Vec2 p = fast.Position();
            REQUIRE(p.x >= 0.0);
            REQUIRE(p.x <= 600.0);
            REQUIRE(p.y >= 0.0);
            REQUIRE(p.y <= 600.0);
            REQUIRE(fast.Speed() >= 5.0);
            REQUIRE(fast.Speed() <= 15.0);
        }
    }

    TEST_CASE("waypoint reached mid-step continues toward a new one")
    {
        RandomWaypoint m({0, 0}, 600, 600, 10, 10, RandomStream(5, "mobility", 1));
        const Vec2 first = m.Waypoint();
        const double d = Distance({0, 0}, first);
        // Step just past the waypoint: 0.5 m of leftover travel.
        m.Advance((d + 0.5) / 10.0 * 1000.0);
        CHECK(m.Waypoint().x != first.x);
        CHECK(Distance(first, m.Position()) == doctest::Approx(0.5).epsilon(1e-6));
    }

    TEST_CASE("static nodes stay put")
    {
        RandomWaypoint m({100, 100}, 600, 600, 0, 0, RandomStream(1, "mobility", 0));
        for (int i = 0; i < 100; ++i)
            m.Advance(100.0);
        CHECK(m.Position().x == 100.0);
        CHECK(m.Position().y == 100.0);
    }

    TEST_CASE("partition counting")
    {
        const std::vector<Vec2> chain{{0, 0}, {10, 0}, {20, 0}, {30, 0}, {40, 0}};
        auto linked = [&](const std::vector<Vec2>& pos) {
            return [&pos](std::size_t a, std::size_t b) { return LinkUp(pos[a], 15, pos[b], 15); };
        };
        CHECK(CountComponents(std::vector<bool>(5, true), linked(chain)) == 1);
        std::vector<Vec2> split = chain;
        split[4] = {500, 500};
        CHECK(CountComponents(std::vector<bool>(5, true), linked(split)) == 2);
        CHECK(CountComponents({true, true, false, true, true}, linked(chain)) == 2);
        CHECK(CountComponents(std::vector<bool>(5, false), linked(chain)) == 0);
        UnionFind uf(4);
        CHECK(uf.Unite(0, 1));
        CHECK_FALSE(uf.Unite(1, 0));
        CHECK(uf.Find(0) == uf.Find(1));
        CHECK(uf.Find(2) != uf.Find(3));
    }

    TEST_CASE("random streams are independent and reproducible")
    {
        RandomStream a(9, "placement"), b(9, "placement"), c(9, "range"), d(9, "mobility", 1);
        CHECK(a.Uniform() == b.Uniform());
        RandomStream a2(9, "placement");
        CHECK(a2.Uniform() != c.Uniform());
        CHECK(RandomStream(9, "mobility", 0).Uniform() != d.Uniform());
        for (int i = 0; i < 1000; ++i)
        {
            const double u = a.Uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            REQUIRE(a.Below(7) < 7);
        }
    }
}

TEST_SUITE("event-queue")
{
    TEST_CASE("dequeues in time then scheduling order")
    {
        EventQueue q;
        std::vector<int> order;
        q.Schedule(5.0, EventKind::Timer, [&] { order.push_back(1); });
        q.Schedule(1.0, EventKind::Timer, [&] { order.push_back(2); });
        q.Schedule(5.0, EventKind::Timer, [&] { order.push_back(3); });
        q.Schedule(1.0, EventKind::Timer, [&] { order.push_back(4); });
        while (!q.Empty())
        {
            q.Pop().action();
        }
        CHECK(order == std::vector<int>{2, 4, 1, 3});
        CHECK(q.Now() == 5.0);
        CHECK_THROWS_AS(q.Schedule(1.0, EventKind::Timer, [] {}), std::logic_error);
    }
}
