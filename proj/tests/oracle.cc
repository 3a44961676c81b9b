#include "oracle.h"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace oracle
{

namespace
{

using nlohmann::json;

int
Quartile(double x)
{
    if (x < 0.25)
        return 0;
    if (x < 0.5)
        return 1;
    if (x < 0.75)
        return 2;
    return 3;
}

double
MidOf(int g)
{
    return 0.125 + 0.25 * g;
}

// Rows indexed by the first argument, columns by the second.
const int kTempTable[4][4] = {{0, 0, 0, 1}, {0, 0, 1, 1}, {0, 1, 2, 2}, {1, 1, 2, 3}};
const int kPrinted3[4][4] = {{0, 0, 1, 2}, {0, 0, 1, 2}, {0, 1, 2, 3}, {0, 1, 3, 3}};

} // namespace

int
GradeIndex(const std::string& name)
{
    if (name == "A1")
        return 0;
    if (name == "A2")
        return 1;
    if (name == "A3")
        return 2;
    if (name == "A4")
        return 3;
    throw std::invalid_argument("grade " + name);
}

FuzzyOut
Evaluate(const RawInputs& in, double maxNapMs, const Variant& v)
{
    FuzzyOut o;
    double sum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < in.taus.size(); ++i)
    {
        sum += in.taus[i];
        lo = i == 0 ? in.taus[i] : std::min(lo, in.taus[i]);
        hi = i == 0 ? in.taus[i] : std::max(hi, in.taus[i]);
    }
    if (sum == 0.0)
    {
        o.degenerate = true;
        o.clGrade = 3;
    }
    else
    {
        const double mean = sum / static_cast<double>(in.taus.size());
        o.cl = in.tauAb / mean;
        o.clLow = lo / mean;
        o.clHigh = hi / mean;
        if (o.clHigh == o.clLow)
        {
            o.clGrade = 3;
        }
        else
        {
            const double t1 = 0.25 * (3 * o.clLow + o.clHigh);
            const double t2 = 0.5 * (o.clLow + o.clHigh);
            const double t3 = 0.25 * (o.clLow + 3 * o.clHigh);
            o.clGrade = o.cl < t1 ? 0 : o.cl < t2 ? 1 : o.cl < t3 ? 2 : 3;
        }
    }

    if (in.s == 0)
    {
        o.ph = 1.0;
    }
    else
    {
        const double ratio = static_cast<double>(in.r) / static_cast<double>(in.s);
        if (v.phAsPrinted)
        {
            const double sl = std::max<double>(static_cast<double>(in.sl), 1.0);
            o.ph = std::clamp((1.0 - 1.0 / sl) * std::exp(1.0 - ratio), 0.0, 1.0);
        }
        else
        {
            o.ph = std::exp(ratio - 1.0) / (1.0 + static_cast<double>(in.sl));
        }
    }

    if (in.sessions.empty())
    {
        o.ccs = 1.0;
    }
    else
    {
        double acc = 0.0;
        for (const auto& s : in.sessions)
        {
            const double total = static_cast<double>(s.alpha1 + s.alpha2);
            const double f1 = total == 0.0 ? 1.0 : static_cast<double>(s.alpha1) / total;
            double f2 = 0.0;
            for (int g : s.altGrades)
            {
                f2 += MidOf(g);
            }
            if (!s.altGrades.empty())
            {
                f2 /= static_cast<double>(s.altGrades.size());
            }
            acc += v.ccsAsPrinted ? f1 * std::exp(1.0 - f2) : f1 * std::exp(f2 - 1.0);
        }
        o.ccs = acc / static_cast<double>(in.sessions.size());
        if (v.ccsAsPrinted)
        {
            o.ccs = std::clamp(o.ccs, 0.0, 1.0);
        }
    }

    o.phGrade = Quartile(o.ph);
    o.ccsGrade = Quartile(o.ccs);
    o.temp = kTempTable[o.phGrade][o.ccsGrade];
    o.slpr = v.rowsAreTemp ? kPrinted3[o.temp][o.clGrade] : kPrinted3[o.clGrade][o.temp];
    if (o.slpr == 3)
    {
        o.nap = maxNapMs;
    }
    else if (o.slpr == 2)
    {
        o.nap = maxNapMs * 0.625 / 0.875;
    }
    return o;
}

std::map<std::string, std::optional<double>>
Replay::Metrics() const
{
    auto q = [](double num, double den) -> std::optional<double> {
        if (den == 0.0)
            return std::nullopt;
        return num / den;
    };
    const double n = static_cast<double>(nodes);
    const double s = static_cast<double>(sessions);
    return {
        {"delivery_ratio_pct", q(static_cast<double>(delivered) * 100.0, static_cast<double>(sent))},
        {"per_node_energy_j", q(static_cast<double>(energyNj) / 1e9, n)},
        {"per_node_message_overhead", q(static_cast<double>(tx), n)},
        {"per_node_control_overhead", q(static_cast<double>(txControl), n)},
        {"delay_per_session_ms", q(delaySum, s)},
        {"link_breaks_per_session", q(static_cast<double>(linkBreaks), s)},
        {"repair_cost_per_node_per_session", q(static_cast<double>(repair), s * n)},
        {"max_partitions", static_cast<double>(maxPartitions)},
    };
}

namespace
{

struct Ewma
{
    double alpha = 0.2;
    bool hasLast = false;
    double last = 0.0;
    bool hasTr = false;
    double tr = 0.0;
    bool hasTs = false;
    double ts = 0.0;
};

struct CachedRoute
{
    std::vector<std::int64_t> hops;
};

bool
Uses(const std::vector<std::int64_t>& hops, std::int64_t a, std::int64_t b)
{
    for (std::size_t i = 0; i + 1 < hops.size(); ++i)
    {
        if (hops[i] == a && hops[i + 1] == b)
            return true;
    }
    return false;
}

struct SourceCache
{
    std::vector<CachedRoute> routes;
    std::map<std::pair<std::int64_t, std::int64_t>, double> suspended;

    int Eligible(double now) const
    {
        int n = 0;
        for (const auto& r : routes)
        {
            bool ok = true;
            for (const auto& [edge, until] : suspended)
            {
                if (until > now && Uses(r.hops, edge.first, edge.second))
                    ok = false;
            }
            n += ok ? 1 : 0;
        }
        return n;
    }
};

bool
Near(double a, double b, double tol = 1e-9)
{
    return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

} // namespace

Replay
ReplayLog(const std::string& text)
{
    Replay out;
    double windowMs = 5000.0;
    double alpha = 0.2;
    double threshold = 0.4;
    Variant variant;

    std::map<std::int64_t, std::int64_t> consumed, capacity, initial;
    std::map<std::int64_t, std::map<std::int64_t, std::vector<double>>> arrivals;
    std::map<std::int64_t, std::map<std::int64_t, std::uint64_t>> sCount, rCount, slCount;
    std::map<std::int64_t, Ewma> ewma;
    struct View
    {
        std::uint64_t forwarded = 0;
        std::uint64_t pending = 0;
        std::vector<int> alt;
        double last = 0.0;
    };
    std::map<std::int64_t, std::map<std::pair<std::int64_t, std::int64_t>, View>> views;
    std::map<std::tuple<std::int64_t, std::uint64_t, std::int64_t>, RawInputs> expected;
    std::map<std::pair<std::int64_t, std::uint64_t>, double> originTime;
    std::map<std::pair<std::int64_t, std::uint64_t>, double> bestNap;
    std::map<std::pair<std::int64_t, std::int64_t>, SourceCache> caches;
    std::map<std::int64_t, bool> chainHadAlternatives;
    std::map<std::int64_t, std::int64_t> sessionDst;

    auto fail = [&](const std::string& what, double t) {
        std::ostringstream os;
        os << "t=" << t << ": " << what;
        out.failures.push_back(os.str());
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const json rec = json::parse(line);
        const std::string kind = rec.at("kind");
        const double t = rec.at("time");
        const std::int64_t node = rec.at("node");
        const json& p = rec.at("payload");

        if (kind == "run")
        {
            out.protocol = p.at("protocol");
            out.nodes = p.at("nodes");
            out.sessions = p.at("sessions");
            windowMs = p.at("rate_window_ms");
            alpha = p.at("ewma_alpha");
            threshold = p.at("energy_threshold");
            out.maxNapMs = p.at("max_nap_ms");
            out.budget = p.at("sleep_budget");
            variant.phAsPrinted = p.at("variant_ph") == "as-printed";
            variant.ccsAsPrinted = p.at("variant_ccs") == "as-printed";
            variant.rowsAreTemp = p.at("table3_orientation") == "as-printed-rows";
        }
        else if (kind == "node")
        {
            capacity[node] = p.at("capacity_nj");
            initial[node] = p.at("initial_consumed_nj");
            consumed[node] = initial[node];
            ewma[node].alpha = alpha;
        }
        else if (kind == "session")
        {
            sessionDst[p.at("session").get<std::int64_t>()] = p.at("dst");
        }
        else if (kind == "tx")
        {
            const std::string pkt = p.at("pkt");
            const std::int64_t txNj = p.at("tx_nj");
            consumed[node] += txNj;
            out.energyNj += txNj;
            for (const auto& rx : p.at("rx"))
            {
                const std::int64_t nj = rx.at(1);
                consumed[rx.at(0).get<std::int64_t>()] += nj;
                out.energyNj += nj;
            }
            ++out.tx;
            const bool control = p.at("control");
            if (control)
            {
                ++out.txControl;
                if (p.at("cause") == "break")
                    ++out.repair;
            }
            if (pkt == "rreq")
            {
                ++out.rreq;
                const std::int64_t chain = p.at("chain");
                if (chain >= 0)
                {
                    ++out.chainRreq;
                    if (chainHadAlternatives[chain])
                        ++out.chainRreqWithAlternatives;
                }
            }
            if (pkt == "data")
            {
                const std::int64_t to = p.at("to");
                for (const auto& w : out.windows)
                {
                    if (w.granter == node && w.sleeper == to && w.since <= t && t < w.until)
                    {
                        ++out.suspendedEdgeTx;
                        fail("data sent over a suspended edge", t);
                    }
                }
            }
        }
        else if (kind == "idle")
        {
            const auto& nj = p.at("nj");
            for (std::size_t i = 0; i < nj.size(); ++i)
            {
                const std::int64_t v = nj[i];
                consumed[static_cast<std::int64_t>(i)] += v;
                out.energyNj += v;
            }
        }
        else if (kind == "originate")
        {
            ++out.sent;
            originTime[{p.at("session").get<std::int64_t>(), p.at("seq").get<std::uint64_t>()}] = t;
        }
        else if (kind == "deliver")
        {
            ++out.delivered;
            const auto key = std::make_pair(p.at("session").get<std::int64_t>(), p.at("seq").get<std::uint64_t>());
            out.delaySum += t - originTime.at(key);
        }
        else if (kind == "drop")
        {
            ++out.dropped;
        }
        else if (kind == "link_break")
        {
            ++out.linkBreaks;
        }
        else if (kind == "partition")
        {
            out.maxPartitions = std::max(out.maxPartitions, p.at("components").get<int>());
        }
        else if (kind == "fwd_arrival")
        {
            const std::int64_t from = p.at("from");
            arrivals[node][from].push_back(t);
            ++sCount[node][from];
            Ewma& e = ewma[node];
            if (e.hasLast)
            {
                const double gap = t - e.last;
                e.tr = e.hasTr ? e.alpha * gap + (1.0 - e.alpha) * e.tr : gap;
                e.hasTr = true;
            }
            e.hasLast = true;
            e.last = t;
            View& v = views[node][{from, p.at("session").get<std::int64_t>()}];
            v.pending = p.at("remaining");
            v.alt.clear();
            for (const auto& g : p.at("alt_grades"))
                v.alt.push_back(GradeIndex(g));
            v.last = t;
        }
        else if (kind == "fwd_done")
        {
            const std::int64_t up = p.at("uplink");
            if (++rCount[node][up] > sCount[node][up])
                fail("forwarded exceeds received", t);
            Ewma& e = ewma[node];
            const double svc = p.at("service_ms");
            e.ts = e.hasTs ? e.alpha * svc + (1.0 - e.alpha) * e.ts : svc;
            e.hasTs = true;
            ++views[node][{up, p.at("session").get<std::int64_t>()}].forwarded;
            out.forwards.push_back({t, node, up});
        }
        else if (kind == "sleep_shot")
        {
            ++out.shots;
            const std::uint64_t shot = p.at("shot");
            auto& used = out.shotsPerNode[node];
            if (shot != static_cast<std::uint64_t>(used))
                fail("shot index does not follow the previous count", t);
            used += 1;
            if (static_cast<std::uint64_t>(used) > out.budget)
                fail("sleep budget exceeded", t);

            const Ewma& e = ewma[node];
            const double residual = static_cast<double>(capacity[node] - consumed[node]);
            const bool eFlag = residual / static_cast<double>(capacity[node]) < threshold;
            const bool olFlag = e.tr > 0.0 && e.ts / e.tr > 1.0;
            if (eFlag != p.at("e").get<bool>() || olFlag != p.at("ol").get<bool>())
                fail("enable flags differ from recomputation", t);
            if (!(eFlag || olFlag))
                fail("shot without an enable flag", t);
            if (p.at("residual_nj").get<std::int64_t>() != capacity[node] - consumed[node])
                fail("residual energy differs from recomputation", t);
            if (!Near(p.at("ts_ms"), e.ts) || !Near(p.at("tr_ms"), e.tr))
                fail("TS/TR differ from recomputation", t);

            std::vector<std::int64_t> uplinks;
            std::vector<double> taus;
            for (const auto& [a, times] : arrivals[node])
            {
                std::size_t count = 0;
                for (double at : times)
                {
                    if (at >= t - windowMs && at <= t)
                        ++count;
                }
                if (count > 0)
                {
                    uplinks.push_back(a);
                    taus.push_back(static_cast<double>(count) / (windowMs / 1000.0));
                }
            }
            if (p.at("addressees").get<std::vector<std::int64_t>>() != uplinks)
                fail("addressees differ from the uplink set", t);
            for (std::size_t i = 0; i < uplinks.size(); ++i)
            {
                const std::int64_t a = uplinks[i];
                RawInputs ri;
                ri.s = sCount[node][a];
                ri.r = rCount[node][a];
                ri.sl = slCount[node][a];
                ri.tauAb = taus[i];
                ri.taus = taus;
                for (const auto& [key, v] : views[node])
                {
                    if (key.first == a && v.last >= t - windowMs)
                        ri.sessions.push_back(SessionIn{v.forwarded, v.pending, v.alt});
                }
                expected[{node, shot, a}] = ri;
            }
            for (auto a : uplinks)
                ++slCount[node][a];
        }
        else if (kind == "slreq_eval")
        {
            ++out.evaluations;
            const std::int64_t b = p.at("requester");
            const std::uint64_t shot = p.at("shot");
            auto it = expected.find({b, shot, node});
            if (it == expected.end())
            {
                fail("evaluation without a matching request", t);
                continue;
            }
            const RawInputs& ri = it->second;
            const json& li = p.at("inputs");
            if (li.at("s") != ri.s || li.at("r") != ri.r || li.at("sl") != ri.sl)
                fail("s/r/sl differ from recomputation", t);
            if (!Near(li.at("tau_ab"), ri.tauAb))
                fail("tau differs from recomputation", t);
            const auto loggedTaus = li.at("uplink_taus").get<std::vector<double>>();
            bool tausOk = loggedTaus.size() == ri.taus.size();
            for (std::size_t i = 0; tausOk && i < ri.taus.size(); ++i)
                tausOk = Near(loggedTaus[i], ri.taus[i]);
            if (!tausOk)
                fail("uplink rates differ from recomputation", t);
            const auto& ls = li.at("sessions");
            bool sessOk = ls.size() == ri.sessions.size();
            for (std::size_t i = 0; sessOk && i < ri.sessions.size(); ++i)
            {
                std::vector<int> alt;
                for (const auto& g : ls[i].at("alt_grades"))
                    alt.push_back(GradeIndex(g));
                sessOk = ls[i].at("alpha1") == ri.sessions[i].alpha1 && ls[i].at("alpha2") == ri.sessions[i].alpha2 &&
                         alt == ri.sessions[i].altGrades;
            }
            if (!sessOk)
                fail("session views differ from recomputation", t);

            const FuzzyOut o = Evaluate(ri, out.maxNapMs, variant);
            const json& tr = p.at("trace");
            const double err = std::max({std::fabs(tr.at("cl").get<double>() - o.cl),
                                         std::fabs(tr.at("ph").get<double>() - o.ph),
                                         std::fabs(tr.at("ccs").get<double>() - o.ccs),
                                         std::fabs(tr.at("cl_low").get<double>() - o.clLow),
                                         std::fabs(tr.at("cl_high").get<double>() - o.clHigh)});
            out.maxFormulaError = std::max(out.maxFormulaError, err);
            if (err > 1e-9)
                fail("controller values differ from recomputation", t);
            if (GradeIndex(tr.at("cl_grade")) != o.clGrade || GradeIndex(tr.at("ph_grade")) != o.phGrade ||
                GradeIndex(tr.at("ccs_grade")) != o.ccsGrade || GradeIndex(tr.at("temp")) != o.temp ||
                GradeIndex(tr.at("slpr")) != o.slpr)
                fail("controller grades differ from recomputation", t);
            const bool granted = !tr.at("nap_ms").is_null();
            if (granted != o.nap.has_value() || (granted && !Near(tr.at("nap_ms"), *o.nap)))
                fail("grant decision differs from recomputation", t);
        }
        else if (kind == "grant")
        {
            ++out.grants;
            const double nap = p.at("nap_ms");
            out.grantNaps.push_back(nap);
            const std::int64_t sleeper = p.at("sleeper");
            out.windows.push_back({node, sleeper, t, p.at("until").get<double>()});
            auto& best = bestNap[{sleeper, p.at("shot").get<std::uint64_t>()}];
            best = std::max(best, nap);
        }
        else if (kind == "deny")
        {
            ++out.denies;
        }
        else if (kind == "redirect")
        {
            ++out.redirects;
        }
        else if (kind == "switch")
        {
            ++out.switches;
            if (p.at("rreq") != 0)
                fail("route switch reported route requests", t);
            auto& cache = caches[{node, p.at("dst").get<std::int64_t>()}];
            (void)cache;
        }
        else if (kind == "route_installed")
        {
            auto& cache = caches[{node, p.at("dst").get<std::int64_t>()}];
            cache.routes.clear();
            for (const auto& r : p.at("routes"))
                cache.routes.push_back({r.at("hops").get<std::vector<std::int64_t>>()});
        }
        else if (kind == "notice_rx")
        {
            auto& cache = caches[{node, p.at("dst").get<std::int64_t>()}];
            const std::int64_t a = p.at("edge").at(0);
            const std::int64_t b = p.at("edge").at(1);
            if (p.at("pkt") == "route_error")
            {
                std::erase_if(cache.routes, [&](const CachedRoute& r) { return Uses(r.hops, a, b); });
            }
            else
            {
                auto& until = cache.suspended[{a, b}];
                until = std::max(until, p.at("until").get<double>());
            }
        }
        else if (kind == "discover")
        {
            const auto& cache = caches[{node, p.at("dst").get<std::int64_t>()}];
            const int eligible = cache.Eligible(t);
            if (eligible != p.at("eligible_routes").get<int>())
                fail("eligible cached routes differ from recomputation", t);
            const std::int64_t chain = p.at("chain");
            if (chain >= 0 && eligible > 0)
                chainHadAlternatives[chain] = true;
        }
    }

    std::map<std::int64_t, double> lost;
    for (const auto& [key, nap] : bestNap)
    {
        lost[key.first] += out.maxNapMs - nap;
    }
    out.lostSleepPerNode = lost;
    return out;
}

} // namespace oracle
