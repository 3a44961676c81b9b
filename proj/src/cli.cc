#include "fep/cli.h"

#include "fep/event_log.h"
#include "fep/simulator.h"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fep
{

namespace
{

std::uint64_t
ParseUnsigned(std::string_view text)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    {
        throw std::invalid_argument("not a non-negative integer: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view>
SplitComma(std::string_view text)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = text.find(',', start);
        parts.push_back(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
        if (comma == std::string_view::npos)
        {
            break;
        }
        start = comma + 1;
    }
    return parts;
}

bool
WriteFile(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    return static_cast<bool>(out);
}

std::string
ReportText(const std::vector<MetricsReport>& reports, const std::string& format)
{
    if (format == "json")
    {
        Json arr = Json::array();
        for (const auto& r : reports)
        {
            arr.push_back(ToJson(r));
        }
        return (reports.size() == 1 ? arr[0] : arr).dump(2) + "\n";
    }
    std::string text = CsvHeader() + "\n";
    for (const auto& r : reports)
    {
        text += CsvRow(r) + "\n";
    }
    return text;
}

std::string
Fixed(double v, int digits)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

struct CommonOptions
{
    std::string configPath;
    std::string outDir = "out";
    std::string format = "csv";
    std::string protocol;
    std::string seeds;
    std::uint64_t seed = 0;
    bool seedGiven = false;
    std::string nodes;
    int jobs = 1;
    std::string variantPh;
    std::string variantCcs;
    std::string table3;
    bool eventLog = false;
};

void
ApplyVariants(const CommonOptions& o, FormulaVariant& v)
{
    if (!o.variantPh.empty())
    {
        v.ph = *ParsePhVariant(o.variantPh);
    }
    if (!o.variantCcs.empty())
    {
        v.ccs = *ParseCcsVariant(o.variantCcs);
    }
    if (!o.table3.empty())
    {
        v.table3 = *ParseTable3Orientation(o.table3);
    }
}

void
AddVariantFlags(CLI::App* app, CommonOptions& o)
{
    app->add_option("--variant-ph", o.variantPh, "ph formula: semantic | as-printed")
        ->check(CLI::IsMember({"semantic", "as-printed"}));
    app->add_option("--variant-ccs", o.variantCcs, "ccs formula: semantic | as-printed")
        ->check(CLI::IsMember({"semantic", "as-printed"}));
    app->add_option("--table3-orientation", o.table3, "temp-dominant | as-printed-rows")
        ->check(CLI::IsMember({"temp-dominant", "as-printed-rows"}));
}

void
AddScenarioFlags(CLI::App* app, CommonOptions& o)
{
    app->add_option("--config", o.configPath, "scenario file")->required();
    app->add_option("--out", o.outDir, "output directory");
    app->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--jobs", o.jobs, "parallel runs")->check(CLI::PositiveNumber);
    AddVariantFlags(app, o);
}

ScenarioConfig
LoadScenario(const CommonOptions& o)
{
    ScenarioConfig c = LoadConfig(o.configPath);
    ApplyVariants(o, c.variant);
    return c;
}

bool
EnsureDir(const std::string& dir, std::ostream& err)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
    {
        err << "error: cannot create output directory '" << dir << "'\n";
        return false;
    }
    return true;
}

std::vector<Protocol>
ProtocolsFor(const std::string& selector)
{
    if (selector.empty() || selector == "both")
    {
        return {Protocol::Baseline, Protocol::Fep};
    }
    return {*ParseProtocol(selector)};
}

int
DoRun(const CommonOptions& o, std::ostream& out, std::ostream& err)
{
    ScenarioConfig c = LoadScenario(o);
    if (o.seedGiven)
    {
        c.seed = o.seed;
    }
    if (!o.protocol.empty())
    {
        c.protocol = *ParseProtocol(o.protocol);
    }
    if (!o.nodes.empty())
    {
        c.nodeCount = ParseNodeList(o.nodes).at(0);
    }
    if (!EnsureDir(o.outDir, err))
    {
        return 1;
    }
    RunOptions ro;
    ro.recordLog = o.eventLog;
    const RunResult r = RunScenario(c, ro);
    const std::string stem = RunStem("run", c.protocol, c.seed, c.nodeCount);
    const auto base = std::filesystem::path(o.outDir) / stem;
    if (!WriteFile(base.string() + "." + o.format, ReportText({r.report}, o.format)))
    {
        err << "error: cannot write " << base.string() << "." << o.format << "\n";
        return 1;
    }
    if (o.eventLog && !WriteFile(base.string() + "_events.jsonl", r.eventLog))
    {
        err << "error: cannot write event log\n";
        return 1;
    }
    out << CsvHeader() << "\n" << CsvRow(r.report) << "\n";
    return 0;
}

int
DoSweep(const CommonOptions& o, std::ostream& out, std::ostream& err)
{
    const ScenarioConfig base = LoadScenario(o);
    const std::vector<int> nodes = o.nodes.empty() ? std::vector<int>{30, 60, 120} : ParseNodeList(o.nodes);
    std::vector<std::uint64_t> seeds;
    if (!o.seeds.empty())
    {
        seeds = ParseSeedList(o.seeds);
    }
    else
    {
        seeds = {o.seedGiven ? o.seed : base.seed};
    }
    const auto protocols = ProtocolsFor(o.protocol);
    if (!EnsureDir(o.outDir, err))
    {
        return 1;
    }
    std::vector<ScenarioConfig> configs;
    for (int n : nodes)
    {
        for (Protocol p : protocols)
        {
            for (std::uint64_t s : seeds)
            {
                ScenarioConfig c = base;
                c.nodeCount = n;
                c.protocol = p;
                c.seed = s;
                configs.push_back(c);
            }
        }
    }
    const auto reports = RunBatch(configs, o.jobs);
    std::size_t k = 0;
    for (int n : nodes)
    {
        for (Protocol p : protocols)
        {
            std::vector<MetricsReport> group(reports.begin() + k, reports.begin() + k + seeds.size());
            k += seeds.size();
            std::string name = "sweep_" + std::string(ToString(p)) + "_n" + std::to_string(n);
            if (seeds.size() == 1)
            {
                name = RunStem("sweep", p, seeds[0], n);
            }
            const auto path = std::filesystem::path(o.outDir) / (name + "." + o.format);
            if (!WriteFile(path, ReportText(group, o.format)))
            {
                err << "error: cannot write " << path.string() << "\n";
                return 1;
            }
            out << path.string() << "\n";
        }
    }
    return 0;
}

int
DoCompare(const CommonOptions& o, std::ostream& out, std::ostream& err)
{
    ScenarioConfig base = LoadScenario(o);
    if (!o.nodes.empty())
    {
        base.nodeCount = ParseNodeList(o.nodes).at(0);
    }
    std::vector<std::uint64_t> seeds;
    if (!o.seeds.empty())
    {
        seeds = ParseSeedList(o.seeds);
    }
    else if (o.seedGiven)
    {
        seeds = {o.seed};
    }
    else
    {
        seeds = ParseSeedList("1-10");
    }
    if (!EnsureDir(o.outDir, err))
    {
        return 1;
    }
    std::vector<ScenarioConfig> configs;
    for (std::uint64_t s : seeds)
    {
        for (Protocol p : {Protocol::Baseline, Protocol::Fep})
        {
            ScenarioConfig c = base;
            c.seed = s;
            c.protocol = p;
            configs.push_back(c);
        }
    }
    const auto reports = RunBatch(configs, o.jobs);
    std::vector<MetricsReport> baseline, fep;
    for (const auto& r : reports)
    {
        (r.protocol == Protocol::Baseline ? baseline : fep).push_back(r);
    }
    for (std::size_t i = 0; i < baseline.size(); ++i)
    {
        if (baseline[i].counters.mobilityHash != fep[i].counters.mobilityHash ||
            baseline[i].counters.trafficHash != fep[i].counters.trafficHash)
        {
            err << "error: paired runs for seed " << baseline[i].seed << " diverged in mobility or traffic\n";
            return 1;
        }
    }
    const PairedSummary summary = AggregatePaired(baseline, fep);

    const std::string stem = "compare_n" + std::to_string(base.nodeCount);
    const auto dir = std::filesystem::path(o.outDir);
    if (!WriteFile(dir / (stem + "_runs." + o.format), ReportText(reports, o.format)) ||
        !WriteFile(dir / (stem + "_summary.csv"), PairedSummaryCsv(base.nodeCount, summary)))
    {
        err << "error: cannot write compare outputs\n";
        return 1;
    }

    out << "metric,baseline_median,fep_median,median_delta,improvement_pct\n";
    for (const auto& [name, pct] : summary.improvementPct)
    {
        out << name << "," << Fixed(summary.baselineMedian.at(name), 4) << ","
            << Fixed(summary.fepMedian.at(name), 4) << "," << Fixed(summary.medianDelta.at(name), 4) << ","
            << Fixed(pct, 2) << "\n";
    }
    return 0;
}

} // namespace

std::vector<std::uint64_t>
ParseSeedList(const std::string& text)
{
    std::vector<std::uint64_t> seeds;
    for (auto part : SplitComma(text))
    {
        const auto dash = part.find('-');
        if (dash == std::string_view::npos)
        {
            seeds.push_back(ParseUnsigned(part));
            continue;
        }
        const auto lo = ParseUnsigned(part.substr(0, dash));
        const auto hi = ParseUnsigned(part.substr(dash + 1));
        if (hi < lo || hi - lo > 100000)
        {
            throw std::invalid_argument("bad seed range '" + std::string(part) + "'");
        }
        for (auto s = lo; s <= hi; ++s)
        {
            seeds.push_back(s);
        }
    }
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    {
        throw std::invalid_argument("duplicate seed in '" + text + "'");
    }
    return seeds;
}

std::vector<int>
ParseNodeList(const std::string& text)
{
    std::vector<int> nodes;
    for (auto part : SplitComma(text))
    {
        const auto v = ParseUnsigned(part);
        if (v < 1 || v > 100000)
        {
            throw std::invalid_argument("node count out of range: '" + std::string(part) + "'");
        }
        nodes.push_back(static_cast<int>(v));
    }
    return nodes;
}

std::string
RunStem(const std::string& prefix, Protocol protocol, std::uint64_t seed, int nodes)
{
    return prefix + "_" + std::string(ToString(protocol)) + "_s" + std::to_string(seed) + "_n" +
           std::to_string(nodes);
}

std::vector<MetricsReport>
RunBatch(const std::vector<ScenarioConfig>& configs, int jobs)
{
    std::vector<MetricsReport> reports(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++)
        {
            try
            {
                reports[i] = RunScenario(configs[i]).report;
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool)
    {
        t.join();
    }
    for (const auto& e : errors)
    {
        if (e)
        {
            std::rethrow_exception(e);
        }
    }
    return reports;
}

std::string
PairedSummaryCsv(int nodes, const PairedSummary& s)
{
    std::string header = "nodes,pairs";
    std::string row = std::to_string(nodes) + "," + std::to_string(s.seeds.size());
    for (const auto& [name, pct] : s.improvementPct)
    {
        header += "," + name + "_baseline_median," + name + "_fep_median," + name + "_median_delta," + name +
                  "_improvement_pct";
        row += "," + Fixed(s.baselineMedian.at(name), 6) + "," + Fixed(s.fepMedian.at(name), 6) + "," +
               Fixed(s.medianDelta.at(name), 6) + "," + Fixed(pct, 4);
    }
    int fewer = 0;
    if (auto it = s.deltas.find("rreq_packets"); it != s.deltas.end())
    {
        fewer = static_cast<int>(std::count_if(it->second.begin(), it->second.end(), [](double d) { return d < 0; }));
    }
    header += ",rreq_fewer_pairs";
    row += "," + std::to_string(fewer);
    return header + "\n" + row + "\n";
}

void
PrintSlReqEval(const std::string& jsonText, const FormulaVariant& cliVariant, std::ostream& out)
{
    Json j;
    try
    {
        j = Json::parse(jsonText);
    }
    catch (const std::exception& e)
    {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
    SlReqInputs in;
    double maxNap = 50.0;
    try
    {
        in.history.sent = j.at("s").get<std::uint64_t>();
        in.history.forwarded = j.at("r").get<std::uint64_t>();
        in.history.sleepRequests = j.value("sl", std::uint64_t{0});
        in.tauAb = j.at("tau_ab").get<double>();
        in.uplinkTaus = j.at("uplink_taus").get<std::vector<double>>();
        maxNap = j.value("max_nap_ms", 50.0);
        for (const auto& v : j.value("sessions", Json::array()))
        {
            HopSessionView view;
            view.forwarded = v.at("alpha1").get<std::uint64_t>();
            view.pending = v.at("alpha2").get<std::uint64_t>();
            for (const auto& g : v.value("alt_grades", Json::array()))
            {
                auto grade = ParseGrade(g.get<std::string>());
                if (!grade)
                {
                    throw std::invalid_argument("unknown grade " + g.dump());
                }
                view.alternativeGrades.push_back(*grade);
            }
            in.sessions.push_back(view);
        }
    }
    catch (const Json::exception& e)
    {
        throw std::invalid_argument(std::string("bad SL-REQ input: ") + e.what());
    }
    if (in.history.forwarded > in.history.sent)
    {
        throw std::invalid_argument("bad SL-REQ input: r exceeds s");
    }

    const SlReqTrace t = Evaluate(in, maxNap, cliVariant);
    out << "variant ph=" << ToString(cliVariant.ph) << " ccs=" << ToString(cliVariant.ccs)
        << " table3=" << ToString(cliVariant.table3) << "\n";
    out << "cl=" << Fixed(t.cl.cl, 6) << " bounds=[" << Fixed(t.cl.bounds.low, 6) << ", "
        << Fixed(t.cl.bounds.high, 6) << "]" << (t.cl.bounds.degenerate ? " degenerate" : "")
        << " -> " << ToString(t.clGrade) << "\n";
    out << "ph=" << Fixed(t.ph, 6) << " -> " << ToString(t.phGrade) << "\n";
    out << "ccs=" << Fixed(t.ccs, 6) << " -> " << ToString(t.ccsGrade) << "\n";
    out << "temp=" << ToString(t.temp) << "\n";
    out << "SLPR=" << ToString(t.slpr) << "\n";
    if (t.napMs)
    {
        out << "decision=Grant " << Fixed(*t.napMs, 3) << " ms\n";
    }
    else
    {
        out << "decision=Deny\n";
    }
}

int
RunCli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deterministic MANET simulator with the FEP sleep overlay"};
    app.require_subcommand(1);
    CommonOptions o;

    auto* run = app.add_subcommand("run", "execute one scenario");
    AddScenarioFlags(run, o);
    run->add_option("--seed", o.seed, "root seed");
    run->add_option("--protocol", o.protocol, "baseline | fep")->check(CLI::IsMember({"baseline", "fep"}));
    run->add_option("--nodes", o.nodes, "node count");
    run->add_flag("--event-log", o.eventLog, "also write the JSON-lines event log");

    auto* sweep = app.add_subcommand("sweep", "iterate node counts");
    AddScenarioFlags(sweep, o);
    sweep->add_option("--nodes", o.nodes, "comma-separated node counts (default 30,60,120)");
    sweep->add_option("--seed", o.seed, "root seed");
    sweep->add_option("--seeds", o.seeds, "seed list, e.g. 1-10 or 1,2,5");
    sweep->add_option("--protocol", o.protocol, "baseline | fep | both")
        ->check(CLI::IsMember({"baseline", "fep", "both"}));

    auto* compare = app.add_subcommand("compare", "paired baseline vs FEP runs");
    AddScenarioFlags(compare, o);
    compare->add_option("--seeds", o.seeds, "seed list (default 1-10)");
    compare->add_option("--seed", o.seed, "single seed");
    compare->add_option("--nodes", o.nodes, "node count");

    std::string evalPath;
    auto* eval = app.add_subcommand("slreq-eval", "print the controller trace for a JSON input");
    eval->add_option("input", evalPath, "JSON file")->required();
    AddVariantFlags(eval, o);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        std::ostringstream cliOut, cliErr;
        const int code = app.exit(e, cliOut, cliErr);
        out << cliOut.str();
        err << cliErr.str();
        return code;
    }
    o.seedGiven = (run->count("--seed") + sweep->count("--seed") + compare->count("--seed")) > 0;

    try
    {
        if (*run)
        {
            return DoRun(o, out, err);
        }
        if (*sweep)
        {
            return DoSweep(o, out, err);
        }
        if (*compare)
        {
            return DoCompare(o, out, err);
        }
        std::ifstream in(evalPath);
        if (!in)
        {
            err << "error: cannot open " << evalPath << "\n";
            return 1;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        FormulaVariant v;
        ApplyVariants(o, v);
        PrintSlReqEval(buf.str(), v, out);
        return 0;
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace fep
