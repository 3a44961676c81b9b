#ifndef FEP_CLI_H
#define FEP_CLI_H

// Command-line front end: run, sweep, compare and slreq-eval.

#include "fep/config.h"
#include "fep/fuzzy.h"
#include "fep/metrics.h"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fep
{

/// "1-10", "1,4,7" or "3" -> list of seeds. Throws std::invalid_argument.
std::vector<std::uint64_t> ParseSeedList(const std::string& text);

/// "30,60,120" -> node counts. Throws std::invalid_argument.
std::vector<int> ParseNodeList(const std::string& text);

/// Output file stem, e.g. "run_fep_s3_n60".
std::string RunStem(const std::string& prefix, Protocol protocol, std::uint64_t seed, int nodes);

/// Runs every config on up to `jobs` threads; results keep the input order.
std::vector<MetricsReport> RunBatch(const std::vector<ScenarioConfig>& configs, int jobs);

/// Reads an SL-REQ input description (JSON) and prints the controller trace.
/// Throws std::invalid_argument on malformed input.
void PrintSlReqEval(const std::string& jsonText,
                    const FormulaVariant& variant,
                    std::ostream& out);

/// Paired summary as one CSV row per metric-set.
std::string PairedSummaryCsv(int nodes, const PairedSummary& summary);

/// Entry point; returns the process exit status.
int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace fep

#endif // FEP_CLI_H
