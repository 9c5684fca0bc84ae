#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fxmf::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

/// args[0] is the subcommand: ingest, returns, distfit, autocorr, rmt, mfdfa,
/// epps, synth or pipeline. Every subcommand accepts --config <json> (values
/// from the file, overridden by explicit flags) and writes
/// resolved_config.json and summary.json into --output-dir.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace fxmf::cli
