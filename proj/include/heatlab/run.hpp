#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "heatlab/config.hpp"
#include "heatlab/error.hpp"
#include "heatlab/verifier.hpp"

namespace heatlab {

/// Process exit codes. Module errors map one-to-one onto codes >= 3.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitScheduleUnreachable = 3,
  kExitInternal = 70,
};

int exit_code_for(ErrorCode code) noexcept;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string error;                   ///< empty on success
  std::vector<std::string> artifacts;  ///< file names inside the output directory
  std::string summary;                 ///< text for standard output
};

/// Commands: geom, rho, kernel, mc, gfield, verify. Writes the artifacts plus
/// manifest.json into `outdir` (created if missing). Never throws for module
/// errors; they come back as exit codes with the message in `error`.
RunOutcome run(const RunConfig& cfg, std::string_view command, const std::string& outdir);

/// Names of the checks a suite expands to, in report order.
std::vector<std::string> suite_checks(std::string_view suite);

/// Runs the checks of a suite concurrently with the per-check setups described
/// in docs/schema.md. A check that throws yields a report with no criteria and
/// the error in its notes; `errors` receives the codes in report order.
std::vector<BoundReport> run_suite(const RunConfig& cfg, std::string_view suite,
                                   std::vector<std::pair<std::size_t, Error>>* errors = nullptr);

}  // namespace heatlab
