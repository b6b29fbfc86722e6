#ifndef HDC_CLI_COMMANDS_HPP_
#define HDC_CLI_COMMANDS_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>

#include "hdc/cascade.hpp"
#include "hdc/cli/run_config.hpp"

namespace hdc::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kIoError = 2,
  kTrainingAborted = 3,
  kGradcheckFailed = 4,
};

struct CommandOptions {
  std::optional<std::filesystem::path> checkpoint;
  /// 1-based cascade level to evaluate alone.
  std::optional<std::size_t> level;
  std::optional<std::filesystem::path> out;
};

/// Gradient check passes below this worst relative error.
inline constexpr double kGradcheckTolerance = 1e-4;

/// Lets tests corrupt analytic gradients to prove the check fails.
using GradientHook = std::function<void(Parameters&)>;

// Commands throw hdc::Error subclasses on failure; run() maps them to exit codes.
int cmd_synth(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_embed(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_histogram(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out, const GradientHook& hook = {});

/// Parses argv, resolves the config and dispatches; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hdc::cli

#endif  // HDC_CLI_COMMANDS_HPP_
