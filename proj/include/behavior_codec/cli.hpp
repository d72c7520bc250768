#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>

namespace behavior_codec {

/// Environment variables the CLI reads: BEHAVIOR_CODEC_CONFIG (config file),
/// BEHAVIOR_CODEC_BACKEND, BEHAVIOR_CODEC_SEED (scripted seed),
/// BEHAVIOR_CODEC_API_KEY and BEHAVIOR_CODEC_BASE_URL.
using Environment = std::map<std::string, std::string>;

/// The BEHAVIOR_CODEC_* variables of the current process.
Environment process_environment();

/// Runs one CLI invocation; `args` excludes the program name. Returns 0 on
/// success, 1 on pipeline failure (error JSON on `err`) and 2 on usage
/// errors.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err,
            const Environment& env = process_environment());

}  // namespace behavior_codec
