#pragma once

// Batch command line: gen, fit, compare, report, intervals.
//
// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
// Every output file gets a sidecar `<file>.manifest.json` with the command,
// configuration echo, input digests, tool version, seed and wall-clock time;
// the payload files themselves are byte-identical across reruns.

#include <ostream>
#include <string>
#include <vector>

namespace fhm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string digest(const std::string& bytes);

}  // namespace fhm::cli
