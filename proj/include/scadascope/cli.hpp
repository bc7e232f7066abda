#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "scadascope/inference.hpp"

namespace scadascope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;          // unreadable input or bad configuration
inline constexpr int kExitLowConfidence = 3;  // partial or low-confidence analysis

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hardware concurrency, capped by SCADASCOPE_THREADS when it is set.
unsigned default_threads();

/// Hex SHA-256 of the concatenated file contents.
std::string sha256_files(const std::vector<std::string>& paths);

/// Reads the topology part (ports, device sets, HMI) of a report written by
/// `analyze`.
TopologyReport load_report_topology(const std::string& path);

}  // namespace scadascope::cli
