#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scadascope/ingest.hpp"
#include "scadascope/pipeline.hpp"

namespace scadascope {

inline constexpr std::string_view kVersion = "0.1.0";

/// Reproducibility envelope embedded in every report. The worker count is
/// deliberately absent: it never changes results, and leaving it out keeps
/// reports byte-identical across shard counts.
struct RunManifest {
  std::vector<std::string> inputs;
  std::string input_sha256;  // over the concatenated input bytes
  IngestStats ingest;
  double duration_seconds = 0;
};

/// Full analysis report. Keys are emitted in a fixed order and every set is
/// sorted, so equal inputs and configs give equal bytes apart from
/// manifest.duration_seconds.
std::string report_json(const Analysis& analysis, const AnalysisConfig& config, const RunManifest& manifest);

/// Effective analysis configuration as a JSON object.
std::string config_json(const AnalysisConfig& config);

/// Table-1 style listing of the first `top` entries (all when top is 0).
std::string ranking_table(const Ranking& ranking, std::size_t top);
std::string ranking_csv(const Ranking& ranking, std::size_t top);

/// Graphviz digraph: box = field device, doublecircle = master,
/// diamond = HMI, ellipse = unclassified. Only edges with at least one
/// classified endpoint are drawn; labels are "port (segments)".
std::string topology_dot(const TopologyReport& report, const FtTable& fts);

}  // namespace scadascope
