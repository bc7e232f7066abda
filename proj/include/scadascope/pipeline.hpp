#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scadascope/features.hpp"
#include "scadascope/inference.hpp"
#include "scadascope/ingest.hpp"
#include "scadascope/segmentation.hpp"

namespace scadascope {

struct AnalysisConfig {
  std::optional<FilterConfig> filter;  // unset: every record is kept
  Micros t_comm = kMicrosPerSecond;
  Micros reorder_window = kMicrosPerSecond;
  bool force_sort = false;
  FeatureConfig features;
  InferenceConfig inference;
  unsigned shards = 1;  // worker threads; never changes the result
  bool keep_segments = false;

  void validate() const;
};

struct Analysis {
  FilterStats filter;
  std::uint64_t reordered = 0;
  BuildCounts counts;
  FtTable fts;
  std::vector<CommunicationSegment> segments;  // only with keep_segments
  Ranking ranking;
  TopologyReport report;
};

/// Source -> filter -> reorder -> segments/fts -> ranking -> inference.
Analysis analyze(PacketSource& source, const AnalysisConfig& config);
Analysis analyze(std::span<const PacketRecord> records, const AnalysisConfig& config);

/// Segmentation and ranking only.
Analysis rank_only(PacketSource& source, const AnalysisConfig& config);

/// Number of the first k ranked entries with `port` on either side.
std::size_t top_k_on_port(const Ranking& ranking, std::size_t k, Port port);

struct PrefixRun {
  double fraction = 0;
  Micros cutoff = 0;  // records with ts <= cutoff were analyzed
  std::uint64_t records = 0;
  TopologyReport report;
  bool matches_full = false;
};

struct StabilityResult {
  std::vector<PrefixRun> runs;  // ascending fraction
  TopologyReport full;
  /// Smallest listed fraction from which every larger listed fraction gives
  /// the full-trace topology; unset when even the largest one differs.
  std::optional<double> smallest_stable;
};

/// Reruns the analysis on time prefixes: a fraction p keeps the records with
/// ts <= first_ts + p * (last_ts - first_ts). Fractions must lie in (0, 1].
StabilityResult prefix_stability(std::span<const PacketRecord> records, const AnalysisConfig& config,
                                 std::vector<double> fractions);

}  // namespace scadascope
