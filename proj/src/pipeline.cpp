#include "scadascope/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace scadascope {

void AnalysisConfig::validate() const {
  if (t_comm <= 0) throw ValidationError("t_comm must be positive");
  if (reorder_window < 0) throw ValidationError("reorder window must not be negative");
  if (shards < 1) throw ValidationError("shard count must be at least 1");
  if (!(features.periodicity_cap > 0)) throw ValidationError("periodicity cap must be positive");
  inference.validate();
}

namespace {

Analysis build(PacketSource& source, const AnalysisConfig& config) {
  config.validate();
  Analysis out;
  std::optional<FilteredSource> filtered;
  PacketSource* feed = &source;
  if (config.filter) {
    filtered.emplace(source, *config.filter);
    feed = &*filtered;
  }
  OrderedSource ordered(*feed, config.reorder_window, config.force_sort);
  FtTableBuilder builder(config.t_comm, config.shards, config.keep_segments);
  PacketRecord r;
  while (ordered.next(r)) builder.push(r);
  out.fts = builder.finish();
  out.counts = builder.counts();
  out.reordered = ordered.reordered();
  if (config.keep_segments) out.segments = std::move(builder.segments());
  if (filtered) {
    out.filter = filtered->stats();
  } else {
    out.filter.kept = out.counts.records;
  }
  const auto index = PortUsageIndex::build(out.fts, config.features.popularity);
  out.ranking = rank(out.fts, index, config.features, config.shards);
  return out;
}

}  // namespace

Analysis rank_only(PacketSource& source, const AnalysisConfig& config) { return build(source, config); }

Analysis analyze(PacketSource& source, const AnalysisConfig& config) {
  auto out = build(source, config);
  out.report = run_inference(out.fts, out.ranking, config.inference);
  return out;
}

Analysis analyze(std::span<const PacketRecord> records, const AnalysisConfig& config) {
  VectorSource source(records);
  return analyze(source, config);
}

std::size_t top_k_on_port(const Ranking& ranking, std::size_t k, Port port) {
  const auto limit = std::min(k, ranking.size());
  return static_cast<std::size_t>(std::count_if(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(limit),
                                                [port](const RankedFt& r) { return r.key.touches_port(port); }));
}

StabilityResult prefix_stability(std::span<const PacketRecord> records, const AnalysisConfig& config,
                                 std::vector<double> fractions) {
  for (double f : fractions) {
    if (!(f > 0 && f <= 1)) throw ValidationError("prefix fractions must lie in (0, 1]");
  }
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());

  std::vector<PacketRecord> sorted;
  auto ordered = records;
  const auto by_ts = [](const PacketRecord& a, const PacketRecord& b) { return a.ts < b.ts; };
  if (!std::is_sorted(records.begin(), records.end(), by_ts)) {
    sorted.assign(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(), by_ts);
    ordered = sorted;
  }

  StabilityResult result;
  result.full = analyze(ordered, config).report;
  if (ordered.empty()) {
    for (double f : fractions) result.runs.push_back(PrefixRun{f, 0, 0, result.full, true});
    if (!fractions.empty()) result.smallest_stable = fractions.front();
    return result;
  }

  const Micros first = ordered.front().ts;
  const Micros span = ordered.back().ts - first;
  for (double f : fractions) {
    PrefixRun run;
    run.fraction = f;
    run.cutoff = f == 1.0 ? ordered.back().ts : first + static_cast<Micros>(std::floor(f * static_cast<double>(span)));
    const auto end = std::upper_bound(ordered.begin(), ordered.end(), run.cutoff,
                                      [](Micros t, const PacketRecord& r) { return t < r.ts; });
    const auto prefix = ordered.subspan(0, static_cast<std::size_t>(end - ordered.begin()));
    run.records = prefix.size();
    run.report = prefix.size() == ordered.size() ? result.full : analyze(prefix, config).report;
    run.matches_full = run.report.same_topology(result.full);
    result.runs.push_back(std::move(run));
  }
  for (auto it = result.runs.rbegin(); it != result.runs.rend() && it->matches_full; ++it) {
    result.smallest_stable = it->fraction;
  }
  return result;
}

}  // namespace scadascope
