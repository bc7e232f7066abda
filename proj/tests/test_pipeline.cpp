#include <gtest/gtest.h>

#include "json.hpp"

#include "scadascope/cli.hpp"
#include "scadascope/pipeline.hpp"
#include "scadascope/report.hpp"
#include "scadascope/synth.hpp"
#include "test_util.hpp"

using namespace scadascope;
using nlohmann::json;

namespace {

Trace small_trace(std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.name = "small";
  c.seed = seed;
  c.duration = 2 * 3600;
  c.layers = 3;
  ScadaGroup g;
  g.num_field_devices = 6;
  g.object_sizes = {340, 225};
  c.scada_groups.push_back(g);
  for (auto kind : {PeripheralKind::ntp, PeripheralKind::heartbeat, PeripheralKind::backup}) {
    PeripheralConfig p;
    p.kind = kind;
    p.period = kind == PeripheralKind::backup ? 900 : 60;
    p.size = kind == PeripheralKind::backup ? 20000 : 120;
    c.peripherals.push_back(p);
  }
  return generate(c);
}

AnalysisConfig three_layer() {
  AnalysisConfig a;
  a.inference.three_layer = true;
  return a;
}

}  // namespace

TEST(Pipeline, SourceAndSpanAgree) {
  const auto t = small_trace();
  const auto cfg = three_layer();
  const auto a = analyze(t.records, cfg);
  VectorSource src(t.records);
  const auto b = analyze(src, cfg);
  EXPECT_EQ(a.fts, b.fts);
  EXPECT_TRUE(a.report.same_topology(b.report));
  EXPECT_EQ(a.counts.records, t.records.size());
  ASSERT_EQ(a.report.protocols.size(), 1u);
  EXPECT_EQ(a.report.protocols[0].scada_port, 20000);
  EXPECT_EQ(a.report.field_devices().size(), 6u);
  EXPECT_EQ(a.report.master_servers(), (std::set<Ipv4>{kMasterIp}));
  ASSERT_TRUE(a.report.hmi.has_value());
  EXPECT_EQ(a.report.hmi->ip, kHmiIp);
  EXPECT_EQ(a.report.status, ReportStatus::ok);
}

TEST(Pipeline, FilterStatsAreReported) {
  const auto t = small_trace();
  auto cfg = three_layer();
  cfg.filter = FilterConfig::defaults();
  const auto a = analyze(t.records, cfg);
  EXPECT_GT(a.filter.dropped(), 0u);
  EXPECT_EQ(a.filter.input(), t.records.size());
  EXPECT_EQ(a.counts.records, a.filter.kept);
}

TEST(Pipeline, ConfigValidation) {
  AnalysisConfig c;
  c.t_comm = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.shards = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.features.periodicity_cap = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Pipeline, TopKOnPort) {
  const auto a = analyze(small_trace().records, AnalysisConfig{});
  EXPECT_EQ(top_k_on_port(a.ranking, 0, 20000), 0u);
  EXPECT_EQ(top_k_on_port(a.ranking, a.ranking.size() + 10, 20000), top_k_on_port(a.ranking, a.ranking.size(), 20000));
  EXPECT_LE(top_k_on_port(a.ranking, 5, 20000), 5u);
  EXPECT_EQ(top_k_on_port(a.ranking, 1, 20000), 1u);
  EXPECT_EQ(top_k_on_port(a.ranking, 10, 1), 0u);
}

TEST(Stability, FullFractionEqualsFullAnalysis) {
  const auto t = small_trace(2);
  const auto r = prefix_stability(t.records, three_layer(), {1.0, 0.5, 0.001, 0.5});
  ASSERT_EQ(r.runs.size(), 3u);
  EXPECT_DOUBLE_EQ(r.runs[0].fraction, 0.001);
  EXPECT_TRUE(r.runs.back().matches_full);
  EXPECT_EQ(r.runs.back().records, t.records.size());
  EXPECT_TRUE(r.runs.back().report.same_topology(r.full));
  // A sliver of the trace has no ft with two segments.
  EXPECT_FALSE(r.runs[0].matches_full);
  EXPECT_LT(r.runs[0].records, r.runs[1].records);
  ASSERT_TRUE(r.smallest_stable.has_value());
  EXPECT_GE(*r.smallest_stable, 0.5);
  EXPECT_THROW(prefix_stability(t.records, AnalysisConfig{}, {0.0}), ValidationError);
  EXPECT_THROW(prefix_stability(t.records, AnalysisConfig{}, {1.5}), ValidationError);
}

TEST(Report, JsonLayout) {
  const auto t = small_trace();
  const auto cfg = three_layer();
  const auto a = analyze(t.records, cfg);
  RunManifest m;
  m.inputs = {"trace.jsonl"};
  m.input_sha256 = "00";
  const auto text = report_json(a, cfg, m);
  const auto j = json::parse(text);
  EXPECT_LT(text.find("\"protocols\""), text.find("\"hmi\""));
  EXPECT_LT(text.find("\"hmi\""), text.find("\"unclassified\""));
  EXPECT_LT(text.find("\"metrics\""), text.find("\"manifest\""));
  EXPECT_EQ(j["protocols"][0]["scada_port"], 20000);
  EXPECT_EQ(j["protocols"][0]["field_devices"].size(), 6u);
  EXPECT_EQ(j["protocols"][0]["master_servers"][0], "10.0.0.1");
  EXPECT_EQ(j["hmi"], "10.0.0.2");
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["metrics"]["records"], t.records.size());
  EXPECT_EQ(j["manifest"]["version"], std::string(kVersion));
  EXPECT_FALSE(j["manifest"]["config"].contains("shards"));
  EXPECT_EQ(report_json(a, cfg, m), text);
  auto other = cfg;
  other.shards = 8;
  EXPECT_EQ(report_json(a, other, m), text);
}

TEST(Report, TopologyRoundTripThroughFile) {
  testutil::TempDir dir;
  const auto cfg = three_layer();
  const auto a = analyze(small_trace().records, cfg);
  testutil::spit(dir.file("r.json"), report_json(a, cfg, RunManifest{}));
  const auto back = cli::load_report_topology(dir.file("r.json"));
  EXPECT_TRUE(back.same_topology(a.report));
  auto changed = a.report;
  changed.protocols[0].field_devices.erase(changed.protocols[0].field_devices.begin());
  EXPECT_FALSE(back.same_topology(changed));
}

TEST(Report, RankingTableAndCsv) {
  const auto a = analyze(small_trace().records, AnalysisConfig{});
  const auto csv = ranking_csv(a.ranking, 5);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rank,src_ip,src_port,dst_ip,dst_port,seg_size,n,pR_n,dR_n,cR_n,uR_n,sR_n,f,pR,dR,cR,uR,sR");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  const auto all = ranking_csv(a.ranking, 0);
  EXPECT_EQ(static_cast<std::size_t>(std::count(all.begin(), all.end(), '\n')), a.ranking.size() + 1);
  const auto table = ranking_table(a.ranking, 3);
  EXPECT_NE(table.find("SegSize"), std::string::npos);
}

TEST(Report, DotShapes) {
  const auto a = analyze(small_trace().records, three_layer());
  const auto dot = topology_dot(a.report, a.fts);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_NE(dot.find("shape=box"), std::string::npos);
  EXPECT_NE(dot.find("shape=doublecircle"), std::string::npos);
  EXPECT_NE(dot.find("shape=diamond"), std::string::npos);
  EXPECT_NE(dot.find("20000 ("), std::string::npos);
}
