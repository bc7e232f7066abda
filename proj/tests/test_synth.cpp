#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "scadascope/ingest.hpp"
#include "scadascope/pcap.hpp"
#include "scadascope/records.hpp"
#include "scadascope/rng.hpp"
#include "scadascope/synth.hpp"
#include "test_util.hpp"

using namespace scadascope;

namespace {

ScenarioConfig single_group(int fds, double duration) {
  ScenarioConfig c;
  c.name = "test";
  c.duration = duration;
  c.seed = 9;
  ScadaGroup g;
  g.num_field_devices = fds;
  c.scada_groups.push_back(g);
  return c;
}

}  // namespace

TEST(Rng, DeterministicAndStreamSeparated) {
  Rng a(42, 1), b(42, 1), c(42, 2);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs = differs || x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, MomentsOfNormalAndExponential) {
  Rng r(7, 0);
  const int n = 200000;
  double s = 0, s2 = 0, e = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(3.0, 2.0);
    s += x;
    s2 += x * x;
    e += r.exponential(5.0);
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 3.0, 0.02);
  EXPECT_NEAR(s2 / n - mean * mean, 4.0, 0.05);
  EXPECT_NEAR(e / n, 5.0, 0.05);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
}

TEST(Synth, SameSeedSameBytes) {
  auto c = presets::dataset1_like(3);
  c.duration = 1800;
  const auto a = generate(c);
  const auto b = generate(c);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.truth, b.truth);
  c.seed = 4;
  EXPECT_NE(generate(c).records, a.records);
}

TEST(Synth, OutputIsTimeOrdered) {
  auto c = presets::dataset2_like(2);
  c.duration = 3600;
  const auto t = generate(c);
  ASSERT_FALSE(t.records.empty());
  for (std::size_t i = 1; i < t.records.size(); ++i) ASSERT_LE(t.records[i - 1].ts, t.records[i].ts);
  EXPECT_GE(t.records.front().ts, from_seconds(c.start_time));
}

TEST(Synth, TruthLabelsExactlyTheEmittedAddresses) {
  for (auto c : {presets::dataset1_like(5), presets::dataset2_like(5), presets::office(5)}) {
    c.duration = 3600;
    const auto t = generate(c);
    std::set<Ipv4> emitted;
    for (const auto& r : t.records) {
      emitted.insert(r.src_ip);
      emitted.insert(r.dst_ip);
    }
    std::set<Ipv4> labeled;
    for (const auto& [ip, label] : t.truth.labels) labeled.insert(ip);
    EXPECT_EQ(emitted, labeled) << c.name;
  }
}

TEST(Synth, PresetRoles) {
  auto c = presets::dataset1_like(1);
  c.duration = 3600;
  const auto t = generate(c);
  std::map<DeviceRole, int> roles;
  for (const auto& [ip, label] : t.truth.labels) ++roles[label.role];
  EXPECT_EQ(roles[DeviceRole::field_device], 49);
  EXPECT_EQ(roles[DeviceRole::master], 1);
  EXPECT_EQ(roles[DeviceRole::hmi], 1);
  EXPECT_GE(roles[DeviceRole::peripheral], 10);
  EXPECT_EQ(t.truth.labels.at(kMasterIp).role, DeviceRole::master);
  EXPECT_EQ(t.truth.labels.at(field_device_ip(0, 30)).protocol_port, Port{20000});
}

TEST(Synth, EachFieldDeviceUsesOnePort) {
  auto c = presets::dataset2_like(6);
  c.duration = 7200;
  const auto t = generate(c);
  std::map<Ipv4, std::set<Port>> own;
  for (const auto& r : t.records) {
    own[r.src_ip].insert(r.src_port);
    own[r.dst_ip].insert(r.dst_port);
  }
  for (const auto& [ip, label] : t.truth.labels) {
    if (label.role != DeviceRole::field_device) continue;
    EXPECT_EQ(own[ip], (std::set<Port>{*label.protocol_port})) << to_string(ip);
  }
}

TEST(Synth, MasterPortsGrowWithReconnects) {
  auto count_master_ports = [](double rate) {
    auto c = single_group(5, 6 * 3600);
    c.master.reconnect_rate = rate;
    std::set<Port> ports;
    for (const auto& r : generate(c).records) {
      if (r.src_ip == kMasterIp) ports.insert(r.src_port);
      if (r.dst_ip == kMasterIp) ports.insert(r.dst_port);
    }
    return ports.size();
  };
  EXPECT_EQ(count_master_ports(0), 5u);
  const auto some = count_master_ports(8);
  const auto many = count_master_ports(48);
  EXPECT_GT(some, 5u);
  EXPECT_GT(many, some);
}

TEST(Synth, PollIntervalStatisticsConverge) {
  auto c = single_group(4, 50'000);
  c.master.reconnect_rate = 0;
  c.scada_groups[0].poll_mean = 10;
  c.scada_groups[0].poll_jitter_stddev = 1.5;
  const auto t = generate(c);
  const auto table = build_ft_table(t.records, kMicrosPerSecond);
  std::vector<double> iat;
  for (const auto& ft : table) {
    if (ft.key.src_port != 20000) continue;
    for (auto v : ft.iat) iat.push_back(to_seconds(v));
  }
  ASSERT_GE(iat.size(), 1000u);
  double mean = 0;
  for (auto v : iat) mean += v;
  mean /= static_cast<double>(iat.size());
  double var = 0;
  for (auto v : iat) var += (v - mean) * (v - mean);
  var /= static_cast<double>(iat.size());
  EXPECT_NEAR(mean, 10.0, 0.05 * 10.0);
  EXPECT_NEAR(var, 1.5 * 1.5, 0.05 * 1.5 * 1.5);
}

TEST(Synth, ServiceChatterShareMatchesFilter) {
  // 10 devices at 2 packets per 10 s against 3 NTP hosts at 2 packets per
  // 40 s: about 7% of packets are service traffic.
  auto c = single_group(10, 6 * 3600);
  PeripheralConfig ntp;
  ntp.kind = PeripheralKind::ntp;
  ntp.period = 40;
  ntp.count = 3;
  c.peripherals.push_back(ntp);
  const auto t = generate(c);
  FilterStats stats;
  filter_packets(t.records, FilterConfig::defaults(), &stats);
  const double kept = static_cast<double>(stats.kept) / static_cast<double>(stats.input());
  EXPECT_NEAR(kept, 0.93, 0.01);
  EXPECT_EQ(stats.dropped_transport + stats.dropped_service, stats.input() - stats.kept);
}

TEST(Synth, ZeroFieldDevices) {
  ScenarioConfig c;
  c.duration = 600;
  PeripheralConfig hb;
  hb.kind = PeripheralKind::heartbeat;
  hb.period = 20;
  hb.size = 100;
  c.peripherals.push_back(hb);
  const auto t = generate(c);
  EXPECT_FALSE(t.records.empty());
  for (const auto& [ip, label] : t.truth.labels) EXPECT_EQ(label.role, DeviceRole::peripheral);
  EXPECT_TRUE(generate(ScenarioConfig{}).records.empty());
}

TEST(Synth, ValidationRejectsImpossibleConfigs) {
  auto expect_invalid = [](auto mutate) {
    auto c = single_group(3, 600);
    mutate(c);
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_THROW(generate(c), ValidationError);
  };
  expect_invalid([](ScenarioConfig& c) { c.scada_groups[0].poll_jitter_stddev = 10; });
  expect_invalid([](ScenarioConfig& c) { c.scada_groups[0].poll_mean = 1.0; });
  expect_invalid([](ScenarioConfig& c) { c.scada_groups[0].object_sizes = {100}; });
  expect_invalid([](ScenarioConfig& c) { c.scada_groups[0].object_sizes = {}; });
  expect_invalid([](ScenarioConfig& c) { c.duration = 0; });
  expect_invalid([](ScenarioConfig& c) { c.layers = 4; });
  expect_invalid([](ScenarioConfig& c) { c.scada_groups.push_back(c.scada_groups[0]); });
  expect_invalid([](ScenarioConfig& c) { c.reporters.push_back(ReporterConfig{502, 0.3, 2}); });
  expect_invalid([](ScenarioConfig& c) {
    PeripheralConfig p;
    p.size = 30;
    c.peripherals.push_back(p);
  });
  expect_invalid([](ScenarioConfig& c) {
    c.layers = 3;
    c.hmi.size = 40;
  });
  expect_invalid([](ScenarioConfig& c) {
    // Master-initiated bulk polls would outweigh the HMI stream.
    c.layers = 3;
    c.scada_groups[0].initiator = Initiator::master;
    c.scada_groups[0].poll_mean = 2;
    c.scada_groups[0].poll_jitter_stddev = 0.1;
    c.scada_groups[0].object_sizes = {60000};
  });
  single_group(3, 600).validate();
}

TEST(Synth, ScenarioJsonRoundTrip) {
  for (const auto& c : {presets::dataset1_like(2), presets::dataset2_like(3), presets::month_scale(4), presets::office(5)}) {
    const auto text = scenario_json(c);
    EXPECT_EQ(scenario_json(parse_scenario(text)), text) << c.name;
  }
  EXPECT_THROW(parse_scenario("{"), FormatError);
  EXPECT_THROW(parse_scenario(R"({"duration": 10, "bogus": 1})"), Error);
  EXPECT_THROW(parse_scenario(R"({"scada_groups": [{"port": 70000}]})"), ValidationError);
}

TEST(Synth, PcapRoundTripOfGeneratedTrace) {
  testutil::TempDir dir;
  auto c = presets::dataset1_like(8);
  c.duration = 900;
  const auto t = generate(c);
  write_pcap(t.records, dir.file("d1.pcap"));
  EXPECT_EQ(read_pcap(dir.file("d1.pcap")), t.records);
  write_records(t.records, dir.file("d1.jsonl"));
  EXPECT_EQ(read_records(dir.file("d1.jsonl")), t.records);
}
