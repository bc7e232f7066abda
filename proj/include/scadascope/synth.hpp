#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scadascope/evaluation.hpp"
#include "scadascope/types.hpp"

namespace scadascope {

enum class Initiator { field_device, master };

/// Field devices that share one SCADA port and polling profile.
struct ScadaGroup {
  Port port = 20000;
  int num_field_devices = 0;
  double poll_mean = 10.0;  // seconds
  double poll_jitter_stddev = 1.0;
  /// Total bytes of one segment; a device's polls cycle through the list.
  std::vector<std::uint32_t> object_sizes{300};
  bool response = true;  // a 60-byte reply follows each request
  /// Side that sends the first packet of a segment (and so becomes ft Src).
  Initiator initiator = Initiator::field_device;
};

struct MasterConfig {
  Port ephemeral_low = 49152;
  Port ephemeral_high = 65535;
  double reconnect_rate = 1.0;  // expected reconnects per field device per day
};

/// Master -> HMI forwarding in three-layer scenarios.
struct HmiConfig {
  Port port = 20500;
  double interval_mean = 4.0;  // exponential part added to min_interval
  std::uint32_t size = 1514;
};

enum class PeripheralKind { ntp, heartbeat, backup, x11, netbios };

std::string_view to_string(PeripheralKind kind);

struct PeripheralConfig {
  PeripheralKind kind = PeripheralKind::ntp;
  double period = 64;  // seconds
  std::uint32_t size = 90;
  std::optional<double> jitter;  // Gaussian stddev; defaults to 1% of period
  int count = 1;                 // hosts running this pattern
  std::string host_group = "peripheral";  // or "office" to reuse office hosts
  std::optional<Ipv4> server;

  double effective_jitter() const { return jitter ? *jitter : period / 100.0; }
};

/// Workstation that sends SCADA reports from a group's port to the master
/// but fails one field-device condition: a share of its segments and its
/// number of distinct peers are both configurable.
struct ReporterConfig {
  Port group_port = 20000;
  double scada_share = 0.3;
  int peers = 2;
};

struct NoiseConfig {
  bool nonresponder_retry = false;  // master retries a dead host at t, t+3, t+9
  double retry_period = 600;
};

/// Aperiodic client/server sessions; every office host talks to every office
/// server, so its degree equals `servers`.
struct OfficeConfig {
  int hosts = 0;
  int servers = 5;
  double session_mean = 120;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 3600;  // seconds
  std::uint64_t seed = 1;
  double start_time = 1'700'000'000;  // epoch seconds of the first possible packet
  double min_interval = 1.1;          // truncation floor for every periodic draw
  std::vector<ScadaGroup> scada_groups;
  MasterConfig master;
  int layers = 2;
  HmiConfig hmi;
  std::vector<PeripheralConfig> peripherals;
  std::vector<ReporterConfig> reporters;
  NoiseConfig noise;
  OfficeConfig office;

  /// Throws ValidationError for impossible configurations.
  void validate() const;
  int total_field_devices() const;
};

ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_json(const ScenarioConfig& config);

struct Trace {
  std::vector<PacketRecord> records;  // time ordered
  GroundTruth truth;                  // exactly the emitted addresses
};

/// Deterministic for a given config. Address plan:
///   master 10.0.0.1, HMI 10.0.0.2, field devices 10.(1+g).x.y,
///   reporters 10.100.r.*, peripherals 10.200.k.*, office 10.210/10.211.0.*,
///   non-responding host 10.250.0.1.
Trace generate(const ScenarioConfig& config);

inline constexpr Ipv4 kMasterIp{0x0a000001};
inline constexpr Ipv4 kHmiIp{0x0a000002};
inline constexpr Ipv4 kNonresponderIp{0x0afa0001};

Ipv4 field_device_ip(int group, int device);

namespace presets {

/// 49 field devices on 20000 polled every 8.75 s (stddev 1.22 s), Table-1
/// object sizes, one master, one HMI, two reporting workstations, eleven
/// peripheral patterns, retry noise, 24 h.
ScenarioConfig dataset1_like(std::uint64_t seed = 1);
/// 22 field devices on 2404 (device-initiated) and 4 on 5450 (master
/// initiated, 1514-byte segments) behind one shared master, 24 h.
ScenarioConfig dataset2_like(std::uint64_t seed = 1);
/// Ten field devices polled every 45 s for 30 days.
ScenarioConfig month_scale(std::uint64_t seed = 1);
/// Office hosts with heartbeats and no SCADA traffic.
ScenarioConfig office(std::uint64_t seed = 1);

}  // namespace presets

}  // namespace scadascope
