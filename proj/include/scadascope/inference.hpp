#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scadascope/features.hpp"
#include "scadascope/segmentation.hpp"

namespace scadascope {

struct InferenceConfig {
  int num_scada_protocols = 1;
  int fd_degree_threshold = 5;            // field devices have degree strictly below this
  double scada_fraction_threshold = 0.5;  // and strictly more than this share of SCADA segments
  bool three_layer = false;               // infer the HMI behind the master

  void validate() const;
};

/// Raised when no SCADA port can be inferred (empty ranking) or an HMI
/// cannot be picked (master without outgoing fts).
class InferenceError : public Error {
 public:
  using Error::Error;
};

struct DeviceProfile {
  Ipv4 ip;
  std::size_t degree = 0;    // distinct peer IPs
  std::size_t ft_count = 0;  // distinct fts touching the ip
  std::uint64_t segments = 0;
  double scada_fraction = 0;  // segments with the candidate port on this device's side
  std::vector<Port> ports_used;

  bool operator==(const DeviceProfile&) const = default;
};

/// Per-device connectivity built from the ft table. Port-independent parts
/// are computed once; the SCADA fraction is evaluated per candidate port.
class DeviceIndex {
 public:
  static DeviceIndex build(const FtTable& table);

  bool contains(Ipv4 ip) const { return devices_.contains(ip); }
  std::size_t degree(Ipv4 ip) const;
  double scada_fraction(Ipv4 ip, Port port) const;
  DeviceProfile profile(Ipv4 ip, Port port) const;
  const std::set<Ipv4>& peers(Ipv4 ip) const;
  /// Every observed ip, ascending.
  std::vector<Ipv4> ips() const;
  /// Devices that carry `port` on their own side in at least one segment.
  std::vector<Ipv4> users_of(Port port) const;

 private:
  struct Device {
    std::set<Ipv4> peers;
    std::size_t ft_count = 0;
    std::uint64_t segments = 0;
    std::map<Port, std::uint64_t> segments_by_port;  // own-side port -> segments
  };
  const Device& at(Ipv4 ip) const;

  std::unordered_map<Ipv4, Device> devices_;
};

struct PortInference {
  Port port = 0;
  Ipv4 device;  // endpoint that owns the inferred port
  Ipv4 peer;
  bool degree_tie = false;
  RankedFt top;
};

/// Takes the top-ranked ft and returns the port on its lower-degree endpoint;
/// equal degrees resolve to the lower-numbered port and set degree_tie.
PortInference infer_scada_port(std::span<const RankedFt> ranked, const DeviceIndex& devices);

/// Devices whose own-side share of segments on `port` exceeds the fraction
/// threshold and whose degree is below the degree threshold.
std::set<Ipv4> infer_field_devices(Port port, const DeviceIndex& devices, const InferenceConfig& config);

/// Devices that are not field devices themselves and have at least one ft
/// with a field device whose field-device side port is `port`.
std::set<Ipv4> infer_master_servers(Port port, const std::set<Ipv4>& field_devices, const FtTable& table);

struct HmiInference {
  Ipv4 ip;
  std::uint64_t quantity = 0;  // sum of n * seg_size over the master's fts to ip
  bool tie = false;
};

/// Destination with the largest total quantity over fts whose source is one
/// of the masters. Other masters are not eligible destinations. Ties go to
/// the lower ip and set `tie`. Throws InferenceError when the masters have
/// no outgoing fts.
HmiInference infer_hmi(const std::set<Ipv4>& masters, const FtTable& table);

/// Per-destination quantity totals used by infer_hmi.
std::map<Ipv4, std::uint64_t> master_quantities(const std::set<Ipv4>& masters, const FtTable& table);

struct ProtocolEntry {
  Port scada_port = 0;
  std::set<Ipv4> field_devices;
  std::set<Ipv4> master_servers;
  PortInference evidence;
  std::size_t remaining_before = 0;  // ranked entries left when this iteration began
  std::size_t removed = 0;           // entries touching the port removed afterwards
};

enum class ReportStatus { ok, low_confidence, exhausted };

std::string_view to_string(ReportStatus s);

struct DeviceEvidence {
  std::size_t degree = 0;
  std::size_t ft_count = 0;
  std::uint64_t segments = 0;
  std::size_t ports_used = 0;
  std::map<Port, double> scada_fraction;  // per inferred protocol port
};

struct TopologyReport {
  std::vector<ProtocolEntry> protocols;
  std::optional<HmiInference> hmi;
  std::set<Ipv4> unclassified;
  std::map<Ipv4, DeviceEvidence> evidence;
  ReportStatus status = ReportStatus::ok;
  std::vector<std::string> warnings;

  /// Ports, device sets and HMI agree (evidence and warnings are ignored).
  bool same_topology(const TopologyReport& other) const;
  std::set<Ipv4> field_devices() const;
  std::set<Ipv4> master_servers() const;
};

/// Iterates num_scada_protocols times: infer the port from the current top
/// entry, classify field devices then masters, and drop every ranked entry
/// with the port on either side. Feature maxima are not recomputed between
/// iterations. With three_layer set, the HMI is inferred from the masters.
TopologyReport run_inference(const FtTable& table, Ranking ranked, const InferenceConfig& config);

}  // namespace scadascope
