#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scadascope/types.hpp"

namespace scadascope {

/// Pull-style packet stream. Implementations yield records until exhausted.
class PacketSource {
 public:
  virtual ~PacketSource() = default;
  virtual bool next(PacketRecord& out) = 0;
};

/// Counters collected while decoding a trace file.
struct IngestStats {
  std::uint64_t records = 0;
  std::uint64_t skipped_non_ip = 0;     // ARP, IPv6, VLAN-tagged and similar
  std::uint64_t skipped_malformed = 0;  // IPv4 frames too short to decode
  std::uint64_t skipped_fragments = 0;  // non-first IPv4 fragments
  bool truncated = false;
  std::vector<std::string> warnings;
};

/// Replays an in-memory vector.
class VectorSource : public PacketSource {
 public:
  explicit VectorSource(std::span<const PacketRecord> records) : records_(records) {}
  bool next(PacketRecord& out) override;

 private:
  std::span<const PacketRecord> records_;
  std::size_t pos_ = 0;
};

/// Reads every source in order, one after the other.
class ChainSource : public PacketSource {
 public:
  explicit ChainSource(std::vector<std::unique_ptr<PacketSource>> parts) : parts_(std::move(parts)) {}
  bool next(PacketRecord& out) override;

 private:
  std::vector<std::unique_ptr<PacketSource>> parts_;
  std::size_t current_ = 0;
};

/// Opens a pcap file or a JSON-lines record file, sniffing the pcap magic.
/// Decode counters accumulate into `stats`, which must outlive the source.
std::unique_ptr<PacketSource> open_trace(const std::string& path, IngestStats& stats);

std::vector<PacketRecord> drain(PacketSource& source);

// Time ordering --------------------------------------------------------------

/// Restores time order for records that arrive at most `window` late.
/// A record older than anything already released is an OrderError unless
/// force_sort is set, in which case the whole stream is buffered and sorted.
/// Records with equal timestamps keep their arrival order.
class OrderedSource : public PacketSource {
 public:
  OrderedSource(PacketSource& inner, Micros window = kMicrosPerSecond, bool force_sort = false);
  bool next(PacketRecord& out) override;

  std::uint64_t reordered() const { return reordered_; }

 private:
  struct Pending {
    PacketRecord record;
    std::uint64_t seq;
    bool operator>(const Pending& o) const {
      return record.ts != o.record.ts ? record.ts > o.record.ts : seq > o.seq;
    }
  };

  void sort_everything();

  PacketSource& inner_;
  Micros window_;
  bool force_sort_;
  bool inner_done_ = false;
  bool sorted_all_ = false;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap_;
  std::vector<PacketRecord> sorted_;
  std::size_t sorted_pos_ = 0;
  std::uint64_t seq_ = 0;
  Micros max_seen_ = INT64_MIN;
  Micros last_released_ = INT64_MIN;
  std::uint64_t reordered_ = 0;
};

// Filtering ------------------------------------------------------------------

/// The eleven common service ports dropped by the default filter:
/// SSH, Telnet, DNS, HTTP, NTP, NetBIOS (x3), SNMP, HTTPS, SMB.
inline constexpr std::array<Port, 11> kDefaultServicePorts{22, 23, 53, 80, 123, 137, 138, 139, 161, 443, 445};

struct FilterConfig {
  std::set<Port> service_ports;
  bool drop_non_tcp = false;

  static FilterConfig defaults();
};

struct FilterStats {
  std::uint64_t kept = 0;
  std::uint64_t dropped_service = 0;
  std::uint64_t dropped_transport = 0;

  std::uint64_t dropped() const { return dropped_service + dropped_transport; }
  std::uint64_t input() const { return kept + dropped(); }
};

bool passes(const PacketRecord& record, const FilterConfig& config);

std::vector<PacketRecord> filter_packets(std::span<const PacketRecord> records, const FilterConfig& config,
                                         FilterStats* stats = nullptr);

/// Streaming form of filter_packets.
class FilteredSource : public PacketSource {
 public:
  FilteredSource(PacketSource& inner, FilterConfig config) : inner_(inner), config_(std::move(config)) {}
  bool next(PacketRecord& out) override;
  const FilterStats& stats() const { return stats_; }

 private:
  PacketSource& inner_;
  FilterConfig config_;
  FilterStats stats_;
};

}  // namespace scadascope
