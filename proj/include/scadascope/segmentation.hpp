#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "scadascope/types.hpp"

namespace scadascope {

/// Direction-free conversation identity: both endpoints, smaller first.
struct ConversationKey {
  Endpoint a;
  Endpoint b;

  static ConversationKey of(const Endpoint& x, const Endpoint& y) { return x <= y ? ConversationKey{x, y} : ConversationKey{y, x}; }
  static ConversationKey of(const PacketRecord& r) { return of(r.src(), r.dst()); }

  auto operator<=>(const ConversationKey&) const = default;
};

/// A maximal run of packets on one conversation whose consecutive gaps are
/// all shorter than t_comm.
struct CommunicationSegment {
  ConversationKey key;
  Micros start = 0;
  Micros end = 0;
  std::uint64_t seg_size = 0;
  Endpoint initiator;
  std::uint32_t packet_count = 0;

  /// The endpoint that did not send the first packet.
  Endpoint responder() const { return initiator == key.a ? key.b : key.a; }

  bool operator==(const CommunicationSegment&) const = default;
};

/// <SrcIP, SrcPort, DstIP, DstPort, SegSize> with Src the segment initiator.
struct FtKey {
  Ipv4 src_ip;
  Port src_port = 0;
  Ipv4 dst_ip;
  Port dst_port = 0;
  std::uint64_t seg_size = 0;

  Endpoint src() const { return {src_ip, src_port}; }
  Endpoint dst() const { return {dst_ip, dst_port}; }
  bool touches_port(Port p) const { return src_port == p || dst_port == p; }

  auto operator<=>(const FtKey&) const = default;
};

FtKey ft_key_of(const CommunicationSegment& segment);

/// Per-ft aggregate. iat[i] = start_times[i + 1] - start_times[i].
struct FtStats {
  FtKey key;
  std::uint64_t n = 0;
  std::vector<Micros> start_times;
  std::vector<Micros> iat;

  bool operator==(const FtStats&) const = default;
};

/// All ft aggregates of a trace, sorted by key.
using FtTable = std::vector<FtStats>;

const FtStats* find_ft(const FtTable& table, const FtKey& key);

}  // namespace scadascope

template <>
struct std::hash<scadascope::ConversationKey> {
  std::size_t operator()(const scadascope::ConversationKey& k) const noexcept {
    return static_cast<std::size_t>(scadascope::mix64(scadascope::pack(k.a) * 0x100000001b3ULL ^ scadascope::pack(k.b)));
  }
};

template <>
struct std::hash<scadascope::FtKey> {
  std::size_t operator()(const scadascope::FtKey& k) const noexcept {
    using scadascope::mix64;
    using scadascope::pack;
    return static_cast<std::size_t>(mix64(mix64(pack(k.src()) ^ k.seg_size * 0x9e3779b97f4a7c15ULL) ^ pack(k.dst())));
  }
};

namespace scadascope {

/// Streaming gap splitter. Expects time-ordered input; segments are handed
/// to the sink when they close, so emission order is by close time.
class Segmenter {
 public:
  using Sink = std::function<void(const CommunicationSegment&)>;

  Segmenter(Micros t_comm, Sink sink);

  void push(const PacketRecord& record);
  /// Closes every open segment that no future packet can extend.
  void evict_idle(Micros now);
  /// Closes all open segments, ordered by (start, key).
  void flush();

  std::size_t open_count() const { return open_.size(); }

 private:
  Micros t_comm_;
  Sink sink_;
  std::unordered_map<ConversationKey, CommunicationSegment> open_;
};

/// Splits a time-ordered packet stream into segments, returned sorted by
/// (start, key). A packet whose gap to the previous packet of its
/// conversation is >= t_comm starts a new segment.
std::vector<CommunicationSegment> segment_stream(std::span<const PacketRecord> records, Micros t_comm);

/// Accumulates segments into ft statistics. Segments of one ft must arrive
/// in start order, which holds for any per-conversation ordered feed.
class FtAggregator {
 public:
  void add(const CommunicationSegment& segment);
  std::size_t size() const { return table_.size(); }
  /// Sorted table; iat lists are derived from the collected start times.
  FtTable finish() &&;

 private:
  std::unordered_map<FtKey, FtStats> table_;
};

FtTable aggregate_ft(std::span<const CommunicationSegment> segments);

struct BuildCounts {
  std::uint64_t records = 0;
  std::uint64_t segments = 0;
  std::uint64_t fts = 0;
  Micros first_ts = 0;
  Micros last_ts = 0;
};

/// Packets -> FtTable, sharded by conversation key. Records are consumed in
/// batches; each shard segments and aggregates its own conversations on a
/// worker thread, and the shard tables are merged as a disjoint union. The
/// result is identical for any shard count.
class FtTableBuilder {
 public:
  FtTableBuilder(Micros t_comm, unsigned shards = 1, bool keep_segments = false);
  ~FtTableBuilder();

  FtTableBuilder(const FtTableBuilder&) = delete;
  FtTableBuilder& operator=(const FtTableBuilder&) = delete;

  /// Throws OrderError if record is older than its predecessor.
  void push(const PacketRecord& record);
  FtTable finish();

  const BuildCounts& counts() const { return counts_; }
  /// Populated by finish() when keep_segments was set; sorted by (start, key).
  std::vector<CommunicationSegment>& segments() { return segments_; }

 private:
  struct Shard;
  void dispatch();

  Micros t_comm_;
  bool keep_segments_;
  std::vector<std::unique_ptr<Shard>> shards_;
  std::vector<PacketRecord> batch_;
  BuildCounts counts_;
  std::vector<CommunicationSegment> segments_;
  bool started_ = false;
};

FtTable build_ft_table(std::span<const PacketRecord> records, Micros t_comm, unsigned shards = 1);

}  // namespace scadascope
