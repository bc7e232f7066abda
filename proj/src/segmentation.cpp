#include "scadascope/segmentation.hpp"

#include <algorithm>
#include <thread>

namespace scadascope {

FtKey ft_key_of(const CommunicationSegment& segment) {
  const auto responder = segment.responder();
  return FtKey{segment.initiator.ip, segment.initiator.port, responder.ip, responder.port, segment.seg_size};
}

const FtStats* find_ft(const FtTable& table, const FtKey& key) {
  auto it = std::lower_bound(table.begin(), table.end(), key, [](const FtStats& s, const FtKey& k) { return s.key < k; });
  return it != table.end() && it->key == key ? &*it : nullptr;
}

// Segmenter ------------------------------------------------------------------

Segmenter::Segmenter(Micros t_comm, Sink sink) : t_comm_(t_comm), sink_(std::move(sink)) {
  if (t_comm_ <= 0) throw ValidationError("t_comm must be positive");
}

void Segmenter::push(const PacketRecord& r) {
  const auto key = ConversationKey::of(r);
  auto [it, inserted] = open_.try_emplace(key);
  auto& seg = it->second;
  if (!inserted && r.ts - seg.end >= t_comm_) {
    sink_(seg);
    inserted = true;
  }
  if (inserted) {
    seg = CommunicationSegment{key, r.ts, r.ts, r.size, r.src(), 1};
    return;
  }
  seg.end = r.ts;
  seg.seg_size += r.size;
  ++seg.packet_count;
}

void Segmenter::evict_idle(Micros now) {
  for (auto it = open_.begin(); it != open_.end();) {
    if (now - it->second.end >= t_comm_) {
      sink_(it->second);
      it = open_.erase(it);
    } else {
      ++it;
    }
  }
}

void Segmenter::flush() {
  std::vector<CommunicationSegment> rest;
  rest.reserve(open_.size());
  for (auto& [key, seg] : open_) rest.push_back(seg);
  open_.clear();
  std::sort(rest.begin(), rest.end(), [](const auto& x, const auto& y) {
    return x.start != y.start ? x.start < y.start : x.key < y.key;
  });
  for (const auto& seg : rest) sink_(seg);
}

namespace {

void sort_segments(std::vector<CommunicationSegment>& segments) {
  std::sort(segments.begin(), segments.end(), [](const auto& x, const auto& y) {
    return x.start != y.start ? x.start < y.start : x.key < y.key;
  });
}

}  // namespace

std::vector<CommunicationSegment> segment_stream(std::span<const PacketRecord> records, Micros t_comm) {
  std::vector<CommunicationSegment> out;
  Segmenter segmenter(t_comm, [&](const CommunicationSegment& s) { out.push_back(s); });
  for (const auto& r : records) segmenter.push(r);
  segmenter.flush();
  sort_segments(out);
  return out;
}

// Aggregation ----------------------------------------------------------------

void FtAggregator::add(const CommunicationSegment& segment) {
  const auto key = ft_key_of(segment);
  auto [it, inserted] = table_.try_emplace(key);
  if (inserted) it->second.key = key;
  ++it->second.n;
  it->second.start_times.push_back(segment.start);
}

FtTable FtAggregator::finish() && {
  FtTable out;
  out.reserve(table_.size());
  for (auto& [key, stats] : table_) out.push_back(std::move(stats));
  table_.clear();
  std::sort(out.begin(), out.end(), [](const FtStats& a, const FtStats& b) { return a.key < b.key; });
  for (auto& ft : out) {
    ft.iat.resize(ft.start_times.size() > 0 ? ft.start_times.size() - 1 : 0);
    for (std::size_t i = 1; i < ft.start_times.size(); ++i) ft.iat[i - 1] = ft.start_times[i] - ft.start_times[i - 1];
  }
  return out;
}

FtTable aggregate_ft(std::span<const CommunicationSegment> segments) {
  FtAggregator agg;
  for (const auto& s : segments) agg.add(s);
  return std::move(agg).finish();
}

// Sharded builder ------------------------------------------------------------

namespace {
constexpr std::size_t kBatchSize = 1 << 16;
}

struct FtTableBuilder::Shard {
  FtAggregator aggregator;
  std::vector<CommunicationSegment> kept;
  std::uint64_t segments = 0;
  std::vector<std::uint32_t> members;  // indices into the current batch
  Segmenter segmenter;

  Shard(Micros t_comm, bool keep)
      : segmenter(t_comm, [this, keep](const CommunicationSegment& s) {
          ++segments;
          aggregator.add(s);
          if (keep) kept.push_back(s);
        }) {}
};

FtTableBuilder::FtTableBuilder(Micros t_comm, unsigned shards, bool keep_segments)
    : t_comm_(t_comm), keep_segments_(keep_segments) {
  if (t_comm <= 0) throw ValidationError("t_comm must be positive");
  shards = std::max(1u, shards);
  for (unsigned i = 0; i < shards; ++i) shards_.push_back(std::make_unique<Shard>(t_comm, keep_segments));
  batch_.reserve(kBatchSize);
}

FtTableBuilder::~FtTableBuilder() = default;

void FtTableBuilder::push(const PacketRecord& record) {
  if (started_ && record.ts < counts_.last_ts) {
    throw OrderError("segmentation input out of time order at t=" + std::to_string(to_seconds(record.ts)) + "s");
  }
  if (!started_) {
    counts_.first_ts = record.ts;
    started_ = true;
  }
  counts_.last_ts = record.ts;
  ++counts_.records;
  batch_.push_back(record);
  if (batch_.size() >= kBatchSize) dispatch();
}

void FtTableBuilder::dispatch() {
  if (batch_.empty()) return;
  const Micros now = batch_.back().ts;
  auto run = [this, now](Shard& shard) {
    for (auto idx : shard.members) shard.segmenter.push(batch_[idx]);
    shard.members.clear();
    shard.segmenter.evict_idle(now);
  };
  if (shards_.size() == 1) {
    auto& only = *shards_.front();
    only.members.resize(batch_.size());
    for (std::uint32_t i = 0; i < batch_.size(); ++i) only.members[i] = i;
    run(only);
  } else {
    const std::hash<ConversationKey> hasher;
    for (std::uint32_t i = 0; i < batch_.size(); ++i) {
      shards_[hasher(ConversationKey::of(batch_[i])) % shards_.size()]->members.push_back(i);
    }
    std::vector<std::thread> workers;
    workers.reserve(shards_.size());
    for (auto& shard : shards_) workers.emplace_back(run, std::ref(*shard));
    for (auto& w : workers) w.join();
  }
  batch_.clear();
}

FtTable FtTableBuilder::finish() {
  dispatch();
  FtTable table;
  for (auto& shard : shards_) {
    shard->segmenter.flush();
    counts_.segments += shard->segments;
    auto part = std::move(shard->aggregator).finish();
    table.insert(table.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    if (keep_segments_) {
      segments_.insert(segments_.end(), shard->kept.begin(), shard->kept.end());
      shard->kept.clear();
    }
  }
  if (shards_.size() > 1) {
    std::sort(table.begin(), table.end(), [](const FtStats& a, const FtStats& b) { return a.key < b.key; });
  }
  if (keep_segments_) sort_segments(segments_);
  counts_.fts = table.size();
  return table;
}

FtTable build_ft_table(std::span<const PacketRecord> records, Micros t_comm, unsigned shards) {
  FtTableBuilder builder(t_comm, shards);
  for (const auto& r : records) builder.push(r);
  return builder.finish();
}

}  // namespace scadascope
