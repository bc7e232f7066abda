#include "scadascope/ingest.hpp"

#include <algorithm>
#include <fstream>

#include "scadascope/pcap.hpp"
#include "scadascope/records.hpp"

namespace scadascope {

bool VectorSource::next(PacketRecord& out) {
  if (pos_ >= records_.size()) return false;
  out = records_[pos_++];
  return true;
}

bool ChainSource::next(PacketRecord& out) {
  while (current_ < parts_.size()) {
    if (parts_[current_]->next(out)) return true;
    ++current_;
  }
  return false;
}

std::unique_ptr<PacketSource> open_trace(const std::string& path, IngestStats& stats) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error("cannot open " + path);
  unsigned char magic[4] = {};
  probe.read(reinterpret_cast<char*>(magic), 4);
  const bool got4 = probe.gcount() == 4;
  probe.close();
  if (got4 && looks_like_pcap(magic)) return std::make_unique<PcapReader>(path, stats);
  return std::make_unique<RecordReader>(path, stats);
}

std::vector<PacketRecord> drain(PacketSource& source) {
  std::vector<PacketRecord> out;
  PacketRecord r;
  while (source.next(r)) out.push_back(r);
  return out;
}

// OrderedSource --------------------------------------------------------------

OrderedSource::OrderedSource(PacketSource& inner, Micros window, bool force_sort)
    : inner_(inner), window_(window), force_sort_(force_sort) {}

void OrderedSource::sort_everything() {
  PacketRecord r;
  while (inner_.next(r)) sorted_.push_back(r);
  inner_done_ = true;
  for (std::size_t i = 1; i < sorted_.size(); ++i) {
    if (sorted_[i].ts < sorted_[i - 1].ts) ++reordered_;
  }
  std::stable_sort(sorted_.begin(), sorted_.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.ts < b.ts; });
  sorted_all_ = true;
}

bool OrderedSource::next(PacketRecord& out) {
  if (force_sort_ && !sorted_all_) sort_everything();
  if (sorted_all_) {
    if (sorted_pos_ >= sorted_.size()) return false;
    out = sorted_[sorted_pos_++];
    return true;
  }
  while (!inner_done_) {
    if (!heap_.empty() && heap_.top().record.ts <= max_seen_ - window_) break;
    PacketRecord r;
    if (!inner_.next(r)) {
      inner_done_ = true;
      break;
    }
    if (r.ts < last_released_) {
      throw OrderError("record at t=" + std::to_string(to_seconds(r.ts)) + "s arrives after t=" +
                       std::to_string(to_seconds(last_released_)) +
                       "s was already released (beyond the reorder window); rerun with --force-sort");
    }
    if (r.ts < max_seen_) ++reordered_;
    max_seen_ = std::max(max_seen_, r.ts);
    heap_.push({r, seq_++});
  }
  if (heap_.empty()) return false;
  out = heap_.top().record;
  heap_.pop();
  last_released_ = out.ts;
  return true;
}

// Filtering ------------------------------------------------------------------

FilterConfig FilterConfig::defaults() {
  FilterConfig c;
  c.service_ports.insert(kDefaultServicePorts.begin(), kDefaultServicePorts.end());
  c.drop_non_tcp = true;
  return c;
}

namespace {

enum class Verdict { keep, service, transport };

Verdict judge(const PacketRecord& r, const FilterConfig& c) {
  if (c.drop_non_tcp && r.transport != Transport::tcp) return Verdict::transport;
  if (c.service_ports.contains(r.src_port) || c.service_ports.contains(r.dst_port)) return Verdict::service;
  return Verdict::keep;
}

void count(Verdict v, FilterStats& s) {
  switch (v) {
    case Verdict::keep: ++s.kept; break;
    case Verdict::service: ++s.dropped_service; break;
    case Verdict::transport: ++s.dropped_transport; break;
  }
}

}  // namespace

bool passes(const PacketRecord& record, const FilterConfig& config) {
  return judge(record, config) == Verdict::keep;
}

std::vector<PacketRecord> filter_packets(std::span<const PacketRecord> records, const FilterConfig& config,
                                         FilterStats* stats) {
  std::vector<PacketRecord> out;
  out.reserve(records.size());
  FilterStats local;
  for (const auto& r : records) {
    const auto v = judge(r, config);
    count(v, local);
    if (v == Verdict::keep) out.push_back(r);
  }
  if (stats) *stats = local;
  return out;
}

bool FilteredSource::next(PacketRecord& out) {
  while (inner_.next(out)) {
    const auto v = judge(out, config_);
    count(v, stats_);
    if (v == Verdict::keep) return true;
  }
  return false;
}

}  // namespace scadascope
