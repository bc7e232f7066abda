#include "scadascope/features.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace scadascope {

namespace {

double symmetric_ratio(double a, double b) {
  if (a <= 0 || b <= 0) return 0;
  return a >= b ? a / b : b / a;
}

void sort_unique(auto& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

// PortUsageIndex -------------------------------------------------------------

PortUsageIndex PortUsageIndex::build(const FtTable& table, PopularityMode mode) {
  PortUsageIndex idx;
  idx.mode_ = mode;
  for (const auto& ft : table) {
    const auto& k = ft.key;
    idx.ports_by_ip_[k.src_ip].push_back(k.src_port);
    idx.ports_by_ip_[k.dst_ip].push_back(k.dst_port);
    idx.pairs_[slot(k.src_port, PortRole::src)].emplace_back(k.src_ip, k.dst_ip);
    idx.pairs_[slot(k.dst_port, PortRole::dst)].emplace_back(k.src_ip, k.dst_ip);
  }
  for (auto& [ip, ports] : idx.ports_by_ip_) sort_unique(ports);
  for (auto& [s, pairs] : idx.pairs_) sort_unique(pairs);
  if (mode == PopularityMode::role_agnostic) {
    // Fold both roles together so either lookup sees the union.
    std::unordered_map<std::uint32_t, std::vector<std::pair<Ipv4, Ipv4>>> merged;
    for (auto& [s, pairs] : idx.pairs_) {
      auto& dst = merged[s & ~1u];
      dst.insert(dst.end(), pairs.begin(), pairs.end());
    }
    idx.pairs_.clear();
    for (auto& [s, pairs] : merged) {
      sort_unique(pairs);
      idx.pairs_[s | 1u] = pairs;
      idx.pairs_[s] = std::move(pairs);
    }
  }
  return idx;
}

const std::vector<Port>& PortUsageIndex::ports_of(Ipv4 ip) const {
  auto it = ports_by_ip_.find(ip);
  if (it == ports_by_ip_.end()) throw Error("port usage index has no entry for " + to_string(ip));
  return it->second;
}

std::size_t PortUsageIndex::port_count(Ipv4 ip) const { return ports_of(ip).size(); }

std::size_t PortUsageIndex::pair_count(Port port, PortRole role) const {
  auto it = pairs_.find(slot(port, role));
  return it == pairs_.end() ? 0 : it->second.size();
}

// Raw features ---------------------------------------------------------------

double periodicity_ratio(const FtStats& ft, double cap) {
  const auto m = ft.iat.size();
  if (m < 2) return 0;
  // mean / variance = S * m / (m * sum(x^2) - S^2) with x in microseconds,
  // evaluated in exact integers so equal intervals give exactly zero variance.
  __int128 s = 0, s2 = 0;
  for (auto v : ft.iat) {
    s += v;
    s2 += static_cast<__int128>(v) * v;
  }
  const __int128 spread = static_cast<__int128>(m) * s2 - s * s;
  if (spread == 0) return cap;
  const long double ratio =
      static_cast<long double>(s) * static_cast<long double>(m) * kMicrosPerSecond / static_cast<long double>(spread);
  return std::min(static_cast<double>(ratio), cap);
}

double durability(const FtStats& ft, LogBase base) {
  if (ft.n < 2) return 0;
  Micros total = 0;
  for (auto v : ft.iat) total += v;
  const double hours = to_seconds(total) / kSecondsPerHour;
  const double occurrences = static_cast<double>(ft.n);
  return hours * (base == LogBase::natural ? std::log(occurrences) : std::log10(occurrences));
}

double complexity_gap(const FtKey& key, const PortUsageIndex& index) {
  return symmetric_ratio(static_cast<double>(index.port_count(key.src_ip)), static_cast<double>(index.port_count(key.dst_ip)));
}

double service_popularity(const FtKey& key, const PortUsageIndex& index) {
  return symmetric_ratio(static_cast<double>(index.pair_count(key.src_port, PortRole::src)),
                         static_cast<double>(index.pair_count(key.dst_port, PortRole::dst)));
}

double segment_size_ratio(const FtKey& key, std::uint64_t max_seg_size) {
  if (max_seg_size == 0) return 0;
  return static_cast<double>(key.seg_size) / static_cast<double>(max_seg_size);
}

Features raw_features(const FtStats& ft, const PortUsageIndex& index, std::uint64_t max_seg_size, const FeatureConfig& config) {
  return Features{
      periodicity_ratio(ft, config.periodicity_cap),
      durability(ft, config.log_base),
      complexity_gap(ft.key, index),
      service_popularity(ft.key, index),
      segment_size_ratio(ft.key, max_seg_size),
  };
}

// Ranking --------------------------------------------------------------------

Features feature_maxima(const Ranking& ranking) {
  Features m;
  for (const auto& r : ranking) {
    m.periodicity = std::max(m.periodicity, r.raw.periodicity);
    m.durability = std::max(m.durability, r.raw.durability);
    m.complexity_gap = std::max(m.complexity_gap, r.raw.complexity_gap);
    m.popularity = std::max(m.popularity, r.raw.popularity);
    m.size = std::max(m.size, r.raw.size);
  }
  return m;
}

Ranking rank(const FtTable& table, const PortUsageIndex& index, const FeatureConfig& config, unsigned threads) {
  Ranking out(table.size());
  if (table.empty()) return out;

  std::uint64_t max_seg = 0;
  for (const auto& ft : table) max_seg = std::max(max_seg, ft.key.seg_size);

  auto score_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      out[i].key = table[i].key;
      out[i].n = table[i].n;
      out[i].raw = raw_features(table[i], index, max_seg, config);
    }
  };
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(1, table.size() / 4096)));
  if (threads == 1) {
    score_range(0, table.size());
  } else {
    std::vector<std::thread> workers;
    const auto chunk = (table.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const auto lo = std::min(table.size(), t * chunk);
      const auto hi = std::min(table.size(), lo + chunk);
      workers.emplace_back(score_range, lo, hi);
    }
    for (auto& w : workers) w.join();
  }

  const auto max = feature_maxima(out);
  auto norm = [](double v, double m) { return m > 0 ? v / m : 0.0; };
  for (auto& r : out) {
    r.normalized = Features{
        norm(r.raw.periodicity, max.periodicity), norm(r.raw.durability, max.durability),
        norm(r.raw.complexity_gap, max.complexity_gap), norm(r.raw.popularity, max.popularity),
        norm(r.raw.size, max.size),
    };
    r.score = r.normalized.product();
  }
  std::sort(out.begin(), out.end(), [](const RankedFt& a, const RankedFt& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.normalized.periodicity != b.normalized.periodicity) return a.normalized.periodicity > b.normalized.periodicity;
    return a.key < b.key;
  });
  return out;
}

}  // namespace scadascope
