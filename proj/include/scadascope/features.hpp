#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scadascope/segmentation.hpp"
#include "scadascope/types.hpp"

namespace scadascope {

enum class LogBase { natural, ten };

/// How port popularity counts (src_ip, dst_ip) pairs for a port.
enum class PopularityMode {
  role_sensitive,  // only pairs where the port sat on the same side (src/dst)
  role_agnostic,   // pairs where the port appeared on either side
};

enum class PortRole : std::uint8_t { src, dst };

struct FeatureConfig {
  double periodicity_cap = 1e6;  // returned when inter-arrival variance is zero
  LogBase log_base = LogBase::natural;
  PopularityMode popularity = PopularityMode::role_sensitive;
};

/// Global port usage, built once from the ft table and then read-only.
///   ports_by_ip[ip]            - ports the ip used as its own endpoint port
///   pairs_by_port_role[(p, r)] - distinct (src_ip, dst_ip) pairs among fts
///                                where p occupies role r
class PortUsageIndex {
 public:
  static PortUsageIndex build(const FtTable& table, PopularityMode mode = PopularityMode::role_sensitive);

  /// Throws Error when ip never appeared.
  std::size_t port_count(Ipv4 ip) const;
  /// Zero when the (port, role) combination never appeared.
  std::size_t pair_count(Port port, PortRole role) const;

  const std::vector<Port>& ports_of(Ipv4 ip) const;
  PopularityMode mode() const { return mode_; }

 private:
  static std::uint32_t slot(Port port, PortRole role) { return (std::uint32_t{port} << 1) | static_cast<std::uint32_t>(role); }

  PopularityMode mode_ = PopularityMode::role_sensitive;
  std::unordered_map<Ipv4, std::vector<Port>> ports_by_ip_;                      // sorted, unique
  std::unordered_map<std::uint32_t, std::vector<std::pair<Ipv4, Ipv4>>> pairs_;  // sorted, unique
};

/// The five ranking features of one ft.
struct Features {
  double periodicity = 0;     // mean(iat) / population variance(iat), 1/s
  double durability = 0;      // sum(iat) in hours * log(n)
  double complexity_gap = 0;  // max(a/b, b/a) of the two endpoints' port counts
  double popularity = 0;      // max(a/b, b/a) of the two ports' pair counts
  double size = 0;            // seg_size / largest seg_size in the dataset

  double product() const { return periodicity * durability * complexity_gap * popularity * size; }
  bool operator==(const Features&) const = default;
};

double periodicity_ratio(const FtStats& ft, double cap = 1e6);
double durability(const FtStats& ft, LogBase base = LogBase::natural);
double complexity_gap(const FtKey& key, const PortUsageIndex& index);
double service_popularity(const FtKey& key, const PortUsageIndex& index);
double segment_size_ratio(const FtKey& key, std::uint64_t max_seg_size);

Features raw_features(const FtStats& ft, const PortUsageIndex& index, std::uint64_t max_seg_size,
                      const FeatureConfig& config = {});

struct RankedFt {
  FtKey key;
  std::uint64_t n = 0;
  Features raw;
  Features normalized;
  double score = 0;  // product of the normalized features
};

using Ranking = std::vector<RankedFt>;

/// Scores every ft, normalizes each feature by its dataset maximum (a zero
/// maximum leaves the feature at zero), multiplies, and sorts by score
/// descending, then normalized periodicity descending, then key ascending.
Ranking rank(const FtTable& table, const PortUsageIndex& index, const FeatureConfig& config = {}, unsigned threads = 1);

/// Component-wise maxima of the raw features.
Features feature_maxima(const Ranking& ranking);

}  // namespace scadascope
