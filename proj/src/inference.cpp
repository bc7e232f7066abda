#include "scadascope/inference.hpp"

#include <algorithm>

namespace scadascope {

void InferenceConfig::validate() const {
  if (num_scada_protocols < 1) throw ValidationError("number of SCADA protocols must be at least 1");
  if (fd_degree_threshold <= 0) throw ValidationError("field-device degree threshold must be positive");
  if (!(scada_fraction_threshold > 0) || scada_fraction_threshold >= 1) {
    throw ValidationError("SCADA fraction threshold must lie in (0, 1)");
  }
}

std::string_view to_string(ReportStatus s) {
  switch (s) {
    case ReportStatus::ok: return "ok";
    case ReportStatus::low_confidence: return "low_confidence";
    case ReportStatus::exhausted: return "exhausted";
  }
  return "ok";
}

// DeviceIndex ----------------------------------------------------------------

DeviceIndex DeviceIndex::build(const FtTable& table) {
  DeviceIndex idx;
  for (const auto& ft : table) {
    const auto& k = ft.key;
    auto& src = idx.devices_[k.src_ip];
    if (k.src_ip == k.dst_ip) {
      ++src.ft_count;
      src.segments += 2 * ft.n;
      src.segments_by_port[k.src_port] += ft.n;
      src.segments_by_port[k.dst_port] += ft.n;
      continue;
    }
    auto& dst = idx.devices_[k.dst_ip];
    src.peers.insert(k.dst_ip);
    dst.peers.insert(k.src_ip);
    ++src.ft_count;
    ++dst.ft_count;
    src.segments += ft.n;
    dst.segments += ft.n;
    src.segments_by_port[k.src_port] += ft.n;
    dst.segments_by_port[k.dst_port] += ft.n;
  }
  return idx;
}

const DeviceIndex::Device& DeviceIndex::at(Ipv4 ip) const {
  auto it = devices_.find(ip);
  if (it == devices_.end()) throw Error("device index has no entry for " + to_string(ip));
  return it->second;
}

std::size_t DeviceIndex::degree(Ipv4 ip) const { return at(ip).peers.size(); }

const std::set<Ipv4>& DeviceIndex::peers(Ipv4 ip) const { return at(ip).peers; }

double DeviceIndex::scada_fraction(Ipv4 ip, Port port) const {
  const auto& d = at(ip);
  if (d.segments == 0) return 0;
  auto it = d.segments_by_port.find(port);
  return it == d.segments_by_port.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(d.segments);
}

DeviceProfile DeviceIndex::profile(Ipv4 ip, Port port) const {
  const auto& d = at(ip);
  DeviceProfile p;
  p.ip = ip;
  p.degree = d.peers.size();
  p.ft_count = d.ft_count;
  p.segments = d.segments;
  p.scada_fraction = scada_fraction(ip, port);
  p.ports_used.reserve(d.segments_by_port.size());
  for (const auto& [port_used, count] : d.segments_by_port) p.ports_used.push_back(port_used);
  return p;
}

std::vector<Ipv4> DeviceIndex::ips() const {
  std::vector<Ipv4> out;
  out.reserve(devices_.size());
  for (const auto& [ip, d] : devices_) out.push_back(ip);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Ipv4> DeviceIndex::users_of(Port port) const {
  std::vector<Ipv4> out;
  for (const auto& [ip, d] : devices_) {
    if (d.segments_by_port.contains(port)) out.push_back(ip);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Port, field devices, masters ----------------------------------------------

PortInference infer_scada_port(std::span<const RankedFt> ranked, const DeviceIndex& devices) {
  if (ranked.empty()) throw InferenceError("ranking is empty; no SCADA port can be inferred");
  const auto& top = ranked.front();
  const auto& k = top.key;
  const auto src_degree = devices.degree(k.src_ip);
  const auto dst_degree = devices.degree(k.dst_ip);

  PortInference out;
  out.top = top;
  bool src_side = src_degree < dst_degree;
  if (src_degree == dst_degree) {
    out.degree_tie = true;
    src_side = k.src_port <= k.dst_port;
  }
  out.port = src_side ? k.src_port : k.dst_port;
  out.device = src_side ? k.src_ip : k.dst_ip;
  out.peer = src_side ? k.dst_ip : k.src_ip;
  return out;
}

std::set<Ipv4> infer_field_devices(Port port, const DeviceIndex& devices, const InferenceConfig& config) {
  std::set<Ipv4> out;
  for (auto ip : devices.users_of(port)) {
    if (devices.scada_fraction(ip, port) > config.scada_fraction_threshold &&
        devices.degree(ip) < static_cast<std::size_t>(config.fd_degree_threshold)) {
      out.insert(ip);
    }
  }
  return out;
}

std::set<Ipv4> infer_master_servers(Port port, const std::set<Ipv4>& field_devices, const FtTable& table) {
  std::set<Ipv4> out;
  if (field_devices.empty()) return out;
  for (const auto& ft : table) {
    const auto& k = ft.key;
    if (k.src_port == port && field_devices.contains(k.src_ip) && !field_devices.contains(k.dst_ip)) out.insert(k.dst_ip);
    if (k.dst_port == port && field_devices.contains(k.dst_ip) && !field_devices.contains(k.src_ip)) out.insert(k.src_ip);
  }
  return out;
}

// HMI ------------------------------------------------------------------------

std::map<Ipv4, std::uint64_t> master_quantities(const std::set<Ipv4>& masters, const FtTable& table) {
  std::map<Ipv4, std::uint64_t> out;
  for (const auto& ft : table) {
    if (masters.contains(ft.key.src_ip) && !masters.contains(ft.key.dst_ip)) out[ft.key.dst_ip] += ft.n * ft.key.seg_size;
  }
  return out;
}

HmiInference infer_hmi(const std::set<Ipv4>& masters, const FtTable& table) {
  const auto totals = master_quantities(masters, table);
  if (totals.empty()) throw InferenceError("inferred master has no outgoing communication; no HMI candidate");
  HmiInference best;
  bool first = true;
  for (const auto& [ip, qty] : totals) {
    if (first || qty > best.quantity) {
      best = HmiInference{ip, qty, false};
      first = false;
    } else if (qty == best.quantity) {
      best.tie = true;
    }
  }
  return best;
}

// Report ---------------------------------------------------------------------

bool TopologyReport::same_topology(const TopologyReport& other) const {
  if (protocols.size() != other.protocols.size()) return false;
  for (std::size_t i = 0; i < protocols.size(); ++i) {
    const auto& a = protocols[i];
    const auto& b = other.protocols[i];
    if (a.scada_port != b.scada_port || a.field_devices != b.field_devices || a.master_servers != b.master_servers) return false;
  }
  if (hmi.has_value() != other.hmi.has_value()) return false;
  return !hmi || hmi->ip == other.hmi->ip;
}

std::set<Ipv4> TopologyReport::field_devices() const {
  std::set<Ipv4> out;
  for (const auto& p : protocols) out.insert(p.field_devices.begin(), p.field_devices.end());
  return out;
}

std::set<Ipv4> TopologyReport::master_servers() const {
  std::set<Ipv4> out;
  for (const auto& p : protocols) out.insert(p.master_servers.begin(), p.master_servers.end());
  return out;
}

TopologyReport run_inference(const FtTable& table, Ranking ranked, const InferenceConfig& config) {
  config.validate();
  const auto devices = DeviceIndex::build(table);
  TopologyReport report;

  auto degrade = [&report](ReportStatus s) {
    if (static_cast<int>(s) > static_cast<int>(report.status)) report.status = s;
  };

  for (int i = 0; i < config.num_scada_protocols; ++i) {
    if (ranked.empty()) {
      report.warnings.push_back("ranking exhausted after " + std::to_string(i) + " of " +
                                std::to_string(config.num_scada_protocols) + " protocol iterations");
      degrade(ReportStatus::exhausted);
      break;
    }
    ProtocolEntry entry;
    entry.remaining_before = ranked.size();
    entry.evidence = infer_scada_port(ranked, devices);
    entry.scada_port = entry.evidence.port;
    const auto port_name = "port " + std::to_string(entry.scada_port);
    if (entry.evidence.degree_tie) {
      report.warnings.push_back(port_name + ": endpoints of the top-ranked ft have equal degree; lower port chosen");
    }
    if (entry.evidence.top.score == 0) report.warnings.push_back(port_name + ": top-ranked ft has score 0");

    entry.field_devices = infer_field_devices(entry.scada_port, devices, config);
    if (entry.field_devices.empty()) {
      report.warnings.push_back(port_name + ": no device passes the field-device conditions (low confidence)");
      degrade(ReportStatus::low_confidence);
    } else {
      entry.master_servers = infer_master_servers(entry.scada_port, entry.field_devices, table);
      if (entry.master_servers.empty()) report.warnings.push_back(port_name + ": no master server connected to the field devices");
    }

    const auto port = entry.scada_port;
    entry.removed = std::erase_if(ranked, [port](const RankedFt& r) { return r.key.touches_port(port); });
    report.protocols.push_back(std::move(entry));
  }

  if (config.three_layer) {
    const auto masters = report.master_servers();
    if (masters.empty()) {
      report.warnings.push_back("three-layer mode: no master server inferred, HMI skipped");
    } else {
      try {
        report.hmi = infer_hmi(masters, table);
        if (report.hmi->tie) report.warnings.push_back("HMI candidates tie on quantity; lower address chosen");
      } catch (const InferenceError& e) {
        report.warnings.push_back(std::string("three-layer mode: ") + e.what());
      }
    }
  }

  std::set<Ipv4> classified = report.field_devices();
  const auto masters = report.master_servers();
  classified.insert(masters.begin(), masters.end());
  if (report.hmi) classified.insert(report.hmi->ip);

  for (auto ip : devices.ips()) {
    if (!classified.contains(ip)) report.unclassified.insert(ip);
    const auto profile = devices.profile(ip, 0);
    DeviceEvidence ev;
    ev.degree = profile.degree;
    ev.ft_count = profile.ft_count;
    ev.segments = profile.segments;
    ev.ports_used = profile.ports_used.size();
    for (const auto& p : report.protocols) {
      const double f = devices.scada_fraction(ip, p.scada_port);
      if (f > 0) ev.scada_fraction[p.scada_port] = f;
    }
    report.evidence.emplace(ip, std::move(ev));
  }
  return report;
}

}  // namespace scadascope
