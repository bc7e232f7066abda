#include "scadascope/report.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include "json.hpp"

namespace scadascope {

namespace {

using Json = nlohmann::ordered_json;

Json ip_list(const std::set<Ipv4>& ips) {
  Json out = Json::array();
  for (auto ip : ips) out.push_back(to_string(ip));
  return out;
}

Json ft_json(const FtKey& k) {
  Json j;
  j["src_ip"] = to_string(k.src_ip);
  j["src_port"] = k.src_port;
  j["dst_ip"] = to_string(k.dst_ip);
  j["dst_port"] = k.dst_port;
  j["seg_size"] = k.seg_size;
  return j;
}

Json config_object(const AnalysisConfig& c) {
  Json j;
  j["t_comm_us"] = c.t_comm;
  j["reorder_window_us"] = c.reorder_window;
  j["force_sort"] = c.force_sort;
  Json filter;
  filter["enabled"] = c.filter.has_value();
  if (c.filter) {
    filter["service_ports"] = c.filter->service_ports;
    filter["drop_non_tcp"] = c.filter->drop_non_tcp;
  }
  j["filter"] = std::move(filter);
  j["features"] = {
      {"periodicity_cap", c.features.periodicity_cap},
      {"log_base", c.features.log_base == LogBase::natural ? "e" : "10"},
      {"popularity", c.features.popularity == PopularityMode::role_sensitive ? "role_sensitive" : "role_agnostic"},
  };
  j["inference"] = {
      {"num_scada_protocols", c.inference.num_scada_protocols},
      {"fd_degree_threshold", c.inference.fd_degree_threshold},
      {"scada_fraction_threshold", c.inference.scada_fraction_threshold},
      {"three_layer", c.inference.three_layer},
  };
  return j;
}

std::string fixed6(Micros us) {
  char buf[48];
  const char* sign = us < 0 ? "-" : "";
  const auto a = us < 0 ? -us : us;
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", sign, static_cast<long long>(a / kMicrosPerSecond),
                static_cast<long long>(a % kMicrosPerSecond));
  return buf;
}

}  // namespace

std::string config_json(const AnalysisConfig& config) { return config_object(config).dump(2) + "\n"; }

std::string report_json(const Analysis& a, const AnalysisConfig& config, const RunManifest& manifest) {
  const auto& r = a.report;
  Json doc;

  doc["protocols"] = Json::array();
  for (const auto& p : r.protocols) {
    Json e;
    e["scada_port"] = p.scada_port;
    e["field_devices"] = ip_list(p.field_devices);
    e["master_servers"] = ip_list(p.master_servers);
    Json ev;
    ev["top_ft"] = ft_json(p.evidence.top.key);
    ev["top_ft"]["n"] = p.evidence.top.n;
    ev["top_ft"]["score"] = p.evidence.top.score;
    ev["port_owner"] = to_string(p.evidence.device);
    ev["port_peer"] = to_string(p.evidence.peer);
    ev["degree_tie"] = p.evidence.degree_tie;
    ev["ranked_before"] = p.remaining_before;
    ev["removed"] = p.removed;
    e["evidence"] = std::move(ev);
    doc["protocols"].push_back(std::move(e));
  }

  if (r.hmi) {
    doc["hmi"] = to_string(r.hmi->ip);
    doc["hmi_evidence"] = {{"quantity", r.hmi->quantity}, {"tie", r.hmi->tie}};
  } else {
    doc["hmi"] = nullptr;
    doc["hmi_evidence"] = nullptr;
  }
  doc["unclassified"] = ip_list(r.unclassified);

  Json evidence = Json::object();
  for (const auto& [ip, ev] : r.evidence) {
    Json d;
    d["degree"] = ev.degree;
    d["ft_count"] = ev.ft_count;
    d["segments"] = ev.segments;
    d["ports_used"] = ev.ports_used;
    Json fractions = Json::object();
    for (const auto& [port, f] : ev.scada_fraction) fractions[std::to_string(port)] = f;
    d["scada_fraction"] = std::move(fractions);
    evidence[to_string(ip)] = std::move(d);
  }
  doc["evidence"] = std::move(evidence);

  Json metrics;
  metrics["input_records"] = a.filter.input();
  metrics["dropped_service"] = a.filter.dropped_service;
  metrics["dropped_transport"] = a.filter.dropped_transport;
  metrics["records"] = a.counts.records;
  metrics["reordered"] = a.reordered;
  metrics["segments"] = a.counts.segments;
  metrics["fts"] = a.counts.fts;
  metrics["first_ts"] = a.counts.records ? fixed6(a.counts.first_ts) : "";
  metrics["last_ts"] = a.counts.records ? fixed6(a.counts.last_ts) : "";
  Json top = Json::object();
  for (const auto& p : r.protocols) top[std::to_string(p.scada_port)] = top_k_on_port(a.ranking, 1000, p.scada_port);
  metrics["top_1000_on_port"] = std::move(top);
  doc["metrics"] = std::move(metrics);

  doc["status"] = std::string(to_string(r.status));
  Json warnings = Json::array();
  for (const auto& w : manifest.ingest.warnings) warnings.push_back(w);
  for (const auto& w : r.warnings) warnings.push_back(w);
  doc["warnings"] = std::move(warnings);

  Json m;
  m["tool"] = "scadascope";
  m["version"] = std::string(kVersion);
  m["inputs"] = manifest.inputs;
  m["input_sha256"] = manifest.input_sha256;
  m["config"] = config_object(config);
  m["counts"] = {{"records", a.counts.records}, {"segments", a.counts.segments}, {"fts", a.counts.fts}};
  m["ingest"] = {
      {"decoded", manifest.ingest.records},
      {"skipped_non_ip", manifest.ingest.skipped_non_ip},
      {"skipped_malformed", manifest.ingest.skipped_malformed},
      {"skipped_fragments", manifest.ingest.skipped_fragments},
      {"truncated", manifest.ingest.truncated},
  };
  m["duration_seconds"] = manifest.duration_seconds;
  doc["manifest"] = std::move(m);
  return doc.dump(2) + "\n";
}

std::string ranking_table(const Ranking& ranking, std::size_t top) {
  const auto limit = top == 0 ? ranking.size() : std::min(top, ranking.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%5s  %-15s %6s  %-15s %6s %8s %7s %7s %7s %7s %7s %11s\n", "Rank", "S-IP", "S-Port", "D-IP",
                "D-Port", "SegSize", "pR", "dR", "cR", "uR", "sR", "f");
  out += line;
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& r = ranking[i];
    const auto& n = r.normalized;
    std::snprintf(line, sizeof line, "%5zu  %-15s %6u  %-15s %6u %8llu %7.4f %7.4f %7.4f %7.4f %7.4f %11.4e\n", i + 1,
                  to_string(r.key.src_ip).c_str(), r.key.src_port, to_string(r.key.dst_ip).c_str(), r.key.dst_port,
                  static_cast<unsigned long long>(r.key.seg_size), n.periodicity, n.durability, n.complexity_gap, n.popularity,
                  n.size, r.score);
    out += line;
  }
  return out;
}

std::string ranking_csv(const Ranking& ranking, std::size_t top) {
  const auto limit = top == 0 ? ranking.size() : std::min(top, ranking.size());
  std::string out = "rank,src_ip,src_port,dst_ip,dst_port,seg_size,n,pR_n,dR_n,cR_n,uR_n,sR_n,f,pR,dR,cR,uR,sR\n";
  char line[512];
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& r = ranking[i];
    const auto& n = r.normalized;
    const auto& w = r.raw;
    std::snprintf(line, sizeof line, "%zu,%s,%u,%s,%u,%llu,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  i + 1, to_string(r.key.src_ip).c_str(), r.key.src_port, to_string(r.key.dst_ip).c_str(), r.key.dst_port,
                  static_cast<unsigned long long>(r.key.seg_size), static_cast<unsigned long long>(r.n), n.periodicity,
                  n.durability, n.complexity_gap, n.popularity, n.size, r.score, w.periodicity, w.durability, w.complexity_gap,
                  w.popularity, w.size);
    out += line;
  }
  return out;
}

std::string topology_dot(const TopologyReport& report, const FtTable& fts) {
  std::map<Ipv4, std::string> shape;
  for (const auto& p : report.protocols) {
    for (auto ip : p.master_servers) shape[ip] = "doublecircle";
    for (auto ip : p.field_devices) shape[ip] = "box";
  }
  if (report.hmi) shape[report.hmi->ip] = "diamond";

  std::set<Port> scada_ports;
  for (const auto& p : report.protocols) scada_ports.insert(p.scada_port);

  std::map<std::tuple<Ipv4, Ipv4, Port>, std::uint64_t> edges;
  for (const auto& ft : fts) {
    const auto& k = ft.key;
    if (!shape.contains(k.src_ip) && !shape.contains(k.dst_ip)) continue;
    Port label = k.dst_port;
    if (scada_ports.contains(k.src_port)) label = k.src_port;
    if (scada_ports.contains(k.dst_port)) label = k.dst_port;
    edges[{k.src_ip, k.dst_ip, label}] += ft.n;
  }
  std::set<Ipv4> nodes;
  for (const auto& [ip, s] : shape) nodes.insert(ip);
  for (const auto& [e, n] : edges) {
    nodes.insert(std::get<0>(e));
    nodes.insert(std::get<1>(e));
  }

  std::string out = "digraph topology {\n  rankdir=LR;\n";
  for (auto ip : nodes) {
    auto it = shape.find(ip);
    out += "  \"" + to_string(ip) + "\" [shape=" + (it == shape.end() ? std::string("ellipse") : it->second) + "];\n";
  }
  for (const auto& [e, n] : edges) {
    out += "  \"" + to_string(std::get<0>(e)) + "\" -> \"" + to_string(std::get<1>(e)) + "\" [label=\"" +
           std::to_string(std::get<2>(e)) + " (" + std::to_string(n) + ")\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace scadascope
