#include "scadascope/evaluation.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace scadascope {

std::string_view to_string(DeviceRole role) {
  switch (role) {
    case DeviceRole::field_device: return "field_device";
    case DeviceRole::master: return "master";
    case DeviceRole::hmi: return "hmi";
    case DeviceRole::peripheral: return "peripheral";
  }
  return "peripheral";
}

std::optional<DeviceRole> parse_role(std::string_view text) {
  if (text == "field_device") return DeviceRole::field_device;
  if (text == "master") return DeviceRole::master;
  if (text == "hmi") return DeviceRole::hmi;
  if (text == "peripheral") return DeviceRole::peripheral;
  return std::nullopt;
}

GroundTruth parse_ground_truth(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("ground truth: invalid JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw FormatError("ground truth: expected a JSON object keyed by IP address");
  GroundTruth truth;
  for (const auto& [key, value] : doc.items()) {
    const auto ip = parse_ipv4(key);
    if (!ip) throw ValidationError("ground truth: not an IPv4 address: " + key);
    DeviceLabel label;
    std::string role_text;
    if (value.is_string()) {
      role_text = value.get<std::string>();
    } else if (value.is_object() && value.contains("label") && value["label"].is_string()) {
      role_text = value["label"].get<std::string>();
      if (value.contains("protocol") && !value["protocol"].is_null()) {
        if (!value["protocol"].is_number_integer()) throw FormatError("ground truth: protocol of " + key + " must be an integer");
        const auto p = value["protocol"].get<std::int64_t>();
        if (p < 0 || p > 65535) throw ValidationError("ground truth: protocol port out of range for " + key);
        label.protocol_port = static_cast<Port>(p);
      }
    } else {
      throw FormatError("ground truth: label of " + key + " must be a string or {\"label\": ...}");
    }
    const auto role = parse_role(role_text);
    if (!role) throw ValidationError("ground truth: unknown label \"" + role_text + "\" for " + key);
    label.role = *role;
    truth.labels[*ip] = label;
  }
  return truth;
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ground_truth(ss.str());
}

std::string ground_truth_json(const GroundTruth& truth) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [ip, label] : truth.labels) {
    nlohmann::ordered_json entry;
    entry["label"] = std::string(to_string(label.role));
    entry["protocol"] = label.protocol_port ? nlohmann::ordered_json(*label.protocol_port) : nlohmann::ordered_json(nullptr);
    doc[to_string(ip)] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot create " + path);
  out << ground_truth_json(truth);
}

Scores evaluate(const TopologyReport& report, const GroundTruth& truth, bool include_hmi) {
  std::map<Ipv4, DeviceRole> claimed;
  for (const auto& p : report.protocols) {
    for (auto ip : p.master_servers) claimed.emplace(ip, DeviceRole::master);
    for (auto ip : p.field_devices) claimed[ip] = DeviceRole::field_device;
  }
  if (include_hmi && report.hmi) claimed.emplace(report.hmi->ip, DeviceRole::hmi);

  std::set<Ipv4> positives;
  for (const auto& [ip, label] : truth.labels) {
    if (label.role == DeviceRole::peripheral) continue;
    if (label.role == DeviceRole::hmi && !include_hmi) continue;
    positives.insert(ip);
  }
  if (positives.empty()) throw ValidationError("ground truth labels no SCADA device");

  Scores s;
  s.claimed = claimed.size();
  s.truth = positives.size();
  for (const auto& [ip, role] : claimed) {
    if (!positives.contains(ip)) continue;
    ++s.true_positives;
    if (truth.labels.at(ip).role != role) ++s.role_mismatches;
  }
  const auto tp = static_cast<double>(s.true_positives);
  s.precision = s.claimed ? tp / static_cast<double>(s.claimed) : 0.0;
  s.recall = tp / static_cast<double>(s.truth);
  s.f_score = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace scadascope
