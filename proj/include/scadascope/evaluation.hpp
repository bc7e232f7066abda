#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "scadascope/inference.hpp"
#include "scadascope/types.hpp"

namespace scadascope {

enum class DeviceRole { field_device, master, hmi, peripheral };

std::string_view to_string(DeviceRole role);
std::optional<DeviceRole> parse_role(std::string_view text);

struct DeviceLabel {
  DeviceRole role = DeviceRole::peripheral;
  std::optional<Port> protocol_port;

  bool operator==(const DeviceLabel&) const = default;
};

struct GroundTruth {
  std::map<Ipv4, DeviceLabel> labels;

  bool operator==(const GroundTruth&) const = default;
};

/// Accepts {"ip": "role"} or {"ip": {"label": "role", "protocol": port}}.
GroundTruth load_ground_truth(const std::string& path);
GroundTruth parse_ground_truth(std::string_view json_text);
std::string ground_truth_json(const GroundTruth& truth);
void save_ground_truth(const GroundTruth& truth, const std::string& path);

struct Scores {
  std::size_t claimed = 0;
  std::size_t truth = 0;
  std::size_t true_positives = 0;
  std::size_t role_mismatches = 0;  // true positives claimed under another role
  double precision = 0;
  double recall = 0;
  double f_score = 0;
};

/// Positives are the classified SCADA devices (field devices, masters and
/// the HMI when one was inferred); truth positives are every device labeled
/// field_device, master or hmi. With include_hmi false, HMI labels and the
/// inferred HMI are left out of both sides. Throws ValidationError when the
/// truth holds no SCADA device.
Scores evaluate(const TopologyReport& report, const GroundTruth& truth, bool include_hmi = true);

}  // namespace scadascope
