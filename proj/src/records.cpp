#include "scadascope/records.hpp"

#include <cinttypes>
#include <cstdio>

#include "json.hpp"

namespace scadascope {

namespace {

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename T>
T require(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(at_line(line_no) + "missing field \"" + key + "\"");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(at_line(line_no) + "field \"" + key + "\" has the wrong type");
  }
}

Ipv4 require_ip(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto text = require<std::string>(obj, key, line_no);
  auto ip = parse_ipv4(text);
  if (!ip) throw ValidationError(at_line(line_no) + "\"" + key + "\" is not a dotted-quad IPv4 address: " + text);
  return *ip;
}

Port require_port(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(at_line(line_no) + "missing field \"" + key + "\"");
  if (!it->is_number_integer()) throw FormatError(at_line(line_no) + "field \"" + key + "\" must be an integer");
  const auto v = it->get<std::int64_t>();
  if (v < 0 || v > 65535) throw ValidationError(at_line(line_no) + "\"" + key + "\" out of range: " + std::to_string(v));
  return static_cast<Port>(v);
}

}  // namespace

PacketRecord parse_record_line(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(at_line(line_no) + "invalid JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw FormatError(at_line(line_no) + "expected a JSON object");

  PacketRecord r;
  const auto ts = obj.find("ts");
  if (ts == obj.end() || !ts->is_number()) throw FormatError(at_line(line_no) + "missing numeric field \"ts\"");
  const double seconds = ts->get<double>();
  if (!(seconds >= 0)) throw ValidationError(at_line(line_no) + "negative timestamp");
  r.ts = from_seconds(seconds);
  r.src_ip = require_ip(obj, "src_ip", line_no);
  r.src_port = require_port(obj, "src_port", line_no);
  r.dst_ip = require_ip(obj, "dst_ip", line_no);
  r.dst_port = require_port(obj, "dst_port", line_no);

  const auto proto = require<std::string>(obj, "proto", line_no);
  auto transport = parse_transport(proto);
  if (!transport) throw ValidationError(at_line(line_no) + "unknown proto \"" + proto + "\"");
  r.transport = *transport;

  const auto size = obj.find("size");
  if (size == obj.end() || !size->is_number_integer()) throw FormatError(at_line(line_no) + "missing integer field \"size\"");
  const auto bytes = size->get<std::int64_t>();
  if (bytes < 1 || bytes > UINT32_MAX) throw ValidationError(at_line(line_no) + "size out of range: " + std::to_string(bytes));
  r.size = static_cast<std::uint32_t>(bytes);
  return r;
}

std::string format_record_line(const PacketRecord& r) {
  // Timestamps are written with exactly six decimals from the integer value
  // so the text form round-trips at microsecond resolution.
  char buf[256];
  const auto whole = r.ts / kMicrosPerSecond;
  const auto frac = r.ts % kMicrosPerSecond;
  const auto src = to_string(r.src_ip);
  const auto dst = to_string(r.dst_ip);
  std::snprintf(buf, sizeof buf,
                "{\"ts\": %" PRId64 ".%06" PRId64
                ", \"src_ip\": \"%s\", \"src_port\": %u, \"dst_ip\": \"%s\", \"dst_port\": %u, \"proto\": \"%s\", "
                "\"size\": %u}",
                whole, frac, src.c_str(), unsigned{r.src_port}, dst.c_str(), unsigned{r.dst_port},
                std::string(to_string(r.transport)).c_str(), r.size);
  return buf;
}

RecordReader::RecordReader(const std::string& path, IngestStats& stats) : path_(path), in_(path), stats_(stats) {
  if (!in_) throw Error("cannot open " + path);
}

bool RecordReader::next(PacketRecord& out) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (line_.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out = parse_record_line(line_, line_no_);
    } catch (const FormatError& e) {
      throw FormatError(path_ + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path_ + ": " + e.what());
    }
    ++stats_.records;
    return true;
  }
  return false;
}

std::vector<PacketRecord> read_records(const std::string& path) {
  IngestStats stats;
  RecordReader reader(path, stats);
  return drain(reader);
}

void write_records(std::span<const PacketRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    if (r.ts < 0) throw ValidationError("negative timestamp");
    out << format_record_line(r) << '\n';
  }
}

void write_records(std::span<const PacketRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot create " + path);
  write_records(records, out);
  if (!out) throw Error("write failed: " + path);
}

}  // namespace scadascope
