#pragma once

#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scadascope/ingest.hpp"
#include "scadascope/types.hpp"

namespace scadascope {

// Canonical packet record format: one JSON object per line,
//   {"ts": 12.345678, "src_ip": "10.0.0.1", "src_port": 20000,
//    "dst_ip": "10.0.0.2", "dst_port": 51382, "proto": "tcp", "size": 74}
// Blank lines are ignored.

/// Parses one line. Errors carry `line_no` in their message: FormatError for
/// unparsable JSON or missing fields, ValidationError for out-of-range values.
PacketRecord parse_record_line(std::string_view line, std::size_t line_no);

std::string format_record_line(const PacketRecord& record);

class RecordReader : public PacketSource {
 public:
  RecordReader(const std::string& path, IngestStats& stats);
  bool next(PacketRecord& out) override;

 private:
  std::string path_;
  std::ifstream in_;
  IngestStats& stats_;
  std::string line_;
  std::size_t line_no_ = 0;
};

std::vector<PacketRecord> read_records(const std::string& path);

void write_records(std::span<const PacketRecord> records, std::ostream& out);
void write_records(std::span<const PacketRecord> records, const std::string& path);

}  // namespace scadascope
