#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "scadascope/ingest.hpp"
#include "scadascope/types.hpp"

namespace scadascope {

inline constexpr std::uint32_t kPcapMagicMicros = 0xa1b2c3d4;
inline constexpr std::uint32_t kPcapMagicNanos = 0xa1b23c4d;

inline constexpr std::uint32_t kLinkEthernet = 1;
inline constexpr std::uint32_t kLinkRaw = 101;
inline constexpr std::uint32_t kLinkIpv4 = 228;

/// Ethernet + IPv4 + TCP headers without options.
inline constexpr std::uint32_t kMinTcpFrame = 54;
/// Ethernet + IPv4 + 8-byte UDP or ICMP header.
inline constexpr std::uint32_t kMinUdpFrame = 42;
inline constexpr std::uint32_t kMinIpFrame = 34;

std::uint32_t min_frame_size(Transport t);

/// True for either byte order of the classic microsecond or nanosecond magic.
bool looks_like_pcap(const unsigned char magic[4]);

/// Classic libpcap file reader (no pcapng). Each IPv4 frame becomes one
/// PacketRecord whose size is the captured length from the record header.
/// Non-IPv4 frames are skipped and counted; a truncated final record ends the
/// stream with a warning. A bad global header throws FormatError.
class PcapReader : public PacketSource {
 public:
  PcapReader(const std::string& path, IngestStats& stats);
  bool next(PacketRecord& out) override;

  std::uint32_t link_type() const { return link_type_; }

 private:
  std::uint32_t u32(const unsigned char* p) const;
  bool decode(std::span<const unsigned char> frame, PacketRecord& out);

  std::string path_;
  std::ifstream in_;
  IngestStats& stats_;
  bool swapped_ = false;
  bool nanos_ = false;
  std::uint32_t link_type_ = kLinkEthernet;
  std::vector<unsigned char> buf_;
  bool done_ = false;
};

std::vector<PacketRecord> read_pcap(const std::string& path, IngestStats* stats = nullptr);

/// Writes a little-endian microsecond pcap with synthetic Ethernet/IPv4/L4
/// headers padded so that each frame's captured length equals record.size.
/// Throws ValidationError for records below the header floor of their
/// transport or for ICMP/other records that carry port numbers.
void write_pcap(std::span<const PacketRecord> records, const std::string& path);
void write_pcap(std::span<const PacketRecord> records, std::ostream& out);

}  // namespace scadascope
