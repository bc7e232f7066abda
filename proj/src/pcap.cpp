#include "scadascope/pcap.hpp"

#include <algorithm>
#include <cstring>

namespace scadascope {

namespace {

constexpr std::uint32_t kMaxCaplen = 1u << 18;
constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint8_t kProtoIcmp = 1;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;
// Experimental protocol number used when writing Transport::other.
constexpr std::uint8_t kProtoExperimental = 253;

std::uint32_t load_le32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

std::uint32_t load_be32(const unsigned char* p) {
  return std::uint32_t{p[3]} | std::uint32_t{p[2]} << 8 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[0]} << 24;
}

std::uint16_t load_be16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }

void store_le32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void store_le16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
}

void store_be16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v >> 8);
  p[1] = static_cast<unsigned char>(v);
}

void store_be32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * (3 - i)));
}

std::uint16_t ip_checksum(const unsigned char* header, std::size_t len) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2) sum += load_be16(header + i);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace

std::uint32_t min_frame_size(Transport t) {
  switch (t) {
    case Transport::tcp: return kMinTcpFrame;
    case Transport::udp:
    case Transport::icmp: return kMinUdpFrame;
    case Transport::other: return kMinIpFrame;
  }
  return kMinTcpFrame;
}

bool looks_like_pcap(const unsigned char magic[4]) {
  const auto le = load_le32(magic);
  const auto be = load_be32(magic);
  return le == kPcapMagicMicros || be == kPcapMagicMicros || le == kPcapMagicNanos || be == kPcapMagicNanos;
}

// Reader ---------------------------------------------------------------------

PcapReader::PcapReader(const std::string& path, IngestStats& stats) : path_(path), in_(path, std::ios::binary), stats_(stats) {
  if (!in_) throw Error("cannot open " + path);
  unsigned char hdr[24];
  in_.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  if (in_.gcount() != static_cast<std::streamsize>(sizeof hdr)) {
    throw FormatError(path + ": file too short for a pcap global header");
  }
  const auto le = load_le32(hdr);
  const auto be = load_be32(hdr);
  if (le == kPcapMagicMicros || le == kPcapMagicNanos) {
    swapped_ = false;
    nanos_ = le == kPcapMagicNanos;
  } else if (be == kPcapMagicMicros || be == kPcapMagicNanos) {
    swapped_ = true;
    nanos_ = be == kPcapMagicNanos;
  } else {
    throw FormatError(path + ": bad pcap magic number");
  }
  link_type_ = u32(hdr + 20) & 0xffff;
  if (link_type_ != kLinkEthernet && link_type_ != kLinkRaw && link_type_ != kLinkIpv4) {
    throw FormatError(path + ": unsupported link type " + std::to_string(link_type_));
  }
}

std::uint32_t PcapReader::u32(const unsigned char* p) const { return swapped_ ? load_be32(p) : load_le32(p); }

bool PcapReader::next(PacketRecord& out) {
  while (!done_) {
    unsigned char rec[16];
    in_.read(reinterpret_cast<char*>(rec), sizeof rec);
    const auto got = in_.gcount();
    if (got == 0) {
      done_ = true;
      break;
    }
    if (got != static_cast<std::streamsize>(sizeof rec)) {
      stats_.truncated = true;
      stats_.warnings.push_back(path_ + ": truncated record header at end of file");
      done_ = true;
      break;
    }
    const auto ts_sec = u32(rec);
    const auto ts_frac = u32(rec + 4);
    const auto caplen = u32(rec + 8);
    if (caplen > kMaxCaplen) {
      stats_.truncated = true;
      stats_.warnings.push_back(path_ + ": implausible captured length " + std::to_string(caplen) + ", stopping");
      done_ = true;
      break;
    }
    buf_.resize(caplen);
    in_.read(reinterpret_cast<char*>(buf_.data()), caplen);
    if (in_.gcount() != static_cast<std::streamsize>(caplen)) {
      stats_.truncated = true;
      stats_.warnings.push_back(path_ + ": truncated packet data at end of file");
      done_ = true;
      break;
    }
    out = PacketRecord{};
    out.ts = static_cast<Micros>(ts_sec) * kMicrosPerSecond + (nanos_ ? ts_frac / 1000 : ts_frac);
    out.size = caplen;
    if (decode(buf_, out)) {
      ++stats_.records;
      return true;
    }
  }
  return false;
}

bool PcapReader::decode(std::span<const unsigned char> frame, PacketRecord& out) {
  std::size_t off = 0;
  if (link_type_ == kLinkEthernet) {
    if (frame.size() < 14) {
      ++stats_.skipped_malformed;
      return false;
    }
    if (load_be16(frame.data() + 12) != kEtherIpv4) {
      ++stats_.skipped_non_ip;
      return false;
    }
    off = 14;
  }
  if (frame.size() < off + 20) {
    if (frame.size() > off && (frame[off] >> 4) != 4) {
      ++stats_.skipped_non_ip;
    } else {
      ++stats_.skipped_malformed;
    }
    return false;
  }
  const unsigned char* ip = frame.data() + off;
  if ((ip[0] >> 4) != 4) {
    ++stats_.skipped_non_ip;
    return false;
  }
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
  if (ihl < 20 || frame.size() < off + ihl) {
    ++stats_.skipped_malformed;
    return false;
  }
  if ((load_be16(ip + 6) & 0x1fff) != 0) {
    ++stats_.skipped_fragments;
    return false;
  }
  out.src_ip = Ipv4{load_be32(ip + 12)};
  out.dst_ip = Ipv4{load_be32(ip + 16)};
  const std::uint8_t proto = ip[9];
  const unsigned char* l4 = ip + ihl;
  const std::size_t l4_len = frame.size() - off - ihl;
  switch (proto) {
    case kProtoTcp:
    case kProtoUdp:
      if (l4_len < 4) {
        ++stats_.skipped_malformed;
        return false;
      }
      out.transport = proto == kProtoTcp ? Transport::tcp : Transport::udp;
      out.src_port = load_be16(l4);
      out.dst_port = load_be16(l4 + 2);
      break;
    case kProtoIcmp:
      out.transport = Transport::icmp;
      break;
    default:
      out.transport = Transport::other;
      break;
  }
  return true;
}

std::vector<PacketRecord> read_pcap(const std::string& path, IngestStats* stats) {
  IngestStats local;
  PcapReader reader(path, stats ? *stats : local);
  return drain(reader);
}

// Writer ---------------------------------------------------------------------

void write_pcap(std::span<const PacketRecord> records, std::ostream& out) {
  unsigned char hdr[24] = {};
  store_le32(hdr, kPcapMagicMicros);
  store_le16(hdr + 4, 2);
  store_le16(hdr + 6, 4);
  store_le32(hdr + 16, kMaxCaplen);
  store_le32(hdr + 20, kLinkEthernet);
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);

  std::vector<unsigned char> frame;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto where = "record " + std::to_string(i) + ": ";
    if (r.ts < 0) throw ValidationError(where + "negative timestamp");
    if (r.size < min_frame_size(r.transport)) {
      throw ValidationError(where + "size " + std::to_string(r.size) + " below the " +
                            std::to_string(min_frame_size(r.transport)) + "-byte header floor for " +
                            std::string(to_string(r.transport)));
    }
    if (r.size > kMaxCaplen || r.size - 14 > 0xffff) throw ValidationError(where + "size exceeds an IPv4 datagram");
    if ((r.transport == Transport::icmp || r.transport == Transport::other) && (r.src_port || r.dst_port)) {
      throw ValidationError(where + "ports are not representable for " + std::string(to_string(r.transport)));
    }

    frame.assign(r.size, 0);
    unsigned char* eth = frame.data();
    eth[0] = 0x02;
    store_be32(eth + 2, r.dst_ip.value);
    eth[6] = 0x02;
    store_be32(eth + 8, r.src_ip.value);
    store_be16(eth + 12, kEtherIpv4);

    unsigned char* ip = eth + 14;
    ip[0] = 0x45;
    store_be16(ip + 2, static_cast<std::uint16_t>(r.size - 14));
    store_be16(ip + 6, 0x4000);
    ip[8] = 64;
    switch (r.transport) {
      case Transport::tcp: ip[9] = kProtoTcp; break;
      case Transport::udp: ip[9] = kProtoUdp; break;
      case Transport::icmp: ip[9] = kProtoIcmp; break;
      case Transport::other: ip[9] = kProtoExperimental; break;
    }
    store_be32(ip + 12, r.src_ip.value);
    store_be32(ip + 16, r.dst_ip.value);
    store_be16(ip + 10, ip_checksum(ip, 20));

    unsigned char* l4 = ip + 20;
    switch (r.transport) {
      case Transport::tcp:
        store_be16(l4, r.src_port);
        store_be16(l4 + 2, r.dst_port);
        l4[12] = 5 << 4;
        l4[13] = 0x18;  // PSH|ACK
        store_be16(l4 + 14, 0xffff);
        break;
      case Transport::udp:
        store_be16(l4, r.src_port);
        store_be16(l4 + 2, r.dst_port);
        store_be16(l4 + 4, static_cast<std::uint16_t>(r.size - 34));
        break;
      case Transport::icmp:
        l4[0] = 8;  // echo request
        break;
      case Transport::other:
        break;
    }

    unsigned char rec[16];
    store_le32(rec, static_cast<std::uint32_t>(r.ts / kMicrosPerSecond));
    store_le32(rec + 4, static_cast<std::uint32_t>(r.ts % kMicrosPerSecond));
    store_le32(rec + 8, r.size);
    store_le32(rec + 12, r.size);
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  }
  if (!out) throw Error("write failed");
}

void write_pcap(std::span<const PacketRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create " + path);
  write_pcap(records, out);
}

}  // namespace scadascope
