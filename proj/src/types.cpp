#include "scadascope/types.hpp"

#include <charconv>
#include <cmath>

namespace scadascope {

Micros from_seconds(double seconds) {
  return static_cast<Micros>(std::llround(seconds * 1e6));
}

std::string to_string(Ipv4 ip) {
  const auto v = ip.value;
  return std::to_string(v >> 24) + '.' + std::to_string((v >> 16) & 0xff) + '.' +
         std::to_string((v >> 8) & 0xff) + '.' + std::to_string(v & 0xff);
}

std::optional<Ipv4> parse_ipv4(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || next - p > 3 || part > 255) return std::nullopt;
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) return std::nullopt;
  return Ipv4{value};
}

std::string to_string(const Endpoint& ep) {
  return to_string(ep.ip) + ':' + std::to_string(ep.port);
}

std::string_view to_string(Transport t) {
  switch (t) {
    case Transport::tcp: return "tcp";
    case Transport::udp: return "udp";
    case Transport::icmp: return "icmp";
    case Transport::other: return "other";
  }
  return "other";
}

std::optional<Transport> parse_transport(std::string_view text) {
  if (text == "tcp") return Transport::tcp;
  if (text == "udp") return Transport::udp;
  if (text == "icmp") return Transport::icmp;
  if (text == "other") return Transport::other;
  return std::nullopt;
}

}  // namespace scadascope
