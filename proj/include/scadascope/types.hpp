#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scadascope {

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input bytes or text do not follow the expected file format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A value is out of its legal domain (port > 65535, size < 1, bad config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Records arrived too far out of time order for the reorder window.
class OrderError : public Error {
 public:
  using Error::Error;
};

// Time -----------------------------------------------------------------------

/// Microseconds since the trace epoch. Time arithmetic on the analysis path is
/// integral so that gap comparisons against t_comm are exact.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerSecond = 1'000'000;
inline constexpr double kSecondsPerHour = 3600.0;

constexpr double to_seconds(Micros us) { return static_cast<double>(us) / 1e6; }

/// Rounds to the nearest microsecond.
Micros from_seconds(double seconds);

// Addressing -----------------------------------------------------------------

using Port = std::uint16_t;

struct Ipv4 {
  std::uint32_t value = 0;

  auto operator<=>(const Ipv4&) const = default;
};

std::string to_string(Ipv4 ip);

/// Parses dotted-quad notation; std::nullopt on anything else.
std::optional<Ipv4> parse_ipv4(std::string_view text);

struct Endpoint {
  Ipv4 ip;
  Port port = 0;

  auto operator<=>(const Endpoint&) const = default;
};

/// "a.b.c.d:port"
std::string to_string(const Endpoint& ep);

enum class Transport : std::uint8_t { tcp, udp, icmp, other };

std::string_view to_string(Transport t);
std::optional<Transport> parse_transport(std::string_view text);

// Packets --------------------------------------------------------------------

struct PacketRecord {
  Micros ts = 0;
  Ipv4 src_ip;
  Port src_port = 0;
  Ipv4 dst_ip;
  Port dst_port = 0;
  Transport transport = Transport::tcp;
  std::uint32_t size = 0;  // captured frame length in bytes

  Endpoint src() const { return {src_ip, src_port}; }
  Endpoint dst() const { return {dst_ip, dst_port}; }

  bool operator==(const PacketRecord&) const = default;
};

// Hashing --------------------------------------------------------------------

/// 64-bit finalizer from splitmix64; used wherever a well-mixed deterministic
/// hash of packed integers is needed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t pack(const Endpoint& ep) {
  return (static_cast<std::uint64_t>(ep.ip.value) << 16) | ep.port;
}

}  // namespace scadascope

template <>
struct std::hash<scadascope::Ipv4> {
  std::size_t operator()(scadascope::Ipv4 ip) const noexcept {
    return static_cast<std::size_t>(scadascope::mix64(ip.value));
  }
};

template <>
struct std::hash<scadascope::Endpoint> {
  std::size_t operator()(const scadascope::Endpoint& ep) const noexcept {
    return static_cast<std::size_t>(scadascope::mix64(scadascope::pack(ep)));
  }
};
