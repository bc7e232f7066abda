#include "scadascope/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scadascope/pcap.hpp"
#include "scadascope/rng.hpp"

namespace scadascope {

namespace {

constexpr double kDay = 86400.0;
constexpr std::uint32_t kReplySize = 60;
constexpr std::uint32_t kRetrySize = 74;
constexpr std::uint32_t kReportSize = 400;
constexpr std::uint32_t kMtu = 1514;
constexpr std::uint32_t kMaxFrame = 65535;
constexpr std::uint32_t kMaxBackup = 100'000'000;

constexpr Port kNtpPort = 123;
constexpr Port kNetbiosPort = 137;
constexpr Port kHeartbeatClientPort = 40000;
constexpr Port kHeartbeatServerPort = 5001;
constexpr Port kBackupPort = 873;
constexpr Port kX11Port = 6000;
constexpr Port kReportPort = 8080;
constexpr Port kRetryPort = 4840;
constexpr std::array<Port, 8> kOfficeServices{8080, 3306, 5432, 8443, 9000, 9200, 6379, 5672};

constexpr Ipv4 ip4(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  return Ipv4{(a << 24) | (b << 16) | (c << 8) | d};
}

Ipv4 reporter_ip(int r) { return ip4(10, 100, static_cast<std::uint32_t>(r), 1); }
Ipv4 reporter_peer_ip(int r, int j) { return ip4(10, 100, static_cast<std::uint32_t>(r), 10 + static_cast<std::uint32_t>(j)); }
Ipv4 peripheral_host_ip(int k, int h) { return ip4(10, 200, static_cast<std::uint32_t>(k), 1 + static_cast<std::uint32_t>(h)); }
Ipv4 peripheral_server_ip(int k) { return ip4(10, 200, static_cast<std::uint32_t>(k), 254); }
Ipv4 office_host_ip(int i) { return ip4(10, 210, 0, 1 + static_cast<std::uint32_t>(i)); }
Ipv4 office_server_ip(int j) { return ip4(10, 211, 0, 1 + static_cast<std::uint32_t>(j)); }

// Stream ids: category in the high word, process index below.
enum Category : std::uint64_t { field = 1, reporter, hmi, noise, peripheral, office_pair };
std::uint64_t stream_id(Category c, std::uint64_t index) { return (static_cast<std::uint64_t>(c) << 40) | index; }

/// Sequential port allocation that wraps inside [lo, hi].
class PortAllocator {
 public:
  PortAllocator(Port lo, Port hi) : lo_(lo), span_(static_cast<std::uint32_t>(hi) - lo + 1) {}
  Port take() {
    const auto p = static_cast<Port>(lo_ + next_);
    next_ = (next_ + 1) % span_;
    return p;
  }
  std::uint32_t taken() const { return next_; }

 private:
  Port lo_;
  std::uint32_t span_;
  std::uint32_t next_ = 0;
};

double draw_interval(Rng& rng, double mean, double stddev, double floor) {
  if (stddev <= 0) return std::max(mean, floor);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal(mean, stddev);
    if (v >= floor) return v;
  }
  return floor;
}

double latency(Rng& rng) { return 0.005 + 0.045 * rng.uniform(); }

struct Emitted {
  PacketRecord record;
  std::uint64_t stream;
  std::uint64_t seq;
};

class Emitter {
 public:
  explicit Emitter(const ScenarioConfig& config) : start_(from_seconds(config.start_time)) {}

  void emit(std::uint64_t stream, double t, Endpoint src, Endpoint dst, Transport transport, std::uint32_t size) {
    out_.push_back(Emitted{PacketRecord{start_ + from_seconds(t), src.ip, src.port, dst.ip, dst.port, transport, size}, stream, seq_++});
  }

  /// Request then reply after a short latency; the reply is skipped when
  /// reply_size is zero.
  void exchange(std::uint64_t stream, Rng& rng, double t, Endpoint first, Endpoint second, std::uint32_t request_size,
                std::uint32_t reply_size, Transport transport = Transport::tcp) {
    emit(stream, t, first, second, transport, request_size);
    if (reply_size > 0) emit(stream, t + latency(rng), second, first, transport, reply_size);
  }

  std::vector<PacketRecord> finish() {
    std::sort(out_.begin(), out_.end(), [](const Emitted& a, const Emitted& b) {
      if (a.record.ts != b.record.ts) return a.record.ts < b.record.ts;
      if (a.stream != b.stream) return a.stream < b.stream;
      return a.seq < b.seq;
    });
    std::vector<PacketRecord> records;
    records.reserve(out_.size());
    for (auto& e : out_) records.push_back(e.record);
    out_.clear();
    return records;
  }

 private:
  Micros start_;
  std::vector<Emitted> out_;
  std::uint64_t seq_ = 0;
};

class Generator {
 public:
  explicit Generator(const ScenarioConfig& config)
      : c_(config), em_(config), master_ports_(config.master.ephemeral_low, config.master.ephemeral_high) {}

  Trace run() {
    for (std::size_t g = 0; g < c_.scada_groups.size(); ++g) {
      for (int d = 0; d < c_.scada_groups[g].num_field_devices; ++d) field_device(static_cast<int>(g), d);
    }
    for (std::size_t r = 0; r < c_.reporters.size(); ++r) reporter(static_cast<int>(r));
    if (c_.layers == 3) hmi();
    if (c_.noise.nonresponder_retry) retries();
    for (std::size_t k = 0; k < c_.peripherals.size(); ++k) peripheral(static_cast<int>(k));
    for (int i = 0; i < c_.office.hosts; ++i) {
      for (int j = 0; j < c_.office.servers; ++j) office_session(i, j);
    }

    Trace trace;
    trace.records = em_.finish();
    std::set<Ipv4> seen;
    for (const auto& r : trace.records) {
      seen.insert(r.src_ip);
      seen.insert(r.dst_ip);
    }
    for (auto ip : seen) {
      auto it = labels_.find(ip);
      trace.truth.labels[ip] = it == labels_.end() ? DeviceLabel{} : it->second;
    }
    return trace;
  }

 private:
  PortAllocator& host_ports(Ipv4 ip) { return host_ports_.try_emplace(ip.value, Port{32768}, Port{60999}).first->second; }

  void field_device(int g, int d) {
    const auto& grp = c_.scada_groups[static_cast<std::size_t>(g)];
    const auto stream = stream_id(Category::field, (static_cast<std::uint64_t>(g) << 20) | static_cast<std::uint64_t>(d));
    Rng rng(c_.seed, stream);
    const Ipv4 ip = field_device_ip(g, d);
    labels_[ip] = DeviceLabel{DeviceRole::field_device, grp.port};
    labels_[kMasterIp] = DeviceLabel{DeviceRole::master, master_protocol()};

    Port mport = master_ports_.take();
    std::size_t k = static_cast<std::size_t>(d);
    double t = rng.uniform() * grp.poll_mean;
    while (t < c_.duration) {
      const auto size = grp.object_sizes[k++ % grp.object_sizes.size()];
      const Endpoint fd{ip, grp.port};
      const Endpoint master{kMasterIp, mport};
      if (grp.initiator == Initiator::field_device) {
        if (grp.response) em_.exchange(stream, rng, t, fd, master, size - kReplySize, kReplySize);
        else em_.exchange(stream, rng, t, fd, master, size, 0);
      } else {
        if (grp.response) em_.exchange(stream, rng, t, master, fd, kReplySize, size - kReplySize);
        else em_.exchange(stream, rng, t, master, fd, size, 0);
      }
      const double gap = draw_interval(rng, grp.poll_mean, grp.poll_jitter_stddev, c_.min_interval);
      if (rng.chance(c_.master.reconnect_rate * gap / kDay)) mport = master_ports_.take();
      t += gap;
    }
  }

  void reporter(int r) {
    const auto& rep = c_.reporters[static_cast<std::size_t>(r)];
    const auto& grp = *std::find_if(c_.scada_groups.begin(), c_.scada_groups.end(),
                                    [&](const ScadaGroup& g) { return g.port == rep.group_port; });
    const auto stream = stream_id(Category::reporter, static_cast<std::uint64_t>(r));
    Rng rng(c_.seed, stream);
    const Ipv4 ip = reporter_ip(r);
    labels_[ip] = DeviceLabel{};
    for (int j = 1; j < rep.peers; ++j) labels_[reporter_peer_ip(r, j)] = DeviceLabel{};
    labels_[kMasterIp] = DeviceLabel{DeviceRole::master, master_protocol()};

    Port mport = master_ports_.take();
    std::uint64_t k = 0;
    std::uint64_t other = 0;
    double t = rng.uniform() * grp.poll_mean;
    while (t < c_.duration) {
      // Exactly floor(k * share) of the first k events go to the SCADA port.
      const bool scada = std::floor(static_cast<double>(k + 1) * rep.scada_share) > std::floor(static_cast<double>(k) * rep.scada_share);
      if (scada) {
        const auto size = grp.object_sizes[k % grp.object_sizes.size()];
        em_.exchange(stream, rng, t, {ip, rep.group_port}, {kMasterIp, mport}, size - kReplySize, kReplySize);
      } else {
        const int peer = 1 + static_cast<int>(other++ % static_cast<std::uint64_t>(rep.peers - 1));
        em_.exchange(stream, rng, t, {ip, host_ports(ip).take()}, {reporter_peer_ip(r, peer), kReportPort}, kReportSize, 0);
      }
      ++k;
      const double gap = draw_interval(rng, grp.poll_mean, grp.poll_jitter_stddev, c_.min_interval);
      if (rng.chance(c_.master.reconnect_rate * gap / kDay)) mport = master_ports_.take();
      t += gap;
    }
  }

  void hmi() {
    const auto stream = stream_id(Category::hmi, 0);
    Rng rng(c_.seed, stream);
    labels_[kHmiIp] = DeviceLabel{DeviceRole::hmi, std::nullopt};
    const Port mport = master_ports_.take();
    double t = rng.uniform() * c_.hmi.interval_mean;
    while (t < c_.duration) {
      em_.emit(stream, t, {kMasterIp, mport}, {kHmiIp, c_.hmi.port}, Transport::tcp, c_.hmi.size);
      t += c_.min_interval + rng.exponential(c_.hmi.interval_mean);
    }
  }

  void retries() {
    const auto stream = stream_id(Category::noise, 0);
    Rng rng(c_.seed, stream);
    labels_[kNonresponderIp] = DeviceLabel{};
    double t = rng.uniform() * c_.noise.retry_period;
    while (t < c_.duration) {
      for (double offset : {0.0, 3.0, 9.0}) {
        em_.emit(stream, t + offset, {kMasterIp, master_ports_.take()}, {kNonresponderIp, kRetryPort}, Transport::tcp, kRetrySize);
      }
      t += c_.noise.retry_period;
    }
  }

  void peripheral(int k) {
    const auto& p = c_.peripherals[static_cast<std::size_t>(k)];
    const bool on_office = p.host_group == "office";
    const Ipv4 server = p.server ? *p.server : peripheral_server_ip(k);
    if (!labels_.contains(server)) labels_[server] = DeviceLabel{};
    for (int h = 0; h < p.count; ++h) {
      const auto stream = stream_id(Category::peripheral, (static_cast<std::uint64_t>(k) << 20) | static_cast<std::uint64_t>(h));
      Rng rng(c_.seed, stream);
      const Ipv4 host = on_office ? office_host_ip(h) : peripheral_host_ip(k, h);
      if (!labels_.contains(host)) labels_[host] = DeviceLabel{};
      const Port x11_port = p.kind == PeripheralKind::x11 ? host_ports(host).take() : Port{0};
      double t = rng.uniform() * p.period;
      while (t < c_.duration) {
        switch (p.kind) {
          case PeripheralKind::ntp:
            em_.exchange(stream, rng, t, {host, kNtpPort}, {server, kNtpPort}, p.size, p.size, Transport::udp);
            break;
          case PeripheralKind::netbios:
            em_.exchange(stream, rng, t, {host, kNetbiosPort}, {server, kNetbiosPort}, p.size, 0, Transport::udp);
            break;
          case PeripheralKind::heartbeat:
            em_.exchange(stream, rng, t, {host, kHeartbeatClientPort}, {server, kHeartbeatServerPort}, p.size, 0);
            break;
          case PeripheralKind::x11:
            em_.exchange(stream, rng, t, {host, x11_port}, {server, kX11Port}, p.size, kReplySize);
            break;
          case PeripheralKind::backup: backup_session(stream, t, host, server, p.size); break;
        }
        t += draw_interval(rng, p.period, p.effective_jitter(), c_.min_interval);
      }
    }
  }

  void backup_session(std::uint64_t stream, double t, Ipv4 host, Ipv4 server, std::uint32_t total) {
    const Endpoint src{host, host_ports(host).take()};
    const Endpoint dst{server, kBackupPort};
    const std::uint32_t packets = (total + kMtu - 1) / kMtu;
    const std::uint32_t base = total / packets;
    const std::uint32_t extra = total % packets;
    for (std::uint32_t i = 0; i < packets; ++i) {
      em_.emit(stream, t + 0.001 * i, src, dst, Transport::tcp, base + (i < extra ? 1 : 0));
    }
  }

  void office_session(int i, int j) {
    const auto stream = stream_id(Category::office_pair, (static_cast<std::uint64_t>(i) << 20) | static_cast<std::uint64_t>(j));
    Rng rng(c_.seed, stream);
    const Ipv4 host = office_host_ip(i);
    const Endpoint server{office_server_ip(j), kOfficeServices[static_cast<std::size_t>(j) % kOfficeServices.size()]};
    labels_[host] = DeviceLabel{};
    labels_[server.ip] = DeviceLabel{};
    double t = rng.exponential(c_.office.session_mean);
    while (t < c_.duration) {
      const Endpoint client{host, host_ports(host).take()};
      const auto packets = 2 + rng.below(5);
      double tt = t;
      for (std::uint64_t n = 0; n < packets; ++n) {
        const auto size = static_cast<std::uint32_t>(60 + rng.below(1400));
        if (n % 2 == 0) em_.emit(stream, tt, client, server, Transport::tcp, size);
        else em_.emit(stream, tt, server, client, Transport::tcp, size);
        tt += 0.01 + 0.19 * rng.uniform();
      }
      t = tt + 2.0 + rng.exponential(c_.office.session_mean);
    }
  }

  std::optional<Port> master_protocol() const {
    if (c_.scada_groups.size() == 1) return c_.scada_groups.front().port;
    return std::nullopt;
  }

  const ScenarioConfig& c_;
  Emitter em_;
  PortAllocator master_ports_;
  std::map<std::uint32_t, PortAllocator> host_ports_;
  std::map<Ipv4, DeviceLabel> labels_;
};

// JSON -----------------------------------------------------------------------

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError("scenario: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw FormatError("scenario: unknown field \"" + key + "\" in " + where);
    }
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_port(const Json& j, const char* key, Port& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 0 || v > 65535) throw ValidationError(std::string("scenario: ") + key + " out of range");
  out = static_cast<Port>(v);
}

Ipv4 read_ip(const Json& j) {
  const auto text = j.get<std::string>();
  const auto ip = parse_ipv4(text);
  if (!ip) throw ValidationError("scenario: not an IPv4 address: " + text);
  return *ip;
}

PeripheralKind parse_kind(const std::string& s) {
  if (s == "ntp") return PeripheralKind::ntp;
  if (s == "heartbeat") return PeripheralKind::heartbeat;
  if (s == "backup") return PeripheralKind::backup;
  if (s == "x11") return PeripheralKind::x11;
  if (s == "netbios") return PeripheralKind::netbios;
  throw ValidationError("scenario: unknown peripheral kind \"" + s + "\"");
}

ScenarioConfig from_json(const Json& doc) {
  check_keys(doc,
             {"name", "duration", "seed", "start_time", "min_interval", "scada_groups", "master", "layers", "hmi",
              "peripherals", "reporters", "noise", "office"},
             "scenario");
  ScenarioConfig c;
  read(doc, "name", c.name);
  read(doc, "duration", c.duration);
  read(doc, "seed", c.seed);
  read(doc, "start_time", c.start_time);
  read(doc, "min_interval", c.min_interval);
  read(doc, "layers", c.layers);
  if (doc.contains("scada_groups")) {
    for (const auto& g : doc.at("scada_groups")) {
      check_keys(g, {"port", "num_field_devices", "poll_mean", "poll_jitter_stddev", "object_sizes", "response", "initiator"},
                 "scada_groups[]");
      ScadaGroup grp;
      read_port(g, "port", grp.port);
      read(g, "num_field_devices", grp.num_field_devices);
      read(g, "poll_mean", grp.poll_mean);
      read(g, "poll_jitter_stddev", grp.poll_jitter_stddev);
      read(g, "object_sizes", grp.object_sizes);
      read(g, "response", grp.response);
      if (g.contains("initiator")) {
        const auto s = g.at("initiator").get<std::string>();
        if (s == "field_device") grp.initiator = Initiator::field_device;
        else if (s == "master") grp.initiator = Initiator::master;
        else throw ValidationError("scenario: initiator must be \"field_device\" or \"master\"");
      }
      c.scada_groups.push_back(std::move(grp));
    }
  }
  if (doc.contains("master")) {
    const auto& m = doc.at("master");
    check_keys(m, {"ephemeral_port_range", "reconnect_rate"}, "master");
    if (m.contains("ephemeral_port_range")) {
      const auto& r = m.at("ephemeral_port_range");
      if (!r.is_array() || r.size() != 2) throw FormatError("scenario: ephemeral_port_range must be [low, high]");
      const auto lo = r[0].get<std::int64_t>();
      const auto hi = r[1].get<std::int64_t>();
      if (lo < 1 || hi > 65535) throw ValidationError("scenario: ephemeral_port_range out of range");
      c.master.ephemeral_low = static_cast<Port>(lo);
      c.master.ephemeral_high = static_cast<Port>(hi);
    }
    read(m, "reconnect_rate", c.master.reconnect_rate);
  }
  if (doc.contains("hmi")) {
    const auto& h = doc.at("hmi");
    check_keys(h, {"port", "interval_mean", "size"}, "hmi");
    read_port(h, "port", c.hmi.port);
    read(h, "interval_mean", c.hmi.interval_mean);
    read(h, "size", c.hmi.size);
  }
  if (doc.contains("peripherals")) {
    for (const auto& p : doc.at("peripherals")) {
      check_keys(p, {"kind", "period", "size", "jitter", "count", "host_group", "server"}, "peripherals[]");
      PeripheralConfig pc;
      if (!p.contains("kind")) throw FormatError("scenario: peripheral without kind");
      pc.kind = parse_kind(p.at("kind").get<std::string>());
      read(p, "period", pc.period);
      read(p, "size", pc.size);
      if (p.contains("jitter")) pc.jitter = p.at("jitter").get<double>();
      read(p, "count", pc.count);
      read(p, "host_group", pc.host_group);
      if (p.contains("server")) pc.server = read_ip(p.at("server"));
      c.peripherals.push_back(std::move(pc));
    }
  }
  if (doc.contains("reporters")) {
    for (const auto& r : doc.at("reporters")) {
      check_keys(r, {"group_port", "scada_share", "peers"}, "reporters[]");
      ReporterConfig rc;
      read_port(r, "group_port", rc.group_port);
      read(r, "scada_share", rc.scada_share);
      read(r, "peers", rc.peers);
      c.reporters.push_back(rc);
    }
  }
  if (doc.contains("noise")) {
    const auto& n = doc.at("noise");
    check_keys(n, {"nonresponder_retry", "retry_period"}, "noise");
    read(n, "nonresponder_retry", c.noise.nonresponder_retry);
    read(n, "retry_period", c.noise.retry_period);
  }
  if (doc.contains("office")) {
    const auto& o = doc.at("office");
    check_keys(o, {"hosts", "servers", "session_mean"}, "office");
    read(o, "hosts", c.office.hosts);
    read(o, "servers", c.office.servers);
    read(o, "session_mean", c.office.session_mean);
  }
  return c;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError("scenario: " + message);
}

}  // namespace

std::string_view to_string(PeripheralKind kind) {
  switch (kind) {
    case PeripheralKind::ntp: return "ntp";
    case PeripheralKind::heartbeat: return "heartbeat";
    case PeripheralKind::backup: return "backup";
    case PeripheralKind::x11: return "x11";
    case PeripheralKind::netbios: return "netbios";
  }
  return "ntp";
}

Ipv4 field_device_ip(int group, int device) {
  return ip4(10, 1 + static_cast<std::uint32_t>(group), static_cast<std::uint32_t>(device / 250),
             1 + static_cast<std::uint32_t>(device % 250));
}

int ScenarioConfig::total_field_devices() const {
  int n = 0;
  for (const auto& g : scada_groups) n += g.num_field_devices;
  return n;
}

void ScenarioConfig::validate() const {
  require(duration > 0, "duration must be positive");
  require(start_time >= 0, "start_time must not be negative");
  require(min_interval > 0, "min_interval must be positive");
  require(scada_groups.size() <= 99, "at most 99 SCADA groups");

  std::set<Port> ports;
  for (const auto& g : scada_groups) {
    const auto where = "group on port " + std::to_string(g.port) + ": ";
    require(g.port != 0, "SCADA group port must be non-zero");
    require(ports.insert(g.port).second, where + "port used by two groups");
    require(g.num_field_devices >= 0 && g.num_field_devices <= 250 * 256, where + "num_field_devices out of range");
    require(g.poll_mean > 1.0, where + "poll_mean must exceed one second");
    require(g.poll_jitter_stddev >= 0, where + "poll_jitter_stddev must not be negative");
    require(g.poll_jitter_stddev < g.poll_mean, where + "poll_jitter_stddev must be smaller than poll_mean");
    require(!g.object_sizes.empty(), where + "object_sizes must not be empty");
    const std::uint32_t floor = kMinTcpFrame + (g.response ? kReplySize : 0);
    for (auto s : g.object_sizes) {
      require(s >= floor && s <= kMaxFrame, where + "object size " + std::to_string(s) + " outside [" + std::to_string(floor) + ", 65535]");
    }
  }

  require(master.ephemeral_low >= 1 && master.ephemeral_low <= master.ephemeral_high, "ephemeral_port_range must satisfy 1 <= low <= high");
  require(master.reconnect_rate >= 0, "reconnect_rate must not be negative");

  require(layers == 2 || layers == 3, "layers must be 2 or 3");
  if (layers == 3) {
    require(total_field_devices() > 0, "three layers need a master, so at least one field device");
    require(hmi.size >= kMinTcpFrame && hmi.size <= kMaxFrame, "hmi size outside [54, 65535]");
    require(hmi.interval_mean >= 0, "hmi interval_mean must not be negative");
    // Expected master -> peer quantities; the HMI has to dominate them.
    const double hmi_qty = duration / (min_interval + hmi.interval_mean) * hmi.size;
    double other = 0;
    for (const auto& g : scada_groups) {
      if (g.initiator != Initiator::master || g.num_field_devices == 0) continue;
      double mean_size = 0;
      for (auto s : g.object_sizes) mean_size += s;
      mean_size /= static_cast<double>(g.object_sizes.size());
      other = std::max(other, duration / g.poll_mean * mean_size);
    }
    if (noise.nonresponder_retry) other = std::max(other, 3.0 * kRetrySize * duration / noise.retry_period);
    require(hmi_qty > 2 * other, "HMI quantity would not dominate the master's other destinations");
  }

  require(peripherals.size() <= 250, "at most 250 peripherals");
  for (const auto& p : peripherals) {
    const auto where = std::string(to_string(p.kind)) + " peripheral: ";
    require(p.period > 1.0, where + "period must exceed one second");
    require(p.effective_jitter() >= 0 && p.effective_jitter() < p.period, where + "jitter must lie in [0, period)");
    require(p.count >= 1 && p.count <= 250, where + "count must lie in [1, 250]");
    const bool udp = p.kind == PeripheralKind::ntp || p.kind == PeripheralKind::netbios;
    const std::uint32_t floor = udp ? kMinUdpFrame : kMinTcpFrame;
    const std::uint32_t ceiling = p.kind == PeripheralKind::backup ? kMaxBackup : kMaxFrame;
    require(p.size >= floor && p.size <= ceiling, where + "size outside [" + std::to_string(floor) + ", " + std::to_string(ceiling) + "]");
    require(p.host_group == "peripheral" || p.host_group == "office", where + "host_group must be \"peripheral\" or \"office\"");
    if (p.host_group == "office") require(p.count <= office.hosts, where + "count exceeds office hosts");
  }

  require(reporters.size() <= 250, "at most 250 reporters");
  for (const auto& r : reporters) {
    require(ports.contains(r.group_port), "reporter group_port " + std::to_string(r.group_port) + " matches no SCADA group");
    require(r.scada_share > 0 && r.scada_share <= 1, "reporter scada_share must lie in (0, 1]");
    require(r.peers >= 1 && r.peers <= 200, "reporter peers must lie in [1, 200]");
    require(r.scada_share == 1 || r.peers >= 2, "reporter with non-SCADA traffic needs at least two peers");
  }

  require(noise.retry_period > 9, "retry_period must exceed the 9 s retry span");
  require(office.hosts >= 0 && office.hosts <= 250, "office hosts must lie in [0, 250]");
  require(office.servers >= 1 && office.servers <= 250, "office servers must lie in [1, 250]");
  require(office.session_mean > 0, "office session_mean must be positive");
}

ScenarioConfig parse_scenario(std::string_view json_text) {
  try {
    return from_json(Json::parse(json_text));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_json(const ScenarioConfig& c) {
  OrderedJson doc;
  doc["name"] = c.name;
  doc["duration"] = c.duration;
  doc["seed"] = c.seed;
  doc["start_time"] = c.start_time;
  doc["min_interval"] = c.min_interval;
  doc["scada_groups"] = OrderedJson::array();
  for (const auto& g : c.scada_groups) {
    OrderedJson j;
    j["port"] = g.port;
    j["num_field_devices"] = g.num_field_devices;
    j["poll_mean"] = g.poll_mean;
    j["poll_jitter_stddev"] = g.poll_jitter_stddev;
    j["object_sizes"] = g.object_sizes;
    j["response"] = g.response;
    j["initiator"] = g.initiator == Initiator::master ? "master" : "field_device";
    doc["scada_groups"].push_back(std::move(j));
  }
  doc["master"] = {{"ephemeral_port_range", {c.master.ephemeral_low, c.master.ephemeral_high}},
                   {"reconnect_rate", c.master.reconnect_rate}};
  doc["layers"] = c.layers;
  doc["hmi"] = {{"port", c.hmi.port}, {"interval_mean", c.hmi.interval_mean}, {"size", c.hmi.size}};
  doc["peripherals"] = OrderedJson::array();
  for (const auto& p : c.peripherals) {
    OrderedJson j;
    j["kind"] = std::string(to_string(p.kind));
    j["period"] = p.period;
    j["size"] = p.size;
    if (p.jitter) j["jitter"] = *p.jitter;
    j["count"] = p.count;
    j["host_group"] = p.host_group;
    if (p.server) j["server"] = to_string(*p.server);
    doc["peripherals"].push_back(std::move(j));
  }
  doc["reporters"] = OrderedJson::array();
  for (const auto& r : c.reporters) {
    doc["reporters"].push_back({{"group_port", r.group_port}, {"scada_share", r.scada_share}, {"peers", r.peers}});
  }
  doc["noise"] = {{"nonresponder_retry", c.noise.nonresponder_retry}, {"retry_period", c.noise.retry_period}};
  doc["office"] = {{"hosts", c.office.hosts}, {"servers", c.office.servers}, {"session_mean", c.office.session_mean}};
  return doc.dump(2) + "\n";
}

Trace generate(const ScenarioConfig& config) {
  config.validate();
  return Generator(config).run();
}

// Presets --------------------------------------------------------------------

namespace presets {

namespace {

std::vector<PeripheralConfig> standard_peripherals() {
  auto p = [](PeripheralKind kind, double period, std::uint32_t size, int count) {
    PeripheralConfig c;
    c.kind = kind;
    c.period = period;
    c.size = size;
    c.count = count;
    return c;
  };
  return {
      p(PeripheralKind::ntp, 64, 90, 3),
      p(PeripheralKind::ntp, 1024, 90, 1),
      p(PeripheralKind::heartbeat, 30, 66, 2),
      p(PeripheralKind::heartbeat, 10, 120, 1),
      p(PeripheralKind::heartbeat, 120, 80, 1),
      p(PeripheralKind::backup, 21600, 200000, 1),
      p(PeripheralKind::backup, 3600, 40000, 1),
      p(PeripheralKind::x11, 15, 400, 1),
      p(PeripheralKind::x11, 45, 200, 1),
      p(PeripheralKind::netbios, 60, 92, 2),
      p(PeripheralKind::netbios, 300, 243, 1),
  };
}

}  // namespace

ScenarioConfig dataset1_like(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "dataset1_like";
  c.seed = seed;
  c.duration = 86400;
  ScadaGroup g;
  g.port = 20000;
  g.num_field_devices = 49;
  g.poll_mean = 8.75;
  g.poll_jitter_stddev = 1.22;
  g.object_sizes = {340, 337, 332, 296, 225};
  c.scada_groups = {g};
  c.layers = 3;
  c.peripherals = standard_peripherals();
  c.reporters = {{20000, 0.3, 2}, {20000, 0.9, 6}};
  c.noise.nonresponder_retry = true;
  return c;
}

ScenarioConfig dataset2_like(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "dataset2_like";
  c.seed = seed;
  c.duration = 86400;
  ScadaGroup a;
  a.port = 2404;
  a.num_field_devices = 22;
  a.poll_mean = 10.0;
  a.poll_jitter_stddev = 1.3;
  a.object_sizes = {686, 288, 1086};
  ScadaGroup b;
  b.port = 5450;
  b.num_field_devices = 4;
  b.poll_mean = 30.0;
  b.poll_jitter_stddev = 4.0;
  b.object_sizes = {1514};
  b.initiator = Initiator::master;
  c.scada_groups = {a, b};
  c.peripherals = standard_peripherals();
  c.peripherals.resize(6);
  return c;
}

ScenarioConfig month_scale(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "month_scale";
  c.seed = seed;
  c.duration = 30 * 86400.0;
  ScadaGroup g;
  g.port = 20000;
  g.num_field_devices = 10;
  g.poll_mean = 45.0;
  g.poll_jitter_stddev = 5.0;
  g.object_sizes = {320, 180};
  g.response = false;
  c.scada_groups = {g};
  auto p = standard_peripherals();
  c.peripherals = {p[1], p[4], p[5], p[8]};
  c.noise.nonresponder_retry = true;
  c.noise.retry_period = 3600;
  return c;
}

ScenarioConfig office(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "office";
  c.seed = seed;
  c.duration = 6 * 3600.0;
  c.office.hosts = 8;
  c.office.servers = 5;
  c.office.session_mean = 120;
  PeripheralConfig hb;
  hb.kind = PeripheralKind::heartbeat;
  hb.period = 30;
  hb.size = 66;
  hb.count = 8;
  hb.host_group = "office";
  c.peripherals = {hb};
  return c;
}

}  // namespace presets

}  // namespace scadascope
