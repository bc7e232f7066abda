#include "scadascope/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "scadascope/evaluation.hpp"
#include "scadascope/ingest.hpp"
#include "scadascope/pcap.hpp"
#include "scadascope/pipeline.hpp"
#include "scadascope/records.hpp"
#include "scadascope/report.hpp"
#include "scadascope/synth.hpp"

namespace scadascope::cli {

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

/// Prints a line per million records to `err`.
class ProgressSource : public PacketSource {
 public:
  ProgressSource(PacketSource& inner, std::ostream& err, bool quiet) : inner_(inner), err_(err), quiet_(quiet) {}
  bool next(PacketRecord& out) override {
    if (!inner_.next(out)) return false;
    if (++count_ % 1'000'000 == 0 && !quiet_) err_ << "  read " << count_ / 1'000'000 << "M records\n" << std::flush;
    return true;
  }

 private:
  PacketSource& inner_;
  std::ostream& err_;
  bool quiet_;
  std::uint64_t count_ = 0;
};

std::optional<unsigned> thread_cap() {
  const char* env = std::getenv("SCADASCOPE_THREADS");
  if (!env) return std::nullopt;
  char* end = nullptr;
  const long cap = std::strtol(env, &end, 10);
  if (end == env || cap < 1) return std::nullopt;
  return static_cast<unsigned>(cap);
}

// Flags shared by the analysis subcommands.
struct Common {
  std::vector<std::string> inputs;
  double t_comm = 1.0;
  bool filter = false;
  std::vector<int> filter_ports;
  bool no_default_filter = false;
  bool force_sort = false;
  double reorder_window = 1.0;
  double pr_cap = 1e6;
  std::string log_base = "e";
  std::string pu_mode = "role_sensitive";
  int num_protocols = 1;
  int fd_degree = 5;
  double scada_fraction = 0.5;
  bool three_layer = false;
  unsigned threads = 0;
  bool quiet = false;
  std::string format;

  void add_ingest(CLI::App* app, bool inputs_required = true) {
    auto* in = app->add_option("inputs", inputs, "pcap or JSON-lines record files, read in order");
    if (inputs_required) in->required();
    app->add_option("--filter-ports", filter_ports, "extra service ports to drop (comma separated); enables the filter")
        ->delimiter(',');
    app->add_flag("--no-default-filter", no_default_filter, "leave the eleven default service ports and non-TCP traffic in");
    app->add_flag("--force-sort", force_sort, "buffer and sort the whole input instead of the bounded reorder window");
    app->add_option("--reorder-window", reorder_window, "seconds a record may arrive late (default 1)");
    app->add_flag("-q,--quiet", quiet, "suppress progress and warnings");
  }

  void add_segmentation(CLI::App* app) {
    app->add_flag("--filter", filter, "drop the default service ports and non-TCP traffic");
    app->add_option("--t-comm", t_comm, "segment gap threshold in seconds (default 1)");
    app->add_option("--pr-cap", pr_cap, "periodicity value used when inter-arrival variance is zero");
    app->add_option("--log-base", log_base, "logarithm in durability: e or 10")->check(CLI::IsMember({"e", "10"}));
    app->add_option("--pu-mode", pu_mode, "service popularity counting: role_sensitive or role_agnostic")
        ->check(CLI::IsMember({"role_sensitive", "role_agnostic"}));
    app->add_option("--threads", threads, "worker threads (capped by SCADASCOPE_THREADS)");
  }

  void add_inference(CLI::App* app) {
    app->add_option("--num-protocols", num_protocols, "number of deployed SCADA protocols (default 1)");
    app->add_option("--fd-degree-threshold", fd_degree, "field devices have fewer distinct peers than this (default 5)");
    app->add_option("--scada-fraction", scada_fraction, "field devices exceed this share of SCADA segments (default 0.5)");
    app->add_flag("--three-layer", three_layer, "infer the HMI behind the master servers");
  }

  std::optional<FilterConfig> filter_config(bool default_on) const {
    const bool defaults = (default_on || filter || !filter_ports.empty()) && !no_default_filter;
    if (!defaults && filter_ports.empty()) return std::nullopt;
    FilterConfig f = defaults ? FilterConfig::defaults() : FilterConfig{};
    for (int p : filter_ports) {
      if (p < 0 || p > 65535) throw ValidationError("filter port out of range: " + std::to_string(p));
      f.service_ports.insert(static_cast<Port>(p));
    }
    return f;
  }

  AnalysisConfig config() const {
    if (!(t_comm > 0)) throw ValidationError("--t-comm must be positive");
    if (reorder_window < 0) throw ValidationError("--reorder-window must not be negative");
    AnalysisConfig c;
    c.filter = filter_config(false);
    c.t_comm = from_seconds(t_comm);
    c.reorder_window = from_seconds(reorder_window);
    c.force_sort = force_sort;
    c.features.periodicity_cap = pr_cap;
    c.features.log_base = log_base == "10" ? LogBase::ten : LogBase::natural;
    c.features.popularity = pu_mode == "role_agnostic" ? PopularityMode::role_agnostic : PopularityMode::role_sensitive;
    c.inference.num_scada_protocols = num_protocols;
    c.inference.fd_degree_threshold = fd_degree;
    c.inference.scada_fraction_threshold = scada_fraction;
    c.inference.three_layer = three_layer;
    const auto cap = thread_cap();
    c.shards = threads == 0 ? default_threads() : (cap ? std::min(threads, *cap) : threads);
    c.validate();
    return c;
  }
};

struct Loaded {
  IngestStats stats;
  std::unique_ptr<PacketSource> chain;
};

std::unique_ptr<Loaded> open_inputs(const std::vector<std::string>& paths) {
  auto l = std::make_unique<Loaded>();
  std::vector<std::unique_ptr<PacketSource>> parts;
  for (const auto& p : paths) parts.push_back(open_trace(p, l->stats));
  l->chain = std::make_unique<ChainSource>(std::move(parts));
  return l;
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings, bool quiet) {
  if (quiet) return;
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

// rank -----------------------------------------------------------------------

struct RankCmd {
  Common common;
  std::size_t top = 20;
  std::string out_path;
};

int cmd_rank(RankCmd& cmd, std::ostream& out, std::ostream& err) {
  auto& c = cmd.common;
  const auto config = c.config();
  auto in = open_inputs(c.inputs);
  ProgressSource progress(*in->chain, err, c.quiet);
  const auto a = rank_only(progress, config);
  print_warnings(err, in->stats.warnings, c.quiet);

  if (!cmd.out_path.empty()) write_text(cmd.out_path, ranking_csv(a.ranking, cmd.top));
  const bool csv = c.format == "csv";
  out << (csv ? ranking_csv(a.ranking, cmd.top) : ranking_table(a.ranking, cmd.top));

  std::ostream& summary = csv ? err : out;
  if (a.ranking.empty()) {
    if (!c.quiet) err << "warning: no ft entries; the ranking is empty\n";
    return kExitOk;
  }
  const auto devices = DeviceIndex::build(a.fts);
  const auto port = infer_scada_port(a.ranking, devices);
  const auto k = std::min<std::size_t>(1000, a.ranking.size());
  if (!csv || !c.quiet) {
    summary << fmt("%llu records, %llu segments, %llu fts\n", static_cast<unsigned long long>(a.counts.records),
                   static_cast<unsigned long long>(a.counts.segments), static_cast<unsigned long long>(a.counts.fts));
    summary << top_k_on_port(a.ranking, k, port.port) << " of top-" << k << " fts use port " << port.port
            << " (lower-degree side of rank 1: " << to_string(port.device) << ")\n";
  }
  return kExitOk;
}

// analyze --------------------------------------------------------------------

struct AnalyzeCmd {
  Common common;
  std::string out_path;
  std::string dot_path;
};

int cmd_analyze(AnalyzeCmd& cmd, std::ostream& out, std::ostream& err) {
  auto& c = cmd.common;
  const auto started = std::chrono::steady_clock::now();
  const auto config = c.config();
  RunManifest manifest;
  manifest.inputs = c.inputs;
  manifest.input_sha256 = sha256_files(c.inputs);
  auto in = open_inputs(c.inputs);
  ProgressSource progress(*in->chain, err, c.quiet);
  const auto a = analyze(progress, config);
  manifest.ingest = in->stats;
  manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const auto json = report_json(a, config, manifest);
  if (!cmd.out_path.empty()) write_text(cmd.out_path, json);
  if (!cmd.dot_path.empty()) write_text(cmd.dot_path, topology_dot(a.report, a.fts));

  if (c.format == "dot") {
    out << topology_dot(a.report, a.fts);
  } else if (cmd.out_path.empty() || c.format == "json") {
    out << json;
  } else if (!c.quiet) {
    for (std::size_t i = 0; i < a.report.protocols.size(); ++i) {
      const auto& p = a.report.protocols[i];
      out << "protocol " << i + 1 << ": port " << p.scada_port << ", " << p.field_devices.size() << " field devices, "
          << p.master_servers.size() << " master servers\n";
    }
    if (config.inference.three_layer) out << "hmi: " << (a.report.hmi ? to_string(a.report.hmi->ip) : "none") << "\n";
    out << "status: " << to_string(a.report.status) << "\n";
  }
  print_warnings(err, in->stats.warnings, c.quiet);
  print_warnings(err, a.report.warnings, c.quiet);
  return a.report.status == ReportStatus::ok ? kExitOk : kExitLowConfidence;
}

// eval -----------------------------------------------------------------------

struct EvalCmd {
  Common common;
  std::string truth_path;
  std::string report_path;
  bool no_hmi = false;
};

int cmd_eval(EvalCmd& cmd, std::ostream& out, std::ostream& err) {
  auto& c = cmd.common;
  if (cmd.report_path.empty() == c.inputs.empty()) throw ValidationError("eval needs either --report or trace inputs");
  const auto truth = load_ground_truth(cmd.truth_path);
  TopologyReport report;
  if (!cmd.report_path.empty()) {
    report = load_report_topology(cmd.report_path);
  } else {
    const auto config = c.config();
    auto in = open_inputs(c.inputs);
    ProgressSource progress(*in->chain, err, c.quiet);
    report = analyze(progress, config).report;
    print_warnings(err, report.warnings, c.quiet);
  }
  const auto s = evaluate(report, truth, !cmd.no_hmi);
  if (c.format == "json") {
    nlohmann::ordered_json j;
    j["claimed"] = s.claimed;
    j["truth"] = s.truth;
    j["true_positives"] = s.true_positives;
    j["role_mismatches"] = s.role_mismatches;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f_score"] = s.f_score;
    out << j.dump(2) << "\n";
  } else {
    out << fmt("%8s %6s %9s %10s %8s %8s\n", "claimed", "truth", "true_pos", "precision", "recall", "f_score");
    out << fmt("%8zu %6zu %9zu %10.4f %8.4f %8.4f\n", s.claimed, s.truth, s.true_positives, s.precision, s.recall, s.f_score);
    if (s.role_mismatches) out << s.role_mismatches << " true positives were assigned the wrong role\n";
  }
  return kExitOk;
}

// stability ------------------------------------------------------------------

struct StabilityCmd {
  Common common;
  std::vector<double> fractions{0.02, 0.06, 0.1, 0.25, 1.0};
};

int cmd_stability(StabilityCmd& cmd, std::ostream& out, std::ostream& err) {
  auto& c = cmd.common;
  const auto config = c.config();
  auto in = open_inputs(c.inputs);
  ProgressSource progress(*in->chain, err, c.quiet);
  const auto records = drain(progress);
  print_warnings(err, in->stats.warnings, c.quiet);
  const auto result = prefix_stability(records, config, cmd.fractions);

  if (c.format == "json") {
    nlohmann::ordered_json j;
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : result.runs) {
      nlohmann::ordered_json e;
      e["fraction"] = r.fraction;
      e["records"] = r.records;
      e["matches_full"] = r.matches_full;
      e["status"] = std::string(to_string(r.report.status));
      e["ports"] = nlohmann::ordered_json::array();
      for (const auto& p : r.report.protocols) e["ports"].push_back(p.scada_port);
      e["field_devices"] = r.report.field_devices().size();
      e["master_servers"] = r.report.master_servers().size();
      j["runs"].push_back(std::move(e));
    }
    j["smallest_stable"] = result.smallest_stable ? nlohmann::ordered_json(*result.smallest_stable) : nlohmann::ordered_json(nullptr);
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << fmt("%9s %10s %6s %4s %4s %8s  %s\n", "fraction", "records", "ports", "FDs", "M", "status", "same as full");
  for (const auto& r : result.runs) {
    std::string ports;
    for (const auto& p : r.report.protocols) ports += (ports.empty() ? "" : ",") + std::to_string(p.scada_port);
    out << fmt("%9.4f %10llu %6s %4zu %4zu %8s  %s\n", r.fraction, static_cast<unsigned long long>(r.records),
               ports.empty() ? "-" : ports.c_str(), r.report.field_devices().size(), r.report.master_servers().size(),
               std::string(to_string(r.report.status)).c_str(), r.matches_full ? "yes" : "no");
  }
  if (result.smallest_stable) out << "smallest stable fraction: " << *result.smallest_stable << "\n";
  else out << "no listed fraction reproduces the full-trace topology\n";
  return kExitOk;
}

// inspect --------------------------------------------------------------------

int cmd_inspect(Common& c, std::ostream& out, std::ostream& err) {
  auto filter = c.filter_config(true);
  auto in = open_inputs(c.inputs);
  ProgressSource progress(*in->chain, err, c.quiet);
  std::optional<FilteredSource> filtered;
  PacketSource* feed = &progress;
  if (filter) {
    filtered.emplace(progress, *filter);
    feed = &*filtered;
  }
  std::uint64_t kept = 0, late = 0, bytes = 0;
  Micros first = 0, last = 0, prev = INT64_MIN;
  std::map<Transport, std::uint64_t> transports;
  std::set<Ipv4> ips;
  PacketRecord r;
  while (feed->next(r)) {
    if (kept == 0) first = last = r.ts;
    first = std::min(first, r.ts);
    last = std::max(last, r.ts);
    if (r.ts < prev) ++late;
    prev = r.ts;
    ++kept;
    bytes += r.size;
    ++transports[r.transport];
    ips.insert(r.src_ip);
    ips.insert(r.dst_ip);
  }
  const auto& s = in->stats;
  const FilterStats fs = filtered ? filtered->stats() : FilterStats{kept, 0, 0};

  if (c.format == "json") {
    nlohmann::ordered_json j;
    j["decoded"] = s.records;
    j["skipped_non_ip"] = s.skipped_non_ip;
    j["skipped_malformed"] = s.skipped_malformed;
    j["skipped_fragments"] = s.skipped_fragments;
    j["truncated"] = s.truncated;
    j["filter_enabled"] = filter.has_value();
    j["dropped_service"] = fs.dropped_service;
    j["dropped_transport"] = fs.dropped_transport;
    j["kept"] = kept;
    j["bytes"] = bytes;
    j["out_of_order"] = late;
    j["distinct_ips"] = ips.size();
    j["duration_seconds"] = kept ? to_seconds(last - first) : 0.0;
    for (const auto& [t, n] : transports) j["transport"][std::string(to_string(t))] = n;
    j["warnings"] = s.warnings;
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << "decoded records     " << s.records << "\n";
  out << "skipped non-IPv4    " << s.skipped_non_ip << "\n";
  out << "skipped malformed   " << s.skipped_malformed << "\n";
  out << "skipped fragments   " << s.skipped_fragments << "\n";
  out << "truncated input     " << (s.truncated ? "yes" : "no") << "\n";
  out << "filter              " << (filter ? "on" : "off") << "\n";
  out << "dropped by port     " << fs.dropped_service << "\n";
  out << "dropped non-TCP     " << fs.dropped_transport << "\n";
  out << "kept records        " << kept << " (" << bytes << " bytes)\n";
  for (const auto& [t, n] : transports) out << "  " << to_string(t) << std::string(18 - to_string(t).size(), ' ') << n << "\n";
  out << "out-of-order        " << late << "\n";
  out << "distinct addresses  " << ips.size() << "\n";
  out << fmt("time span           %.6f s\n", kept ? to_seconds(last - first) : 0.0);
  print_warnings(err, s.warnings, c.quiet);
  return kExitOk;
}

// synth ----------------------------------------------------------------------

struct SynthCmd {
  std::string scenario_path;
  std::string preset;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out_path;
  std::string pcap_path;
  std::string truth_path;
  std::string dump_path;
  bool quiet = false;
};

ScenarioConfig preset_named(const std::string& name, std::uint64_t seed) {
  if (name == "dataset1") return presets::dataset1_like(seed);
  if (name == "dataset2") return presets::dataset2_like(seed);
  if (name == "month") return presets::month_scale(seed);
  if (name == "office") return presets::office(seed);
  throw ValidationError("unknown preset \"" + name + "\" (dataset1, dataset2, month, office)");
}

int cmd_synth(SynthCmd& cmd, std::ostream& out, std::ostream&) {
  if (cmd.scenario_path.empty() == cmd.preset.empty()) throw ValidationError("synth needs exactly one of --scenario or --preset");
  auto scenario = cmd.scenario_path.empty() ? preset_named(cmd.preset, 1) : load_scenario(cmd.scenario_path);
  if (*cmd.seed_opt) scenario.seed = cmd.seed;
  scenario.validate();
  if (!cmd.dump_path.empty()) write_text(cmd.dump_path, scenario_json(scenario));
  if (cmd.out_path.empty() && cmd.pcap_path.empty() && cmd.truth_path.empty()) {
    if (cmd.dump_path.empty()) throw ValidationError("synth needs --out, --pcap, --truth or --dump-scenario");
    return kExitOk;
  }
  const auto trace = generate(scenario);
  if (!cmd.out_path.empty()) write_records(trace.records, cmd.out_path);
  if (!cmd.pcap_path.empty()) write_pcap(trace.records, cmd.pcap_path);
  if (!cmd.truth_path.empty()) save_ground_truth(trace.truth, cmd.truth_path);
  if (!cmd.quiet) {
    std::map<DeviceRole, std::size_t> roles;
    for (const auto& [ip, label] : trace.truth.labels) ++roles[label.role];
    out << scenario.name << ": " << trace.records.size() << " records, " << trace.truth.labels.size() << " devices ("
        << roles[DeviceRole::field_device] << " field devices, " << roles[DeviceRole::master] << " master, "
        << roles[DeviceRole::hmi] << " hmi, " << roles[DeviceRole::peripheral] << " other)\n";
  }
  return kExitOk;
}

}  // namespace

unsigned default_threads() {
  const unsigned n = std::max(1u, std::thread::hardware_concurrency());
  const auto cap = thread_cap();
  return cap ? std::min(n, *cap) : n;
}

std::string sha256_files(const std::vector<std::string>& paths) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 initialisation failed");
  std::vector<char> buf(1 << 20);
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt("%02x", md[i]);
  return hex;
}

TopologyReport load_report_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    auto ip_set = [](const nlohmann::json& list) {
      std::set<Ipv4> out;
      for (const auto& v : list) {
        const auto ip = parse_ipv4(v.get<std::string>());
        if (!ip) throw FormatError("report: bad address " + v.get<std::string>());
        out.insert(*ip);
      }
      return out;
    };
    TopologyReport r;
    for (const auto& p : doc.at("protocols")) {
      ProtocolEntry e;
      e.scada_port = p.at("scada_port").get<Port>();
      e.field_devices = ip_set(p.at("field_devices"));
      e.master_servers = ip_set(p.at("master_servers"));
      r.protocols.push_back(std::move(e));
    }
    if (doc.contains("hmi") && doc.at("hmi").is_string()) {
      const auto ip = parse_ipv4(doc.at("hmi").get<std::string>());
      if (!ip) throw FormatError("report: bad hmi address");
      r.hmi = HmiInference{*ip, 0, false};
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("report " + path + ": " + e.what());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Passive SCADA device and topology inference from packet metadata", "scadascope"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SynthCmd synth;
  auto* s = app.add_subcommand("synth", "generate a labeled synthetic trace");
  s->add_option("--scenario", synth.scenario_path, "scenario JSON file");
  s->add_option("--preset", synth.preset, "built-in scenario: dataset1, dataset2, month, office");
  synth.seed_opt = s->add_option("--seed", synth.seed, "override the scenario seed");
  s->add_option("--out", synth.out_path, "JSON-lines record output");
  s->add_option("--pcap", synth.pcap_path, "pcap output");
  s->add_option("--truth", synth.truth_path, "ground-truth JSON output");
  s->add_option("--dump-scenario", synth.dump_path, "write the resolved scenario JSON");
  s->add_flag("-q,--quiet", synth.quiet, "no summary line");

  RankCmd rank;
  auto* r = app.add_subcommand("rank", "rank fts and print the top entries");
  rank.common.add_ingest(r);
  rank.common.add_segmentation(r);
  r->add_option("--top", rank.top, "rows to print and write (0 = all, default 20)");
  r->add_option("--out", rank.out_path, "ranking CSV output");
  r->add_option("--format", rank.common.format, "stdout format: table or csv")->check(CLI::IsMember({"table", "csv"}));

  AnalyzeCmd analyze_cmd;
  auto* a = app.add_subcommand("analyze", "infer SCADA ports, field devices, masters and the HMI");
  analyze_cmd.common.add_ingest(a);
  analyze_cmd.common.add_segmentation(a);
  analyze_cmd.common.add_inference(a);
  a->add_option("--out", analyze_cmd.out_path, "report JSON output");
  a->add_option("--dot", analyze_cmd.dot_path, "Graphviz topology output");
  a->add_option("--format", analyze_cmd.common.format, "stdout format: json or dot")->check(CLI::IsMember({"json", "dot"}));

  EvalCmd eval;
  auto* e = app.add_subcommand("eval", "score a report or a fresh analysis against ground truth");
  eval.common.add_ingest(e, false);
  eval.common.add_segmentation(e);
  eval.common.add_inference(e);
  e->add_option("--truth", eval.truth_path, "ground-truth JSON")->required();
  e->add_option("--report", eval.report_path, "report JSON from analyze");
  e->add_flag("--no-hmi", eval.no_hmi, "leave HMI labels and the inferred HMI out of the score");
  e->add_option("--format", eval.common.format, "stdout format: table or json")->check(CLI::IsMember({"table", "json"}));

  StabilityCmd stab;
  auto* st = app.add_subcommand("stability", "rerun the analysis on time prefixes of the trace");
  stab.common.add_ingest(st);
  stab.common.add_segmentation(st);
  stab.common.add_inference(st);
  st->add_option("--fractions", stab.fractions, "prefix fractions in (0, 1], comma separated")->delimiter(',');
  st->add_option("--format", stab.common.format, "stdout format: table or json")->check(CLI::IsMember({"table", "json"}));

  Common inspect;
  auto* in = app.add_subcommand("inspect", "ingest statistics; the default service-port filter is on");
  inspect.add_ingest(in);
  in->add_option("--format", inspect.format, "stdout format: table or json")->check(CLI::IsMember({"table", "json"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out, err);
    if (r->parsed()) return cmd_rank(rank, out, err);
    if (a->parsed()) return cmd_analyze(analyze_cmd, out, err);
    if (e->parsed()) return cmd_eval(eval, out, err);
    if (st->parsed()) return cmd_stability(stab, out, err);
    if (in->parsed()) return cmd_inspect(inspect, out, err);
  } catch (const OrderError& ex) {
    err << "error: " << ex.what() << " (use --force-sort for unordered input)\n";
    return kExitInput;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace scadascope::cli
