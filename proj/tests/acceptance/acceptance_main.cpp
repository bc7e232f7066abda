// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "oracle.hpp"
#include "scadascope/cli.hpp"
#include "scadascope/evaluation.hpp"
#include "scadascope/features.hpp"
#include "scadascope/pipeline.hpp"
#include "scadascope/records.hpp"
#include "scadascope/rng.hpp"
#include "scadascope/synth.hpp"

using namespace scadascope;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Workspace {
 public:
  Workspace() {
    path_ = std::filesystem::temp_directory_path() / ("scadascope_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Published normalized feature rows (pR, dR, cR, uR, sR) and products.
struct PublishedRow {
  double pr, dr, cr, ur, sr, f;
  std::uint64_t seg_size;
};

const PublishedRow kTable1[] = {
    {0.3801, 0.4200, 0.5175, 0.3636, 0.2246, 6.7470e-3, 340}, {0.3198, 0.4582, 0.5175, 0.3636, 0.2226, 6.1358e-3, 337},
    {0.3117, 0.4659, 0.5175, 0.3636, 0.2193, 5.9924e-3, 332}, {0.4613, 0.3320, 0.5175, 0.3636, 0.1955, 5.6342e-3, 296},
    {0.4070, 0.4200, 0.5175, 0.3636, 0.1486, 4.7806e-3, 225},
};

const PublishedRow kTable2[] = {
    {0.5872, 0.6573, 1.0000, 0.2917, 0.4531, 5.1003e-2, 686}, {0.5872, 0.3403, 1.0000, 0.2917, 0.4531, 2.6417e-2, 686},
    {0.5872, 0.6573, 1.0000, 0.2917, 0.1902, 2.1412e-2, 288}, {0.6158, 0.9999, 0.2604, 0.2500, 0.4531, 1.8181e-2, 686},
    {0.4557, 0.6502, 0.2500, 0.2917, 0.7173, 1.5498e-2, 1086}, {0.3117, 0.7441, 0.1847, 0.1667, 1.0000, 0.7140e-2, 1514},
};

Outcome table1_products() {
  double worst = 0;
  for (const auto& r : kTable1) {
    const Features f{r.pr, r.dr, r.cr, r.ur, r.sr};
    worst = std::max(worst, std::abs(f.product() - r.f) / r.f);
  }
  return {worst <= 1e-3, fmt("5 rows, worst relative error %.2e", worst)};
}

Outcome size_ratios() {
  double worst = 0;
  std::size_t rows = 0;
  for (const auto* table : {static_cast<const PublishedRow*>(kTable1), static_cast<const PublishedRow*>(kTable2)}) {
    const std::size_t n = table == kTable1 ? std::size(kTable1) : std::size(kTable2);
    for (std::size_t i = 0; i < n; ++i) {
      const double sr = segment_size_ratio(FtKey{{}, 0, {}, 0, table[i].seg_size}, 1514);
      worst = std::max(worst, std::abs(sr - table[i].sr));
      ++rows;
    }
  }
  return {worst <= 5e-4, fmt("%zu rows, worst absolute error %.2e", rows, worst)};
}

Outcome periodicity_anchor() {
  // Alternating mean +- d gives population variance d^2.
  const double d = std::sqrt(1.48);
  FtStats ft;
  Micros t = 0;
  ft.start_times.push_back(t);
  for (int i = 0; i < 2000; ++i) {
    const Micros v = from_seconds(8.75 + (i % 2 ? d : -d));
    ft.iat.push_back(v);
    ft.start_times.push_back(t += v);
  }
  ft.n = ft.start_times.size();
  const double pr = periodicity_ratio(ft);
  return {std::abs(pr - 5.912) <= 1e-3, fmt("pR = %.6f", pr)};
}

std::string without_duration(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  j["manifest"].erase("duration_seconds");
  return j.dump();
}

Outcome dataset1_end_to_end(const Workspace& ws) {
  auto r = cli_run({"synth", "--preset", "dataset1", "--out", ws.file("d1.jsonl"), "--truth", ws.file("d1_truth.json"), "-q"});
  if (r.code != 0) return {false, "synth failed: " + r.err};
  const auto truth = load_ground_truth(ws.file("d1_truth.json"));

  const auto started = std::chrono::steady_clock::now();
  r = cli_run({"analyze", ws.file("d1.jsonl"), "--num-protocols", "1", "--out", ws.file("d1_report.json"), "-q"});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (r.code != 0) return {false, "analyze exited " + std::to_string(r.code) + ": " + r.err};
  const auto two_layer = cli::load_report_topology(ws.file("d1_report.json"));

  r = cli_run({"analyze", ws.file("d1.jsonl"), "--num-protocols", "1", "--three-layer", "--out", ws.file("d1_report3.json"), "-q"});
  if (r.code != 0) return {false, "three-layer analyze exited " + std::to_string(r.code)};
  const auto three = cli::load_report_topology(ws.file("d1_report3.json"));

  const auto report = nlohmann::json::parse(std::ifstream(ws.file("d1_report.json")));
  const std::uint64_t records = report["metrics"]["input_records"];
  const auto s2 = evaluate(two_layer, truth, false);
  const auto s3 = evaluate(three, truth, true);
  const bool port_ok = two_layer.protocols.size() == 1 && two_layer.protocols[0].scada_port == 20000;
  const bool hmi_ok = three.hmi && three.hmi->ip == kHmiIp;
  const bool pass = port_ok && two_layer.field_devices().size() == 49 && two_layer.master_servers().size() == 1 &&
                    s2.f_score == 1.0 && hmi_ok && s3.f_score == 1.0 && seconds < 60;
  return {pass, fmt("%llu records, port %u, %zu FDs, %zu masters, F(no HMI) = %.4f, HMI %s, F(three-layer) = %.4f, analyze %.1f s",
                    static_cast<unsigned long long>(records), port_ok ? 20000u : 0u, two_layer.field_devices().size(),
                    two_layer.master_servers().size(), s2.f_score, hmi_ok ? "correct" : "wrong", s3.f_score, seconds)};
}

Outcome dataset2_end_to_end() {
  const auto trace = generate(presets::dataset2_like(1));
  AnalysisConfig cfg;
  cfg.inference.num_scada_protocols = 2;
  const auto a = analyze(trace.records, cfg);
  const auto& p = a.report.protocols;
  const auto s = evaluate(a.report, trace.truth, false);
  const bool pass = p.size() == 2 && p[0].scada_port == 2404 && p[1].scada_port == 5450 && p[0].field_devices.size() == 22 &&
                    p[1].field_devices.size() == 4 && p[0].master_servers == std::set<Ipv4>{kMasterIp} &&
                    p[1].master_servers == std::set<Ipv4>{kMasterIp} && s.f_score == 1.0;
  std::string ports;
  for (const auto& e : p) ports += (ports.empty() ? "" : ",") + std::to_string(e.scada_port) + "/" + std::to_string(e.field_devices.size());
  return {pass, fmt("%zu records, port/FDs %s, F = %.4f", trace.records.size(), ports.c_str(), s.f_score)};
}

bool rel_close(double a, double b, double tol) { return a == b || std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

Outcome oracle_equivalence() {
  const Micros t_comm = kMicrosPerSecond;
  std::size_t max_packets = 0, segments = 0, fts = 0, mismatched = 0;
  std::string first_problem;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto records = generate(oracle::random_small_scenario(seed)).records;
    oracle::add_random_packets(records, seed, 400, t_comm);
    max_packets = std::max(max_packets, records.size());

    const auto mine = segment_stream(records, t_comm);
    const auto ref = oracle::segments(records, t_comm);
    bool ok = mine.size() == ref.size();
    for (std::size_t i = 0; ok && i < ref.size(); ++i) {
      ok = mine[i].start == ref[i].start && mine[i].end == ref[i].end && mine[i].seg_size == ref[i].bytes &&
           mine[i].packet_count == ref[i].packets && mine[i].initiator == Endpoint{ref[i].src_ip, ref[i].src_port};
    }
    segments += ref.size();

    const auto table = build_ft_table(records, t_comm);
    const auto ref_fts = oracle::fts(ref);
    const auto ref_features = oracle::features(ref_fts);
    ok = ok && table.size() == ref_fts.size();
    const auto idx = PortUsageIndex::build(table);
    std::uint64_t max_seg = 0;
    for (const auto& ft : table) max_seg = std::max(max_seg, ft.key.seg_size);
    for (const auto& ft : table) {
      if (!ok) break;
      const auto& k = ft.key;
      const oracle::FtTuple key{k.src_ip.value, k.src_port, k.dst_ip.value, k.dst_port, k.seg_size};
      auto it = ref_fts.find(key);
      if (it == ref_fts.end()) {
        ok = false;
        break;
      }
      const auto& want = ref_features.at(key);
      const auto got = raw_features(ft, idx, max_seg);
      ok = ft.n == it->second.starts.size() && ft.start_times == it->second.starts && ft.iat == it->second.iat &&
           rel_close(got.periodicity, want.pr, 1e-12) && rel_close(got.durability, want.dr, 1e-12) &&
           got.complexity_gap == want.cr && got.popularity == want.ur && got.size == want.sr;
    }
    fts += table.size();
    if (!ok) {
      ++mismatched;
      if (first_problem.empty()) first_problem = ", first mismatch at seed " + std::to_string(seed);
    }
  }
  const bool pass = mismatched == 0 && max_packets <= 10000;
  return {pass, fmt("100 scenarios, %zu segments, %zu fts, largest %zu packets, %zu mismatched%s", segments, fts, max_packets, mismatched,
                    first_problem.c_str())};
}

ScenarioConfig invariance_scenario(std::uint64_t seed) {
  auto c = oracle::random_small_scenario(1000 + seed);
  c.layers = 3;
  try {
    c.validate();
  } catch (const ValidationError&) {
    c.layers = 2;
  }
  return c;
}

/// Scores of `scaled`, listed in the order of `base` (matched through `map_key`),
/// must not increase beyond `tol`; the ranking is then order-preserving except
/// among entries whose base scores already tie within `tol`.
bool order_preserved(const Ranking& base, const Ranking& scaled, const std::function<FtKey(const FtKey&)>& map_key, double tol) {
  if (base.size() != scaled.size()) return false;
  std::map<FtKey, double> score;
  for (const auto& r : scaled) score[r.key] = r.score;
  double prev = INFINITY;
  double prev_base = INFINITY;
  for (const auto& r : base) {
    auto it = score.find(map_key(r.key));
    if (it == score.end()) return false;
    const bool base_tie = rel_close(r.score, prev_base, tol);
    if (!base_tie && it->second > prev * (1 + tol)) return false;
    prev = it->second;
    prev_base = r.score;
  }
  return true;
}

std::vector<PacketRecord> scale_time(const std::vector<PacketRecord>& in, Micros c) {
  auto out = in;
  for (auto& r : out) r.ts *= c;
  return out;
}

Outcome invariance_suite() {
  int passed = 0;
  int hmi_cases = 0;
  std::string failures;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = invariance_scenario(seed);
    const auto trace = generate(cfg);
    AnalysisConfig base_cfg;
    base_cfg.inference.three_layer = true;
    const auto base = analyze(trace.records, base_cfg);
    bool ok = true;
    std::string why;

    // Time rescaling, with t_comm and the periodicity cap (1/s) rescaled too.
    for (Micros c : {2, 3}) {
      auto scaled_cfg = base_cfg;
      scaled_cfg.t_comm *= c;
      scaled_cfg.reorder_window *= c;
      scaled_cfg.features.periodicity_cap /= static_cast<double>(c);
      const auto scaled = analyze(scale_time(trace.records, c), scaled_cfg);
      bool same = scaled.report.same_topology(base.report);
      if (c == 2) {
        // Scaling by two is exact in binary floating point: identical ranking.
        same = same && scaled.ranking.size() == base.ranking.size();
        for (std::size_t i = 0; same && i < base.ranking.size(); ++i) {
          same = scaled.ranking[i].key == base.ranking[i].key && scaled.ranking[i].score == base.ranking[i].score;
        }
      } else {
        same = same && order_preserved(base.ranking, scaled.ranking, [](const FtKey& k) { return k; }, 1e-9);
      }
      if (!same) {
        ok = false;
        why += " time x" + std::to_string(c);
      }
    }

    // IP relabeling through a random bijection onto 172.16.0.0/12.
    std::set<Ipv4> ips;
    for (const auto& r : trace.records) {
      ips.insert(r.src_ip);
      ips.insert(r.dst_ip);
    }
    Rng rng(seed, 77);
    std::map<Ipv4, Ipv4> relabel;
    std::set<Ipv4> used;
    for (auto ip : ips) {
      Ipv4 to;
      do to = Ipv4{0xac100000u | static_cast<std::uint32_t>(rng.below(1u << 20))};
      while (!used.insert(to).second);
      relabel[ip] = to;
    }
    auto relabeled = trace.records;
    for (auto& r : relabeled) {
      r.src_ip = relabel.at(r.src_ip);
      r.dst_ip = relabel.at(r.dst_ip);
    }
    const auto moved = analyze(relabeled, base_cfg);
    auto map_key = [&](const FtKey& k) { return FtKey{relabel.at(k.src_ip), k.src_port, relabel.at(k.dst_ip), k.dst_port, k.seg_size}; };
    bool same = moved.ranking.size() == base.ranking.size();
    // Equal order up to exact (score, pR_n) ties, whose key tie-break legitimately moves.
    for (std::size_t i = 0; same && i < base.ranking.size();) {
      std::size_t j = i;
      std::set<FtKey> want, got;
      while (j < base.ranking.size() && base.ranking[j].score == base.ranking[i].score &&
             base.ranking[j].normalized.periodicity == base.ranking[i].normalized.periodicity) {
        want.insert(map_key(base.ranking[j].key));
        got.insert(moved.ranking[j].key);
        same = same && moved.ranking[j].score == base.ranking[j].score;
        ++j;
      }
      same = same && want == got;
      i = j;
    }
    auto mapped = base.report;
    for (auto& p : mapped.protocols) {
      std::set<Ipv4> fds, ms;
      for (auto ip : p.field_devices) fds.insert(relabel.at(ip));
      for (auto ip : p.master_servers) ms.insert(relabel.at(ip));
      p.field_devices = fds;
      p.master_servers = ms;
    }
    if (mapped.hmi) mapped.hmi->ip = relabel.at(mapped.hmi->ip);
    same = same && moved.report.same_topology(mapped);
    if (!same) {
      ok = false;
      why += " relabel";
    }

    // Uniform SegSize scaling leaves the HMI argmax in place.
    const auto masters = base.report.master_servers();
    if (base.report.hmi) {
      ++hmi_cases;
      const auto h = infer_hmi(masters, base.fts);
      for (std::uint64_t c : {3ULL, 7ULL}) {
        auto table = base.fts;
        for (auto& ft : table) ft.key.seg_size *= c;
        if (infer_hmi(masters, table).ip != h.ip) {
          ok = false;
          why += " segsize x" + std::to_string(c);
        }
      }
    }

    if (ok) ++passed;
    else failures += " seed " + std::to_string(seed) + ":" + why + ";";
  }
  return {passed == 20, fmt("%d/20 seeds (HMI checked on %d)%s", passed, hmi_cases, failures.c_str())};
}

Outcome month_stability() {
  const auto trace = generate(presets::month_scale(1));
  const auto r = prefix_stability(trace.records, AnalysisConfig{}, {0.02, 0.04, 0.06, 0.08, 0.1, 0.25, 0.5, 1.0});
  if (!r.smallest_stable) return {false, "no stable fraction"};
  const PrefixRun* at = nullptr;
  for (const auto& run : r.runs) {
    if (run.fraction == *r.smallest_stable) at = &run;
  }
  const bool exact = at && at->report.same_topology(r.full);
  const bool pass = *r.smallest_stable <= 0.1 && exact;
  std::size_t fds = r.full.field_devices().size();
  return {pass, fmt("%zu records over 30 days, full topology %zu FDs, smallest stable fraction %.2f, topology %s", trace.records.size(),
                    fds, *r.smallest_stable, exact ? "identical" : "different")};
}

Outcome shard_determinism(const Workspace& ws) {
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "1", "2", "8"}) {
    const auto r = cli_run({"analyze", ws.file("d1.jsonl"), "--three-layer", "--threads", threads, "-q"});
    if (r.code != 0) return {false, std::string("analyze --threads ") + threads + " exited " + std::to_string(r.code)};
    outputs.push_back(without_duration(r.out));
  }
  const bool pass = std::all_of(outputs.begin(), outputs.end(), [&](const std::string& o) { return o == outputs.front(); });
  return {pass, fmt("4 runs (threads 1, 1, 2, 8), %zu bytes each, %s", outputs.front().size(), pass ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  // The thread cap would make the shard comparison vacuous.
  ::unsetenv("SCADASCOPE_THREADS");
  Workspace ws;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "Table 1 products from normalized features", table1_products},
      {2, "Table 1/2 segment size ratios", size_ratios},
      {3, "periodicity anchor (mean 8.75 s, variance 1.48 s^2)", periodicity_anchor},
      {4, "dataset1 analog end to end", [&] { return dataset1_end_to_end(ws); }},
      {5, "dataset2 analog end to end", dataset2_end_to_end},
      {6, "oracle equivalence on 100 random scenarios", oracle_equivalence},
      {7, "invariance suite over 20 seeds", invariance_suite},
      {8, "prefix stability on a 30-day trace", month_stability},
      {9, "report determinism across shard counts", [&] { return shard_determinism(ws); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " (" << fmt("%.1f s", seconds)
              << ")" << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
