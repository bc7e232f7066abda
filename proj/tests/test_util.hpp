#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "scadascope/segmentation.hpp"
#include "scadascope/types.hpp"

namespace testutil {

using namespace scadascope;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("scadascope_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline Ipv4 ip(const char* text) { return *parse_ipv4(text); }

inline PacketRecord rec(Micros ts, const char* src, Port sport, const char* dst, Port dport, std::uint32_t size = 100,
                        Transport t = Transport::tcp) {
  return PacketRecord{ts, ip(src), sport, ip(dst), dport, t, size};
}

inline Micros sec(double s) { return from_seconds(s); }

/// FtStats with start times 0, iat[0], iat[0] + iat[1], ...
inline FtStats ft_with_iat(const std::vector<Micros>& iat, FtKey key = {}) {
  FtStats ft;
  ft.key = key;
  Micros t = 0;
  ft.start_times.push_back(t);
  for (auto v : iat) ft.start_times.push_back(t += v);
  ft.iat = iat;
  ft.n = ft.start_times.size();
  return ft;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace testutil
