#pragma once

// Small builders shared by the unit tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cogsec/behavior.hpp"
#include "cogsec/csm.hpp"
#include "cogsec/padl.hpp"
#include "cogsec/policy.hpp"
#include "cogsec/types.hpp"

namespace fixtures {

inline cogsec::PadlFingerprint padl(int index, const std::string& chipset = "ath9k-ar9380") {
  char mac[32];
  std::snprintf(mac, sizeof mac, "02:00:00:00:%02x:%02x", (index >> 8) & 0xFF, index & 0xFF);
  return cogsec::PadlFingerprint({
      {cogsec::padl_attr::kHardwareAddress, std::string(mac)},
      {cogsec::padl_attr::kChipset, chipset},
      {cogsec::padl_attr::kCarrierOffsetPpm, 0.25 * index},
  });
}

inline cogsec::OperationalMatrix om(std::string issuer = "auto-policy", cogsec::Timestamp at = 0) {
  cogsec::GeneratorConfig g;
  cogsec::ActivityEncoder enc(g);
  return cogsec::conservative_om(g.layer_spec(), g, enc, std::move(issuer), at);
}

inline cogsec::BehaviorPattern pattern(double v, cogsec::Timestamp at, std::size_t dim = 8) {
  return {std::vector<double>(dim, v), at};
}

inline cogsec::NodeActivity activity(const cogsec::NodeId& id, cogsec::Timestamp start, double scale = 1.0,
                                     cogsec::Timestamp window_ms = 60000) {
  cogsec::NodeActivity a;
  a.node_id = id;
  a.window_start = start;
  a.window_end = start + window_ms;
  a.ap_id = "ap-0";
  auto n = [&](double v) { return static_cast<std::uint64_t>(v * scale); };
  a.usage(cogsec::Service::DataServer) = {n(1.2e6), n(6e6), n(15)};
  a.usage(cogsec::Service::Internet) = {n(0.8e6), n(5e6), n(12)};
  a.failed_auth_count = n(1);
  return a;
}

inline cogsec::NodeEvent event(const cogsec::PadlFingerprint& p, cogsec::Timestamp start, double scale = 1.0) {
  cogsec::NodeEvent e;
  e.padl = p;
  e.activity = activity(p.digest(), start, scale);
  e.received_at = e.activity.window_end;
  return e;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("cogsec-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
