#include "kernelsmith/report.hpp"

#include <nlohmann/json.hpp>

namespace kernelsmith {

bool RunReport::overall() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void RunReport::add(CheckRecord record) {
  for (const auto& c : checks)
    if (c.id == record.id)
      throw Error("duplicate check id in report: " + record.id);
  checks.push_back(std::move(record));
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["domain_hash"] = domain_hash;
  j["pass"] = overall();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"id", c.id},
                           {"grid", c.grid},
                           {"max_residual", c.residual},
                           {"threshold", c.threshold},
                           {"pass", c.pass}});
  }
  if (timing_ms >= 0.0) j["timing_ms"] = timing_ms;
  return j.dump(2);
}

std::string spec_hash(const std::string& canonical_text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace kernelsmith
