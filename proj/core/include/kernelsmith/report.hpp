#ifndef KERNELSMITH_REPORT_HPP
#define KERNELSMITH_REPORT_HPP

#include <string>
#include <vector>

#include "kernelsmith/types.hpp"

namespace kernelsmith {

struct CheckRecord {
  std::string id;
  std::string grid;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline CheckRecord make_check(std::string id, std::string grid, double residual,
                              double threshold) {
  return CheckRecord{std::move(id), std::move(grid), residual, threshold,
                     residual <= threshold};
}

struct RunReport {
  std::string version = kVersion;
  std::string domain_hash;
  std::vector<CheckRecord> checks;
  double timing_ms = -1.0;  // emitted only when >= 0

  bool overall() const;
  void add(CheckRecord record);
  std::string to_json() const;
};

// FNV-1a hash of the canonical domain spec text, as fixed-width hex.
std::string spec_hash(const std::string& canonical_text);

}  // namespace kernelsmith

#endif
