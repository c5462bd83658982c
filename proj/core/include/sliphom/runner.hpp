#pragma once

#include <cstdint>
#include <string>

#include "sliphom/config.hpp"

namespace sliphom {

inline constexpr const char* kToolName = "sliphom";
inline constexpr const char* kToolVersion = "0.1.0";

// Each command writes its result files plus manifest.json into out_dir and
// returns a process exit code. `command` is echoed into the manifest;
// `quiet` suppresses the one-line progress summary.
int cmd_static(const RunConfig& cfg, const std::string& out_dir, uint64_t seed,
               const std::string& command, bool quiet = false);
int cmd_evolve(const RunConfig& cfg, const std::string& out_dir, uint64_t seed,
               const std::string& command, bool quiet = false);
int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, uint64_t seed,
              const std::string& command, bool quiet = false);

// Deterministic full-precision number formatting shared by all writers.
std::string format_double(double v);

}  // namespace sliphom
