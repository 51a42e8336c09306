#pragma once

#include "svaug/harness.hpp"

namespace svaug::detail {

inline constexpr const char* kPairingUnit = "(task, round, seed)";

// Rebuilds report.rows and report.comparisons from report.rounds, using the
// (normalized) config for iteration order.
void finalize_report(ExperimentReport& report);

}  // namespace svaug::detail
