#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cute/netsim.hpp"

namespace cute {

struct SummaryMetrics {
  std::vector<double> throughputs;
  double total_throughput = 0.0;
  /// Unavailable when no packet was acknowledged in the interval.
  std::optional<double> mean_response;
  std::optional<double> power;
  std::optional<double> fairness;
  double loss_probability = 0.0;
};

/// Jain's index (sum T)^2 / (n sum T^2). Throws when every entry is zero.
double fairness_index(std::span<const double> throughputs);

SummaryMetrics summarize(const RunStats &stats);

/// Largest n with n * ws_min strictly below the bottleneck buffer capacity.
std::uint32_t max_supportable_connections(std::uint32_t buffer_capacity,
                                          std::uint32_t ws_min);

} // namespace cute
