#include "cute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cute/path_analysis.hpp"

namespace cute {

double fairness_index(std::span<const double> throughputs) {
  if (throughputs.empty())
    throw std::invalid_argument("fairness needs at least one user");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double t : throughputs) {
    if (t < 0.0 || !std::isfinite(t))
      throw std::invalid_argument("throughputs must be nonnegative");
    sum += t;
    sum_sq += t * t;
  }
  if (sum_sq == 0.0)
    throw std::domain_error("fairness is undefined when every throughput is 0");
  return sum * sum / (static_cast<double>(throughputs.size()) * sum_sq);
}

SummaryMetrics summarize(const RunStats &stats) {
  if (!(stats.interval > 0.0))
    throw std::invalid_argument("measured interval must be positive");
  SummaryMetrics m;
  double rtt_sum = 0.0;
  std::uint64_t rtt_count = 0;
  std::uint64_t drops = 0;
  std::uint64_t sent = 0;
  for (const auto &c : stats.connections) {
    double t = static_cast<double>(c.delivered) / stats.interval;
    m.throughputs.push_back(t);
    m.total_throughput += t;
    rtt_sum += c.rtt_sum;
    rtt_count += c.rtt_count;
    drops += c.dropped;
    sent += c.sent;
  }
  if (sent > 0)
    m.loss_probability =
        std::min(1.0, static_cast<double>(drops) / static_cast<double>(sent));
  if (m.total_throughput > 0.0) {
    m.fairness = fairness_index(m.throughputs);
    if (rtt_count > 0) {
      m.mean_response = rtt_sum / static_cast<double>(rtt_count);
      m.power = power(m.total_throughput, *m.mean_response);
    }
  }
  return m;
}

std::uint32_t max_supportable_connections(std::uint32_t buffer_capacity,
                                          std::uint32_t ws_min) {
  if (buffer_capacity < 1 || ws_min < 1)
    throw std::invalid_argument("buffer capacity and ws_min must be >= 1");
  return (buffer_capacity - 1) / ws_min;
}

} // namespace cute
