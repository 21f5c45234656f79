#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cute {

/// Single-class closed network of FCFS exponential servers visited once per
/// cycle, in order. Queue count is N + 1.
class ClosedNetworkModel {
public:
  explicit ClosedNetworkModel(std::vector<double> service_times);

  /// `queues` identical servers with mean service time `service_time`.
  static ClosedNetworkModel identical(std::size_t queues,
                                      double service_time = 1.0);

  std::span<const double> service_times() const { return service_times_; }
  std::size_t queue_count() const { return service_times_.size(); }
  double total_service() const;
  double bottleneck_service() const;

private:
  std::vector<double> service_times_;
};

struct MvaResult {
  double throughput = 0;
  double response = 0;
};

struct PowerCurvePoint {
  std::uint32_t customers = 0;
  double throughput = 0;
  double response = 0;
  double power = 0;
};

/// Exact mean value analysis at population `customers`.
MvaResult mva_closed(const ClosedNetworkModel &model, std::uint32_t customers);

/// Power curve for populations 1..c_max, computed in a single MVA pass.
std::vector<PowerCurvePoint> power_curve(const ClosedNetworkModel &model,
                                         std::uint32_t c_max);

double power(double throughput, double response);

/// Population in [1, c_max] that maximizes power; smallest wins on ties.
std::uint32_t optimal_population(const ClosedNetworkModel &model,
                                 std::uint32_t c_max);

enum class Duplex { Full, Half };

struct QueueCountSpec {
  std::uint32_t hops = 1;
  Duplex duplex = Duplex::Full;
  bool cpu_queueing = true;
  bool acks_present = true;
};

/// Queues in an h-hop path: h forward transmit, h reverse transmit and h+1
/// receive queues, minus whatever the spec lets us drop.
std::uint32_t queue_count(const QueueCountSpec &spec);

/// Default pipe size for a terrestrial path: three packets per hop.
std::uint32_t terrestrial_pipe_size(std::uint32_t hops);

/// Pipe size for long-delay paths: min path delay over bottleneck service,
/// rounded half up, at least 1.
std::uint32_t satellite_pipe_size(double min_path_delay,
                                  double bottleneck_service_time);

} // namespace cute
