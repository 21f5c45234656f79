#include "cute/path_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cute {

ClosedNetworkModel::ClosedNetworkModel(std::vector<double> service_times)
    : service_times_(std::move(service_times)) {
  if (service_times_.size() < 2)
    throw std::invalid_argument("closed network needs at least 2 queues");
  for (double s : service_times_)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("service times must be positive");
}

ClosedNetworkModel ClosedNetworkModel::identical(std::size_t queues,
                                                 double service_time) {
  return ClosedNetworkModel(std::vector<double>(queues, service_time));
}

double ClosedNetworkModel::total_service() const {
  return std::accumulate(service_times_.begin(), service_times_.end(), 0.0);
}

double ClosedNetworkModel::bottleneck_service() const {
  return *std::max_element(service_times_.begin(), service_times_.end());
}

std::vector<PowerCurvePoint> power_curve(const ClosedNetworkModel &model,
                                         std::uint32_t c_max) {
  if (c_max == 0)
    throw std::invalid_argument("population must be at least 1");
  auto s = model.service_times();
  std::vector<double> queue_len(s.size(), 0.0);
  std::vector<double> residence(s.size(), 0.0);
  std::vector<PowerCurvePoint> curve;
  curve.reserve(c_max);
  for (std::uint32_t c = 1; c <= c_max; ++c) {
    double r = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      residence[k] = s[k] * (1.0 + queue_len[k]);
      r += residence[k];
    }
    double x = static_cast<double>(c) / r;
    for (std::size_t k = 0; k < s.size(); ++k)
      queue_len[k] = x * residence[k];
    curve.push_back({c, x, r, x / r});
  }
  return curve;
}

MvaResult mva_closed(const ClosedNetworkModel &model,
                     std::uint32_t customers) {
  if (customers == 0)
    throw std::invalid_argument("population must be at least 1");
  auto last = power_curve(model, customers).back();
  return {last.throughput, last.response};
}

double power(double throughput, double response) {
  if (!(throughput > 0.0) || !(response > 0.0))
    throw std::invalid_argument("power needs positive throughput and response");
  return throughput / response;
}

std::uint32_t optimal_population(const ClosedNetworkModel &model,
                                 std::uint32_t c_max) {
  auto curve = power_curve(model, c_max);
  // Relative slack keeps rounding noise from breaking ties toward larger C.
  constexpr double tie = 1e-12;
  const PowerCurvePoint *best = &curve.front();
  for (const auto &pt : curve)
    if (pt.power > best->power * (1.0 + tie))
      best = &pt;
  return best->customers;
}

std::uint32_t queue_count(const QueueCountSpec &spec) {
  if (spec.hops < 1)
    throw std::invalid_argument("path must have at least one hop");
  const std::uint32_t h = spec.hops;
  std::uint32_t n = 3 * h + 1;
  if (spec.duplex == Duplex::Half)
    n -= h;
  if (!spec.cpu_queueing)
    n -= h;
  if (!spec.acks_present && spec.duplex == Duplex::Full)
    n -= h;
  return std::max(n, h);
}

std::uint32_t terrestrial_pipe_size(std::uint32_t hops) {
  if (hops == 0)
    throw std::invalid_argument("path must have at least one hop");
  return 3 * hops;
}

std::uint32_t satellite_pipe_size(double min_path_delay,
                                  double bottleneck_service_time) {
  if (!(min_path_delay > 0.0) || !(bottleneck_service_time > 0.0))
    throw std::invalid_argument("delays must be positive");
  if (min_path_delay < bottleneck_service_time)
    throw std::invalid_argument(
        "path delay cannot be shorter than the bottleneck service time");
  double ratio = std::floor(min_path_delay / bottleneck_service_time + 0.5);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(ratio));
}

} // namespace cute
