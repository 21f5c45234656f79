#include "cute/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace cute {

std::string to_string(SweepVariable v) {
  return v == SweepVariable::Credits ? "credits" : "sources";
}

std::vector<Arm> all_arms() {
  return {{true, true}, {true, false}, {false, true}, {false, false}};
}

void SweepConfig::validate() const {
  base.validate();
  if (values.empty())
    throw std::invalid_argument("sweep values must not be empty");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1])
      throw std::invalid_argument("sweep values must be strictly increasing");
  if (values.front() < 1)
    throw std::invalid_argument("sweep values must be at least 1");
  if (arms.empty())
    throw std::invalid_argument("sweep needs at least one arm");
  if (replications < 1)
    throw std::invalid_argument("replications must be at least 1");
  for (std::uint32_t v : values)
    for (const Arm &a : arms)
      point_config(*this, a, v, 0).validate();
}

namespace {

// Shared by both presets: a four-hop path whose second link is the slow WAN
// line between two fast LAN segments. The no-load round trip is 5.4 time
// units, against one packet per time unit at the WAN bottleneck.
NetworkConfig preset_network() {
  NetworkConfig n;
  n.hops = 4;
  n.cpu_time = 0.05;
  n.link_times = {0.5, 1.0, 0.5, 0.5};
  n.distribution = ServiceDistribution::Deterministic;
  n.duration = 20000.0;
  n.warmup = 2000.0;
  n.window_control = true;
  n.ooc_caching = true;
  return n;
}

} // namespace

std::vector<std::string> preset_names() { return {"case1", "case2"}; }

SweepConfig preset(std::string_view name) {
  SweepConfig s;
  s.base = preset_network();
  s.arms = all_arms();
  // Service is deterministic, so replications would repeat the same run.
  s.replications = 1;
  s.seed_base = 1;
  // The timer must outlast the queueing delay of a full router buffer, or
  // sources time out on packets that are merely queued.
  if (name == "case1") {
    s.base.sources = 3;
    s.base.buffer_capacity = 42;
    s.base.credits = 14;
    s.base.timeout_factor = 48.0;
    s.variable = SweepVariable::Credits;
    s.values = {1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 21, 24, 28, 32, 40};
  } else if (name == "case2") {
    s.base.sources = 10;
    s.base.buffer_capacity = 80;
    s.base.credits = 8;
    s.base.timeout_factor = 48.0;
    s.variable = SweepVariable::Sources;
    s.values = {1, 2, 4, 6, 8, 10, 12, 14, 15, 16, 18, 20};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) +
                                "' (expected case1 or case2)");
  }
  return s;
}

NetworkConfig point_config(const SweepConfig &sweep, const Arm &arm,
                           std::uint32_t value, std::uint32_t replication) {
  NetworkConfig cfg = sweep.base;
  cfg.window_control = arm.window_control;
  cfg.ooc_caching = arm.ooc_caching;
  if (sweep.variable == SweepVariable::Credits)
    cfg.credits = value;
  else
    cfg.sources = value;
  cfg.seed = sweep.seed_base + replication;
  return cfg;
}

SummaryMetrics mean_metrics(std::span<const SummaryMetrics> reps) {
  SummaryMetrics out;
  if (reps.empty())
    return out;
  const double n = static_cast<double>(reps.size());
  std::size_t width = 0;
  for (const auto &r : reps)
    width = std::max(width, r.throughputs.size());
  out.throughputs.assign(width, 0.0);

  auto mean_optional = [&](auto field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto &r : reps)
      if (auto v = r.*field) {
        sum += *v;
        ++count;
      }
    if (count == 0)
      return std::nullopt;
    return sum / static_cast<double>(count);
  };

  for (const auto &r : reps) {
    for (std::size_t i = 0; i < r.throughputs.size(); ++i)
      out.throughputs[i] += r.throughputs[i] / n;
    out.total_throughput += r.total_throughput / n;
    out.loss_probability += r.loss_probability / n;
  }
  out.mean_response = mean_optional(&SummaryMetrics::mean_response);
  out.power = mean_optional(&SummaryMetrics::power);
  out.fairness = mean_optional(&SummaryMetrics::fairness);
  return out;
}

std::vector<ResultRow> run_sweep(const SweepConfig &sweep, unsigned threads) {
  sweep.validate();

  struct Job {
    std::size_t arm;
    std::size_t value;
    std::uint32_t replication;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < sweep.arms.size(); ++a)
    for (std::size_t v = 0; v < sweep.values.size(); ++v)
      for (std::uint32_t r = 0; r < sweep.replications; ++r)
        jobs.push_back({a, v, r});

  std::vector<SummaryMetrics> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size() && !failed; i = next++) {
      const Job &job = jobs[i];
      const Arm &arm = sweep.arms[job.arm];
      const std::uint32_t value = sweep.values[job.value];
      try {
        results[i] =
            summarize(run(point_config(sweep, arm, value, job.replication)));
      } catch (const std::exception &e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) {
          std::ostringstream msg;
          msg << "run failed at arm (control=" << arm.window_control
              << ", caching=" << arm.ooc_caching << "), "
              << to_string(sweep.variable) << "=" << value
              << ", replication " << job.replication << ": " << e.what();
          error = std::make_exception_ptr(SweepError(msg.str()));
        }
      }
    }
  };

  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }
  if (error)
    std::rethrow_exception(error);

  std::vector<ResultRow> rows;
  const std::string var = to_string(sweep.variable);
  for (std::size_t i = 0; i < jobs.size();) {
    const Job &first = jobs[i];
    std::size_t end = i + sweep.replications;
    for (std::size_t j = i; j < end; ++j) {
      ResultRow row;
      row.arm = sweep.arms[first.arm];
      row.sweep_var = var;
      row.sweep_value = sweep.values[first.value];
      row.replication = jobs[j].replication;
      row.seed = sweep.seed_base + jobs[j].replication;
      row.metrics = results[j];
      rows.push_back(std::move(row));
    }
    ResultRow mean;
    mean.arm = sweep.arms[first.arm];
    mean.sweep_var = var;
    mean.sweep_value = sweep.values[first.value];
    mean.metrics = mean_metrics(
        std::span<const SummaryMetrics>(results).subspan(i, end - i));
    rows.push_back(std::move(mean));
    i = end;
  }
  return rows;
}

ResultRow run_single(const NetworkConfig &config, TraceSink trace) {
  ResultRow row;
  row.arm = {config.window_control, config.ooc_caching};
  row.replication = 0;
  row.seed = config.seed;
  row.metrics = summarize(run(config, std::move(trace)));
  return row;
}

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string number(const std::optional<double> &v) {
  return v ? number(*v) : std::string();
}

} // namespace

std::string format_csv(std::span<const ResultRow> rows) {
  if (rows.empty())
    throw std::invalid_argument("no rows to emit");
  std::size_t width = 0;
  for (const auto &r : rows)
    width = std::max(width, r.metrics.throughputs.size());

  std::string out = "arm_control,arm_caching,sweep_var,sweep_value,"
                    "replication,seed,total_throughput,mean_response,power,"
                    "fairness,loss_prob";
  for (std::size_t i = 1; i <= width; ++i)
    out += ",t" + std::to_string(i);
  out += '\n';

  for (const auto &r : rows) {
    const auto &m = r.metrics;
    out += r.arm.window_control ? "1," : "0,";
    out += r.arm.ooc_caching ? "1," : "0,";
    out += r.sweep_var + ',';
    out += (r.sweep_value ? std::to_string(*r.sweep_value) : "") + ',';
    out += (r.replication ? std::to_string(*r.replication) : "mean") + ',';
    out += (r.seed ? std::to_string(*r.seed) : "") + ',';
    out += number(m.total_throughput) + ',';
    out += number(m.mean_response) + ',';
    out += number(m.power) + ',';
    out += number(m.fairness) + ',';
    out += number(m.loss_probability);
    for (std::size_t i = 0; i < width; ++i) {
      out += ',';
      if (i < m.throughputs.size())
        out += number(m.throughputs[i]);
    }
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const ResultRow> rows,
              const std::filesystem::path &destination) {
  const std::string text = format_csv(rows);
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open " + destination.string() +
                             " for writing");
  out << text;
  out.flush();
  if (!out)
    throw std::runtime_error("failed writing " + destination.string());
}

} // namespace cute
