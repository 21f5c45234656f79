#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cute/metrics.hpp"
#include "cute/netsim.hpp"

namespace cute {

enum class SweepVariable { Credits, Sources };

std::string to_string(SweepVariable v);

/// One of the four (window control x out-of-order caching) combinations.
struct Arm {
  bool window_control = true;
  bool ooc_caching = true;
  bool operator==(const Arm &) const = default;
};

/// control on/off x caching on/off, control-on arms first.
std::vector<Arm> all_arms();

struct SweepConfig {
  NetworkConfig base;
  SweepVariable variable = SweepVariable::Credits;
  std::vector<std::uint32_t> values;
  std::vector<Arm> arms = all_arms();
  std::uint32_t replications = 5;
  std::uint64_t seed_base = 1;

  void validate() const;
  bool operator==(const SweepConfig &) const = default;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();

/// Built-in experiment definitions: "case1" sweeps credits with three
/// sources behind 42-packet buffers; "case2" sweeps the source count with
/// 80-packet buffers and 8 credits.
SweepConfig preset(std::string_view name);

/// The network configuration for one sweep point and replication.
NetworkConfig point_config(const SweepConfig &sweep, const Arm &arm,
                           std::uint32_t value, std::uint32_t replication);

struct ResultRow {
  Arm arm;
  std::string sweep_var = "none";
  std::optional<std::uint32_t> sweep_value;
  /// Empty on replication-mean rows.
  std::optional<std::uint32_t> replication;
  std::optional<std::uint64_t> seed;
  SummaryMetrics metrics;
};

class SweepError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Runs every (arm, value, replication). Rows come back ordered by arm, then
/// value, then replication, each point followed by its replication mean.
/// `threads == 0` uses the hardware concurrency.
std::vector<ResultRow> run_sweep(const SweepConfig &sweep,
                                 unsigned threads = 0);

/// Mean over replications; optional metrics average over the rows that have
/// them.
SummaryMetrics mean_metrics(std::span<const SummaryMetrics> reps);

ResultRow run_single(const NetworkConfig &config, TraceSink trace = {});

std::string format_csv(std::span<const ResultRow> rows);
void emit_csv(std::span<const ResultRow> rows,
              const std::filesystem::path &destination);

} // namespace cute
