#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cute/window_control.hpp"

namespace cute {

enum class ServiceDistribution { Deterministic, Exponential };

std::string to_string(ServiceDistribution d);

/// Where a connection's pipe size (its window ceiling besides credits) comes
/// from: three times the hop count, the power-optimal population of the
/// path's closed-network model, or no pipe limit at all.
enum class PipeSizeRule { Terrestrial, Analytic, CreditsOnly };

std::string to_string(PipeSizeRule r);

/// Forces the first transmission of (connection, sequence) to be dropped at
/// the first intermediate node.
struct FaultDrop {
  std::uint32_t connection = 0;
  std::uint64_t sequence = 0;
  auto operator<=>(const FaultDrop &) const = default;
};

/// A path of `hops` links. Every connection runs from its own source host
/// (node 0) through the shared routers 1..hops-1 to its own destination host
/// (node hops). Hosts have a receive (CPU) queue and a transmit queue onto
/// their access link; each router has a receive queue plus a forward and a
/// reverse transmit queue, all drawing on one pool of `buffer_capacity`
/// packets. Host queues are unbounded: a host never holds more than its
/// window.
struct NetworkConfig {
  std::uint32_t sources = 1;
  std::uint32_t hops = 1;
  std::uint32_t buffer_capacity = 16;
  std::uint32_t credits = 8;
  bool ooc_caching = false;
  bool window_control = true;
  PolicyConfig policy;
  PipeSizeRule pipe_size = PipeSizeRule::Terrestrial;

  ServiceDistribution distribution = ServiceDistribution::Deterministic;
  double cpu_time = 0.05;
  /// One entry per hop, or a single entry applied to every hop.
  std::vector<double> link_times{1.0};

  /// Retransmission timeout = timeout_factor x no-load round trip.
  double timeout_factor = 8.0;
  double duration = 1000.0;
  double warmup = 0.0;
  std::vector<FaultDrop> fault_schedule;
  std::uint64_t seed = 1;

  void validate() const;
  double link_time(std::uint32_t hop) const;
  /// Sum of every forward and reverse service time on the path.
  double no_load_rtt() const;
  double timeout() const { return timeout_factor * no_load_rtt(); }
  /// Mean service times of the 3h + 1 queues one connection visits.
  std::vector<double> path_service_times() const;
  PathInfo path_info() const;

  bool operator==(const NetworkConfig &) const = default;
};

enum class PacketKind { Data, Ack };

struct Packet {
  std::uint32_t connection = 0;
  PacketKind kind = PacketKind::Data;
  /// Data: sequence number (from 1). Ack: highest in-order sequence received.
  std::uint64_t number = 0;
  double created_at = 0.0;
  std::uint32_t transmission = 1;
};

enum class AdmitResult { Accepted, Dropped };

/// Intermediate-node buffer pool with drop-tail admission.
class NodeBuffer {
public:
  explicit NodeBuffer(std::optional<std::uint32_t> capacity)
      : capacity_(capacity) {}

  AdmitResult admit();
  void release();
  void record_forced_drop() { ++drops_; }

  std::uint32_t occupancy() const { return occupancy_; }
  std::uint32_t peak() const { return peak_; }
  std::optional<std::uint32_t> capacity() const { return capacity_; }
  std::uint64_t arrivals() const { return arrivals_; }
  std::uint64_t drops() const { return drops_; }
  void reset_counters();

private:
  std::optional<std::uint32_t> capacity_;
  std::uint32_t occupancy_ = 0;
  std::uint32_t peak_ = 0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t drops_ = 0;
};

enum class ReceiveOutcome { DeliveredInOrder, Cached, Discarded, Duplicate };

struct ReceiveResult {
  ReceiveOutcome outcome = ReceiveOutcome::Discarded;
  /// Highest in-order sequence after this arrival (the cumulative ack).
  std::uint64_t ack = 0;
  /// Packets handed to the application by this arrival.
  std::uint64_t delivered = 0;
};

/// Receiving end of one connection.
class Destination {
public:
  Destination(bool caching, std::uint32_t cache_limit)
      : caching_(caching), cache_limit_(cache_limit) {}

  ReceiveResult receive(std::uint64_t sequence);

  std::uint64_t expected() const { return expected_; }
  const std::set<std::uint64_t> &cache() const { return cache_; }

private:
  bool caching_;
  std::uint32_t cache_limit_;
  std::uint64_t expected_ = 1;
  std::set<std::uint64_t> cache_;
};

struct ConnectionStats {
  std::uint64_t sent = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t timeouts = 0;
  double rtt_sum = 0.0;
  std::uint64_t rtt_count = 0;
  double throughput = 0.0;
  bool operator==(const ConnectionStats &) const = default;
};

/// Whole-run fate of every data transmission, for conservation checks.
struct TransmissionLedger {
  std::uint64_t transmissions = 0;
  std::uint64_t accepted = 0;
  std::uint64_t node_drops = 0;
  std::uint64_t discarded = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t app_delivered = 0;
  bool operator==(const TransmissionLedger &) const = default;
};

struct NodeStats {
  std::uint64_t arrivals = 0;
  std::uint64_t drops = 0;
  std::uint32_t peak_occupancy = 0;
  bool operator==(const NodeStats &) const = default;
};

/// Counters over the measured interval (warmup, duration].
struct RunStats {
  std::vector<ConnectionStats> connections;
  std::vector<NodeStats> nodes;
  std::vector<TransmissionLedger> ledgers;
  double interval = 0.0;
  bool operator==(const RunStats &) const = default;
};

enum class TraceKind { Send, Retransmit, Ack, Timeout, Drop, Deliver, Discard };

std::string to_string(TraceKind k);

struct TraceRecord {
  double time = 0.0;
  TraceKind kind = TraceKind::Send;
  std::uint32_t connection = 0;
  std::uint32_t ws = 0;
  std::uint64_t sequence = 0;
};

using TraceSink = std::function<void(const TraceRecord &)>;

/// Writes `time,kind,connection,ws,sequence` lines.
TraceSink csv_trace_writer(std::ostream &out);

class StalledRunError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The simulated network: queues, buffers, sources and destinations.
/// Single-threaded; one instance per run.
class Network {
public:
  explicit Network(NetworkConfig config);

  const NetworkConfig &config() const { return config_; }
  double now() const { return now_; }

  std::size_t queue_count() const { return queues_.size(); }
  /// Queues one connection's packets can visit (3h + 1).
  std::size_t path_queue_count() const;
  /// Routers are numbered 1..hops-1.
  std::size_t router_count() const { return routers_.size(); }
  const NodeBuffer &router(std::size_t k) const { return routers_.at(k - 1); }
  const WindowController &controller(std::uint32_t conn) const;
  const Destination &destination(std::uint32_t conn) const;
  /// Sent and not yet acknowledged.
  std::uint64_t outstanding(std::uint32_t conn) const;
  /// Window the source currently obeys (controller window or credits).
  std::uint32_t window(std::uint32_t conn) const;
  bool in_recovery(std::uint32_t conn) const;

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }

  /// Admission of `p` to router `k`; counts arrivals and drops.
  AdmitResult router_enqueue(std::size_t k, const Packet &p);
  /// Fill the window of `conn` with new packets.
  void source_step(std::uint32_t conn);
  /// Handle expiry of the retransmission timer of `conn`.
  void timeout_fire(std::uint32_t conn);
  /// Handle a cumulative ack arriving at the source of `conn`.
  void source_ack(std::uint32_t conn, std::uint64_t ack);

  /// Dispatch the next event if it is due by `duration`.
  bool step();
  RunStats run();
  RunStats stats() const;

private:
  enum class EventKind { ServiceComplete, TimeoutExpiry, SourceWakeup };

  struct Event {
    double time;
    std::uint64_t tiebreak;
    EventKind kind;
    std::uint32_t target;
    std::uint64_t generation;
    bool operator>(const Event &o) const {
      return time != o.time ? time > o.time : tiebreak > o.tiebreak;
    }
  };

  enum class QueueRole {
    SourceSend,
    SourceReceive,
    DestReceive,
    DestSend,
    RouterReceive,
    RouterForward,
    RouterReverse
  };

  struct ServiceQueue {
    QueueRole role;
    /// Router number, or connection for host queues.
    std::uint32_t owner;
    double mean_service;
    std::deque<Packet> packets;
    bool busy = false;
  };

  struct Source {
    explicit Source(WindowController c) : controller(std::move(c)) {}
    WindowController controller;
    std::uint64_t left_edge = 1;
    std::uint64_t next_seq = 1;
    /// First-send time and transmission count per outstanding sequence.
    std::deque<std::pair<double, std::uint32_t>> in_window;
    bool timer_armed = false;
    std::uint64_t timer_generation = 0;
    bool recovering = false;
    std::uint64_t recover_point = 0;
  };

  std::size_t router_queue(std::size_t k, QueueRole role) const;
  std::size_t host_queue(std::uint32_t conn, QueueRole role) const;

  void schedule(double at, EventKind kind, std::uint32_t target,
                std::uint64_t generation = 0);
  void enqueue(std::size_t q, Packet p);
  void start_service(std::size_t q);
  void service_complete(std::size_t q);
  /// Packet `p` reaches node `k` of its path (0 = source host).
  void arrive_at_node(std::size_t k, const Packet &p);
  void destination_arrival(const Packet &p);
  void transmit(std::uint32_t conn, std::uint64_t seq,
                std::uint32_t transmission);
  void arm_timer(std::uint32_t conn);
  bool measuring() const { return now_ > config_.warmup; }
  void trace(TraceKind kind, std::uint32_t conn, std::uint64_t seq);
  double draw(double mean);

  NetworkConfig config_;
  std::set<FaultDrop> pending_faults_;
  double now_ = 0.0;
  std::uint64_t tiebreak_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::vector<ServiceQueue> queues_;
  std::vector<NodeBuffer> routers_;
  std::vector<Source> sources_;
  std::vector<Destination> destinations_;
  std::vector<ConnectionStats> conn_stats_;
  std::vector<TransmissionLedger> ledgers_;
  std::vector<NodeStats> node_stats_;
  std::mt19937_64 rng_;
  TraceSink trace_;
};

Network build_network(const NetworkConfig &config);

/// Runs a fresh network built from `config` to its horizon.
RunStats run(const NetworkConfig &config, TraceSink trace = {});

} // namespace cute
