#include "cute/netsim.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cute/path_analysis.hpp"

namespace cute {

std::string to_string(ServiceDistribution d) {
  return d == ServiceDistribution::Deterministic ? "deterministic"
                                                 : "exponential";
}

std::string to_string(PipeSizeRule r) {
  switch (r) {
  case PipeSizeRule::Terrestrial:
    return "terrestrial";
  case PipeSizeRule::Analytic:
    return "analytic";
  case PipeSizeRule::CreditsOnly:
    return "credits";
  }
  return "?";
}

std::string to_string(TraceKind k) {
  switch (k) {
  case TraceKind::Send:
    return "send";
  case TraceKind::Retransmit:
    return "retransmit";
  case TraceKind::Ack:
    return "ack";
  case TraceKind::Timeout:
    return "timeout";
  case TraceKind::Drop:
    return "drop";
  case TraceKind::Deliver:
    return "deliver";
  case TraceKind::Discard:
    return "discard";
  }
  return "?";
}

void NetworkConfig::validate() const {
  auto fail = [](const std::string &what) {
    throw std::invalid_argument(what);
  };
  if (sources < 1)
    fail("sources must be at least 1");
  if (hops < 1)
    fail("hops must be at least 1");
  if (buffer_capacity < 1)
    fail("buffer_capacity must be at least 1");
  if (credits < 1)
    fail("credits must be at least 1");
  if (!(cpu_time > 0.0))
    fail("cpu_time must be positive");
  if (link_times.size() != 1 && link_times.size() != hops)
    fail("link_times must have one entry or one per hop");
  for (double t : link_times)
    if (!(t > 0.0))
      fail("link times must be positive");
  if (!(timeout_factor >= 1.0))
    fail("timeout_factor must be at least 1");
  if (!(warmup >= 0.0))
    fail("warmup must be nonnegative");
  if (!(duration > warmup))
    fail("duration must exceed warmup");
  for (const auto &f : fault_schedule) {
    if (f.connection >= sources)
      fail("fault_schedule names connection " + std::to_string(f.connection) +
           " but there are only " + std::to_string(sources));
    if (f.sequence < 1)
      fail("fault_schedule sequence numbers start at 1");
  }
  policy.validate();
}

double NetworkConfig::link_time(std::uint32_t hop) const {
  return link_times.size() == 1 ? link_times.front() : link_times.at(hop);
}

double NetworkConfig::no_load_rtt() const {
  double links = 0.0;
  for (std::uint32_t h = 0; h < hops; ++h)
    links += link_time(h);
  // Data passes hops receive queues (routers, then the destination host);
  // the ack passes as many on the way back.
  return 2.0 * links + 2.0 * hops * cpu_time;
}

std::vector<double> NetworkConfig::path_service_times() const {
  std::vector<double> times;
  times.reserve(3 * std::size_t{hops} + 1);
  for (std::uint32_t h = 0; h < hops; ++h) {
    times.push_back(link_time(h)); // forward transmit
    times.push_back(link_time(h)); // reverse transmit
    times.push_back(cpu_time);     // receive at the far end of the hop
  }
  times.push_back(cpu_time); // ack receive at the source
  return times;
}

PathInfo NetworkConfig::path_info() const {
  switch (pipe_size) {
  case PipeSizeRule::Terrestrial:
    return PathInfo{hops, terrestrial_pipe_size(hops), credits};
  case PipeSizeRule::Analytic: {
    const ClosedNetworkModel model(path_service_times());
    const auto limit = static_cast<std::uint32_t>(4 * model.queue_count());
    return PathInfo{hops, optimal_population(model, limit), credits};
  }
  case PipeSizeRule::CreditsOnly:
    break;
  }
  return PathInfo{hops, std::nullopt, credits};
}

AdmitResult NodeBuffer::admit() {
  ++arrivals_;
  if (capacity_ && occupancy_ >= *capacity_) {
    ++drops_;
    return AdmitResult::Dropped;
  }
  ++occupancy_;
  peak_ = std::max(peak_, occupancy_);
  return AdmitResult::Accepted;
}

void NodeBuffer::release() {
  if (occupancy_ == 0)
    throw std::logic_error("buffer release without matching admit");
  --occupancy_;
}

void NodeBuffer::reset_counters() {
  arrivals_ = 0;
  drops_ = 0;
  peak_ = occupancy_;
}

ReceiveResult Destination::receive(std::uint64_t sequence) {
  ReceiveResult r;
  if (sequence < expected_) {
    r.outcome = ReceiveOutcome::Duplicate;
  } else if (sequence == expected_) {
    r.outcome = ReceiveOutcome::DeliveredInOrder;
    ++expected_;
    r.delivered = 1;
    for (auto it = cache_.begin(); it != cache_.end() && *it == expected_;) {
      ++expected_;
      ++r.delivered;
      it = cache_.erase(it);
    }
  } else if (caching_ && cache_.contains(sequence)) {
    r.outcome = ReceiveOutcome::Duplicate;
  } else if (caching_ && cache_.size() < cache_limit_) {
    cache_.insert(sequence);
    r.outcome = ReceiveOutcome::Cached;
  } else {
    r.outcome = ReceiveOutcome::Discarded;
  }
  r.ack = expected_ - 1;
  return r;
}

TraceSink csv_trace_writer(std::ostream &out) {
  return [&out](const TraceRecord &r) {
    std::ostringstream line;
    line.precision(10);
    line << r.time << ',' << to_string(r.kind) << ',' << r.connection << ','
         << r.ws << ',' << r.sequence << '\n';
    out << line.str();
  };
}

Network::Network(NetworkConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  const std::uint32_t m = config_.hops;
  const std::uint32_t n = config_.sources;

  routers_.assign(m - 1, NodeBuffer(config_.buffer_capacity));
  queues_.reserve(3 * (m - 1) + 4 * n);
  for (std::uint32_t k = 1; k < m; ++k) {
    queues_.push_back({QueueRole::RouterReceive, k, config_.cpu_time, {}});
    queues_.push_back({QueueRole::RouterForward, k, config_.link_time(k), {}});
    queues_.push_back(
        {QueueRole::RouterReverse, k, config_.link_time(k - 1), {}});
  }
  for (std::uint32_t c = 0; c < n; ++c) {
    queues_.push_back({QueueRole::SourceSend, c, config_.link_time(0), {}});
    queues_.push_back({QueueRole::SourceReceive, c, config_.cpu_time, {}});
    queues_.push_back({QueueRole::DestReceive, c, config_.cpu_time, {}});
    queues_.push_back({QueueRole::DestSend, c, config_.link_time(m - 1), {}});
  }

  const PathInfo path = config_.path_info();
  sources_.reserve(n);
  for (std::uint32_t c = 0; c < n; ++c) {
    sources_.emplace_back(WindowController(config_.policy, path));
    destinations_.emplace_back(config_.ooc_caching, config_.credits);
  }
  conn_stats_.resize(n);
  ledgers_.resize(n);
  node_stats_.resize(routers_.size());
  pending_faults_.insert(config_.fault_schedule.begin(),
                         config_.fault_schedule.end());

  for (std::uint32_t c = 0; c < n; ++c)
    schedule(0.0, EventKind::SourceWakeup, c);
}

std::size_t Network::path_queue_count() const {
  return 3 * static_cast<std::size_t>(config_.hops) + 1;
}

std::size_t Network::router_queue(std::size_t k, QueueRole role) const {
  const std::size_t base = 3 * (k - 1);
  switch (role) {
  case QueueRole::RouterReceive:
    return base;
  case QueueRole::RouterForward:
    return base + 1;
  case QueueRole::RouterReverse:
    return base + 2;
  default:
    throw std::logic_error("not a router queue");
  }
}

std::size_t Network::host_queue(std::uint32_t conn, QueueRole role) const {
  const std::size_t base = 3 * routers_.size() + 4 * std::size_t{conn};
  switch (role) {
  case QueueRole::SourceSend:
    return base;
  case QueueRole::SourceReceive:
    return base + 1;
  case QueueRole::DestReceive:
    return base + 2;
  case QueueRole::DestSend:
    return base + 3;
  default:
    throw std::logic_error("not a host queue");
  }
}

const WindowController &Network::controller(std::uint32_t conn) const {
  return sources_.at(conn).controller;
}

const Destination &Network::destination(std::uint32_t conn) const {
  return destinations_.at(conn);
}

std::uint64_t Network::outstanding(std::uint32_t conn) const {
  const auto &s = sources_.at(conn);
  return s.next_seq - s.left_edge;
}

std::uint32_t Network::window(std::uint32_t conn) const {
  return config_.window_control ? sources_.at(conn).controller.ws()
                                : config_.credits;
}

bool Network::in_recovery(std::uint32_t conn) const {
  return sources_.at(conn).recovering;
}

void Network::schedule(double at, EventKind kind, std::uint32_t target,
                       std::uint64_t generation) {
  events_.push(Event{at, tiebreak_++, kind, target, generation});
}

double Network::draw(double mean) {
  if (config_.distribution == ServiceDistribution::Deterministic)
    return mean;
  return std::exponential_distribution<double>(1.0 / mean)(rng_);
}

void Network::trace(TraceKind kind, std::uint32_t conn, std::uint64_t seq) {
  if (trace_)
    trace_(TraceRecord{now_, kind, conn, window(conn), seq});
}

void Network::enqueue(std::size_t q, Packet p) {
  queues_[q].packets.push_back(std::move(p));
  if (!queues_[q].busy)
    start_service(q);
}

void Network::start_service(std::size_t q) {
  queues_[q].busy = true;
  schedule(now_ + draw(queues_[q].mean_service), EventKind::ServiceComplete,
           static_cast<std::uint32_t>(q));
}

AdmitResult Network::router_enqueue(std::size_t k, const Packet &p) {
  NodeBuffer &node = routers_.at(k - 1);
  const bool counted = measuring();
  const AdmitResult result = node.admit();
  if (counted) {
    auto &ns = node_stats_[k - 1];
    ++ns.arrivals;
    ns.peak_occupancy = std::max(ns.peak_occupancy, node.occupancy());
    if (result == AdmitResult::Dropped)
      ++ns.drops;
  }
  if (result == AdmitResult::Dropped) {
    if (p.kind == PacketKind::Data) {
      ++ledgers_[p.connection].node_drops;
      --ledgers_[p.connection].in_flight;
      if (counted)
        ++conn_stats_[p.connection].dropped;
    }
    trace(TraceKind::Drop, p.connection, p.number);
    return result;
  }
  enqueue(router_queue(k, QueueRole::RouterReceive), p);
  return result;
}

void Network::arrive_at_node(std::size_t k, const Packet &p) {
  if (k == 1 && p.kind == PacketKind::Data && p.transmission == 1 &&
      pending_faults_.erase(FaultDrop{p.connection, p.number}) > 0) {
    if (k < config_.hops) {
      routers_[k - 1].record_forced_drop();
      if (measuring())
        ++node_stats_[k - 1].drops;
    }
    ++ledgers_[p.connection].node_drops;
    --ledgers_[p.connection].in_flight;
    if (measuring())
      ++conn_stats_[p.connection].dropped;
    trace(TraceKind::Drop, p.connection, p.number);
    return;
  }
  if (k == 0)
    enqueue(host_queue(p.connection, QueueRole::SourceReceive), p);
  else if (k == config_.hops)
    enqueue(host_queue(p.connection, QueueRole::DestReceive), p);
  else
    router_enqueue(k, p);
}

void Network::service_complete(std::size_t q) {
  ServiceQueue &sq = queues_[q];
  Packet p = std::move(sq.packets.front());
  sq.packets.pop_front();
  sq.busy = false;
  if (!sq.packets.empty())
    start_service(q);

  const std::size_t k = sq.owner;
  const std::size_t m = config_.hops;
  switch (sq.role) {
  case QueueRole::SourceSend:
    arrive_at_node(1, p);
    break;
  case QueueRole::SourceReceive:
    source_ack(p.connection, p.number);
    break;
  case QueueRole::DestReceive:
    destination_arrival(p);
    break;
  case QueueRole::DestSend:
    arrive_at_node(m - 1, p);
    break;
  case QueueRole::RouterReceive:
    enqueue(router_queue(k, p.kind == PacketKind::Data
                                ? QueueRole::RouterForward
                                : QueueRole::RouterReverse),
            std::move(p));
    break;
  case QueueRole::RouterForward:
    routers_[k - 1].release();
    arrive_at_node(k + 1, p);
    break;
  case QueueRole::RouterReverse:
    routers_[k - 1].release();
    arrive_at_node(k - 1, p);
    break;
  }
}

void Network::destination_arrival(const Packet &p) {
  const auto conn = p.connection;
  ReceiveResult r = destinations_[conn].receive(p.number);
  auto &ledger = ledgers_[conn];
  --ledger.in_flight;
  switch (r.outcome) {
  case ReceiveOutcome::DeliveredInOrder:
  case ReceiveOutcome::Cached:
    ++ledger.accepted;
    break;
  case ReceiveOutcome::Discarded:
    ++ledger.discarded;
    trace(TraceKind::Discard, conn, p.number);
    break;
  case ReceiveOutcome::Duplicate:
    ++ledger.duplicates;
    break;
  }
  if (r.delivered > 0) {
    ledger.app_delivered += r.delivered;
    if (measuring())
      conn_stats_[conn].delivered += r.delivered;
    trace(TraceKind::Deliver, conn, r.ack);
  }
  // One cumulative ack per data packet received.
  enqueue(host_queue(conn, QueueRole::DestSend),
          Packet{conn, PacketKind::Ack, r.ack, now_, 1});
}

void Network::transmit(std::uint32_t conn, std::uint64_t seq,
                       std::uint32_t transmission) {
  auto &ledger = ledgers_[conn];
  ++ledger.transmissions;
  ++ledger.in_flight;
  if (measuring()) {
    ++conn_stats_[conn].sent;
    if (transmission > 1)
      ++conn_stats_[conn].retransmissions;
  }
  trace(transmission > 1 ? TraceKind::Retransmit : TraceKind::Send, conn, seq);
  enqueue(host_queue(conn, QueueRole::SourceSend),
          Packet{conn, PacketKind::Data, seq, now_, transmission});
}

void Network::arm_timer(std::uint32_t conn) {
  Source &s = sources_[conn];
  s.timer_armed = true;
  ++s.timer_generation;
  schedule(now_ + config_.timeout(), EventKind::TimeoutExpiry, conn,
           s.timer_generation);
}

void Network::source_step(std::uint32_t conn) {
  Source &s = sources_[conn];
  if (config_.window_control && s.recovering)
    return;
  const std::uint32_t w = window(conn);
  while (s.next_seq - s.left_edge < w) {
    const std::uint64_t seq = s.next_seq++;
    s.in_window.emplace_back(now_, 1);
    transmit(conn, seq, 1);
  }
  if (!s.timer_armed && s.next_seq > s.left_edge)
    arm_timer(conn);
}

void Network::source_ack(std::uint32_t conn, std::uint64_t ack) {
  Source &s = sources_[conn];
  if (ack < s.left_edge)
    return;
  const std::uint64_t advanced = ack - s.left_edge + 1;
  const bool counted = measuring();
  for (std::uint64_t i = 0; i < advanced; ++i) {
    if (counted) {
      conn_stats_[conn].rtt_sum += now_ - s.in_window.front().first;
      ++conn_stats_[conn].rtt_count;
    }
    s.in_window.pop_front();
  }
  s.left_edge = ack + 1;
  if (config_.window_control)
    s.controller.on_ack(static_cast<std::uint32_t>(advanced));
  if (s.recovering && s.left_edge > s.recover_point)
    s.recovering = false;
  trace(TraceKind::Ack, conn, ack);

  if (s.next_seq > s.left_edge) {
    arm_timer(conn);
  } else {
    s.timer_armed = false;
    ++s.timer_generation;
  }
  source_step(conn);
}

void Network::timeout_fire(std::uint32_t conn) {
  Source &s = sources_[conn];
  s.timer_armed = false;
  ++s.timer_generation;
  if (s.next_seq == s.left_edge)
    return;
  if (measuring())
    ++conn_stats_[conn].timeouts;
  if (config_.window_control) {
    s.controller.on_timeout();
    // Nothing new goes out until everything sent so far is acknowledged.
    s.recovering = true;
    s.recover_point = s.next_seq - 1;
  }
  trace(TraceKind::Timeout, conn, s.left_edge);
  auto &slot = s.in_window.front();
  ++slot.second;
  transmit(conn, s.left_edge, slot.second);
  arm_timer(conn);
}

bool Network::step() {
  if (events_.empty())
    return false;
  const Event ev = events_.top();
  if (ev.time > config_.duration)
    return false;
  events_.pop();
  now_ = ev.time;
  switch (ev.kind) {
  case EventKind::ServiceComplete:
    service_complete(ev.target);
    break;
  case EventKind::TimeoutExpiry:
    if (sources_[ev.target].timer_armed &&
        ev.generation == sources_[ev.target].timer_generation)
      timeout_fire(ev.target);
    break;
  case EventKind::SourceWakeup:
    source_step(ev.target);
    break;
  }
  return true;
}

RunStats Network::run() {
  while (step()) {
  }
  if (events_.empty()) {
    std::uint64_t pending = 0;
    for (std::uint32_t c = 0; c < config_.sources; ++c)
      pending += outstanding(c);
    std::ostringstream msg;
    msg << "simulation stalled at t=" << now_ << " with " << pending
        << " packets outstanding";
    for (std::uint32_t c = 0; c < config_.sources; ++c)
      msg << "; conn " << c << ": left_edge=" << sources_[c].left_edge
          << " next=" << sources_[c].next_seq << " ws=" << window(c)
          << " timer=" << (sources_[c].timer_armed ? "armed" : "idle");
    throw StalledRunError(msg.str());
  }
  now_ = config_.duration;
  return stats();
}

RunStats Network::stats() const {
  RunStats out;
  out.interval = std::max(0.0, std::min(now_, config_.duration) -
                                   config_.warmup);
  out.connections = conn_stats_;
  out.nodes = node_stats_;
  out.ledgers = ledgers_;
  for (auto &c : out.connections)
    c.throughput =
        out.interval > 0.0 ? static_cast<double>(c.delivered) / out.interval
                           : 0.0;
  return out;
}

Network build_network(const NetworkConfig &config) { return Network(config); }

RunStats run(const NetworkConfig &config, TraceSink trace) {
  Network net(config);
  if (trace)
    net.set_trace(std::move(trace));
  return net.run();
}

} // namespace cute
