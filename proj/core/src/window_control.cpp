#include "cute/window_control.hpp"

#include <algorithm>

namespace cute {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t ceil_half(std::uint32_t v) { return v / 2 + v % 2; }

} // namespace

void PolicyConfig::validate() const {
  if (auto *lin = std::get_if<LinearEvery>(&increase); lin && lin->every < 1)
    throw std::invalid_argument("linear increase requires N >= 1");
  if (auto *ht = std::get_if<MinHopsTimes>(&min_rule); ht && ht->factor < 2)
    throw std::invalid_argument("hops_times minimum requires m >= 2");
}

void PathInfo::validate() const {
  if (hops < 1)
    throw std::invalid_argument("path must have at least one hop");
  if (credits < 1)
    throw std::invalid_argument("credits must be at least 1");
  if (pipe_size && *pipe_size < 1)
    throw std::invalid_argument("pipe size must be at least 1");
}

std::string to_string(DecreasePolicy p) {
  switch (p) {
  case DecreasePolicy::Sudden:
    return "sudden";
  case DecreasePolicy::Gradual:
    return "gradual";
  case DecreasePolicy::Binary:
    return "binary";
  }
  return "?";
}

std::string to_string(InitPolicy p) {
  switch (p) {
  case InitPolicy::AtMin:
    return "at_min";
  case InitPolicy::AtMax:
    return "at_max";
  case InitPolicy::Halfway:
    return "halfway";
  case InitPolicy::Remembered:
    return "remembered";
  }
  return "?";
}

std::string to_string(const IncreasePolicy &p) {
  return std::visit(
      overloaded{[](const Parabolic &) { return std::string("parabolic"); },
                 [](const LinearEvery &l) {
                   return "linear:" + std::to_string(l.every);
                 }},
      p);
}

std::string to_string(const MinRule &r) {
  return std::visit(
      overloaded{[](const MinOne &) { return std::string("one"); },
                 [](const MinHops &) { return std::string("hops"); },
                 [](const MinHopsTimes &m) {
                   return "hops_times:" + std::to_string(m.factor);
                 }},
      r);
}

std::uint32_t effective_window_max(std::optional<std::uint32_t> pipe_size,
                                   std::uint32_t credits) {
  if (credits == 0)
    throw std::invalid_argument("a connection with zero credits cannot send");
  if (pipe_size) {
    if (*pipe_size == 0)
      throw std::invalid_argument("pipe size must be at least 1");
    return std::min(*pipe_size, credits);
  }
  return credits;
}

WindowController::WindowController(const PolicyConfig &policy,
                                   const PathInfo &path,
                                   std::optional<std::uint32_t> remembered)
    : policy_(policy), remembered_ws_(remembered) {
  policy_.validate();
  path.validate();

  ws_min_ = std::visit(
      overloaded{[](const MinOne &) -> std::uint32_t { return 1; },
                 [&](const MinHops &) { return path.hops; },
                 [&](const MinHopsTimes &m) { return m.factor * path.hops; }},
      policy_.min_rule);
  ws_max_ = effective_window_max(path.pipe_size, path.credits);
  if (ws_min_ > ws_max_)
    throw ConfigurationError(
        "minimum window " + std::to_string(ws_min_) + " (rule " +
        to_string(policy_.min_rule) + ") exceeds maximum window " +
        std::to_string(ws_max_));

  switch (policy_.init) {
  case InitPolicy::AtMin:
    ws_ = ws_min_;
    break;
  case InitPolicy::AtMax:
    ws_ = ws_max_;
    break;
  case InitPolicy::Halfway:
    ws_ = ceil_half(ws_min_ + ws_max_);
    break;
  case InitPolicy::Remembered:
    ws_ = remembered_ws_ ? std::clamp(*remembered_ws_, ws_min_, ws_max_)
                         : ws_min_;
    break;
  }
}

std::uint32_t WindowController::increase_threshold() const {
  if (auto *lin = std::get_if<LinearEvery>(&policy_.increase))
    return lin->every;
  return ws_;
}

void WindowController::emit(WindowEventKind kind) {
  ++events_;
  if (trace_)
    trace_(WindowEvent{events_, kind, ws_});
}

std::uint32_t WindowController::on_ack(std::uint32_t newly_acked) {
  if (newly_acked == 0)
    throw std::invalid_argument("on_ack requires at least one packet");
  acks_since_change_ += newly_acked;
  if (acks_since_change_ >= increase_threshold()) {
    ws_ = std::min(ws_ + 1, ws_max_);
    acks_since_change_ = 0;
  }
  emit(WindowEventKind::Ack);
  return ws_;
}

std::uint32_t WindowController::on_timeout() {
  if (policy_.init == InitPolicy::Remembered)
    remembered_ws_ = ws_;
  switch (policy_.decrease) {
  case DecreasePolicy::Sudden:
    ws_ = ws_min_;
    break;
  case DecreasePolicy::Gradual:
    ws_ = std::max(ws_min_, ws_ - 1);
    break;
  case DecreasePolicy::Binary:
    ws_ = std::max(ws_min_, ceil_half(ws_));
    break;
  }
  acks_since_change_ = 0;
  emit(WindowEventKind::Timeout);
  return ws_;
}

void WindowController::reset_state(std::uint32_t ws,
                                   std::uint32_t acks_since_change) {
  if (ws < ws_min_ || ws > ws_max_)
    throw std::invalid_argument("window outside [ws_min, ws_max]");
  if (acks_since_change >= std::max<std::uint32_t>(ws, 1) &&
      std::holds_alternative<Parabolic>(policy_.increase))
    throw std::invalid_argument("counter must stay below the window");
  ws_ = ws;
  acks_since_change_ = acks_since_change;
}

WindowController ControllerFactory::make(const PolicyConfig &policy,
                                         const PathInfo &path,
                                         DestinationId destination) const {
  return WindowController(policy, path, remembered(destination));
}

void ControllerFactory::release(DestinationId destination,
                                const WindowController &ctrl) {
  memory_[destination] = ctrl.ws();
}

std::optional<std::uint32_t>
ControllerFactory::remembered(DestinationId destination) const {
  auto it = memory_.find(destination);
  if (it == memory_.end())
    return std::nullopt;
  return it->second;
}

} // namespace cute
