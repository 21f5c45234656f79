#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace cute {

/// Raised when a policy/path combination cannot yield a valid window range.
class ConfigurationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Increase policies.
struct Parabolic {
  bool operator==(const Parabolic &) const = default;
};
/// Increment the window by one for every `every` packets acknowledged.
struct LinearEvery {
  std::uint32_t every = 1;
  bool operator==(const LinearEvery &) const = default;
};
using IncreasePolicy = std::variant<Parabolic, LinearEvery>;

enum class DecreasePolicy { Sudden, Gradual, Binary };

enum class InitPolicy { AtMin, AtMax, Halfway, Remembered };

// Minimum-window rules.
struct MinOne {
  bool operator==(const MinOne &) const = default;
};
struct MinHops {
  bool operator==(const MinHops &) const = default;
};
struct MinHopsTimes {
  std::uint32_t factor = 2;
  bool operator==(const MinHopsTimes &) const = default;
};
using MinRule = std::variant<MinOne, MinHops, MinHopsTimes>;

/// One selection for each of the five window rules. Defaults: parabolic rise,
/// sudden decrease, start at the minimum, minimum one.
struct PolicyConfig {
  IncreasePolicy increase = Parabolic{};
  DecreasePolicy decrease = DecreasePolicy::Sudden;
  InitPolicy init = InitPolicy::AtMin;
  MinRule min_rule = MinOne{};

  void validate() const;
  bool operator==(const PolicyConfig &) const = default;
};

/// What the source knows about its path when a connection opens.
struct PathInfo {
  std::uint32_t hops = 1;
  std::optional<std::uint32_t> pipe_size;
  std::uint32_t credits = 1;

  void validate() const;
};

std::string to_string(DecreasePolicy p);
std::string to_string(InitPolicy p);
std::string to_string(const IncreasePolicy &p);
std::string to_string(const MinRule &r);

/// Upper window bound: the pipe size when the network layer supplies one,
/// capped by the destination's credits.
std::uint32_t effective_window_max(std::optional<std::uint32_t> pipe_size,
                                   std::uint32_t credits);

enum class WindowEventKind { Ack, Timeout };

struct WindowEvent {
  std::uint64_t index = 0;
  WindowEventKind kind = WindowEventKind::Ack;
  std::uint32_t ws_after = 0;
};

using WindowTraceHook = std::function<void(const WindowEvent &)>;

/// Per-connection congestion window. The window stays within
/// [ws_min, ws_max]; it grows on acknowledgments and collapses on timeouts.
///
/// Counter semantics: `acks_since_change` counts packets acknowledged since
/// the last increase or decrease. Reaching the threshold (current window for
/// the parabolic rule, N for the linear rule) yields one increment and resets
/// the counter to zero; any excess is dropped.
class WindowController {
public:
  WindowController(const PolicyConfig &policy, const PathInfo &path,
                   std::optional<std::uint32_t> remembered = std::nullopt);

  /// Returns the window after accounting for `newly_acked` packets.
  std::uint32_t on_ack(std::uint32_t newly_acked);
  std::uint32_t on_timeout();

  std::uint32_t ws() const { return ws_; }
  std::uint32_t ws_min() const { return ws_min_; }
  std::uint32_t ws_max() const { return ws_max_; }
  std::uint32_t acks_since_change() const { return acks_since_change_; }
  std::optional<std::uint32_t> remembered_ws() const { return remembered_ws_; }
  const PolicyConfig &policy() const { return policy_; }

  void set_trace(WindowTraceHook hook) { trace_ = std::move(hook); }

  /// Test seam: force an arbitrary in-range state.
  void reset_state(std::uint32_t ws, std::uint32_t acks_since_change);

private:
  std::uint32_t increase_threshold() const;
  void emit(WindowEventKind kind);

  PolicyConfig policy_;
  std::uint32_t ws_ = 1;
  std::uint32_t ws_min_ = 1;
  std::uint32_t ws_max_ = 1;
  std::uint32_t acks_since_change_ = 0;
  std::optional<std::uint32_t> remembered_ws_;
  std::uint64_t events_ = 0;
  WindowTraceHook trace_;
};

/// Builds controllers and keeps the per-destination window memory used by
/// `InitPolicy::Remembered`. Single writer.
class ControllerFactory {
public:
  using DestinationId = std::uint64_t;

  WindowController make(const PolicyConfig &policy, const PathInfo &path,
                        DestinationId destination) const;

  /// Records the closing window of a connection to `destination`.
  void release(DestinationId destination, const WindowController &ctrl);

  std::optional<std::uint32_t> remembered(DestinationId destination) const;

private:
  std::map<DestinationId, std::uint32_t> memory_;
};

} // namespace cute
