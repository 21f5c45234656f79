#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "cute/experiment.hpp"
#include "cute/netsim.hpp"

namespace cute {

/// Configuration problem with the offending field and (1-based) line when
/// known.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string &message, std::string field = {},
              std::optional<int> line = std::nullopt);

  const std::string &field() const { return field_; }
  std::optional<int> line() const { return line_; }

private:
  std::string field_;
  std::optional<int> line_;
};

/// A document with only a `network:` section describes a single run; adding
/// a `sweep:` section turns it into a sweep over that base network.
using ParsedConfig = std::variant<NetworkConfig, SweepConfig>;

/// Parses and validates a YAML experiment definition. Unknown keys are
/// rejected. See schema/config.schema.json.
ParsedConfig parse_config(std::string_view text);
ParsedConfig load_config(const std::filesystem::path &path);

/// Serializes a sweep back to the same YAML dialect.
std::string to_yaml(const SweepConfig &sweep);

} // namespace cute
