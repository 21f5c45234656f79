#include "cute/config_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cute {

namespace {

std::string describe(const std::string &message, const std::string &field,
                     std::optional<int> line) {
  std::string out;
  if (line)
    out += "line " + std::to_string(*line) + ": ";
  if (!field.empty())
    out += field + ": ";
  return out + message;
}

std::optional<int> line_of(const YAML::Node &node) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null())
    return std::nullopt;
  return mark.line + 1;
}

[[noreturn]] void fail(const YAML::Node &node, const std::string &field,
                       const std::string &message) {
  throw ConfigError(message, field, line_of(node));
}

std::string join(const std::string &prefix, const std::string &key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Walks one mapping, tracking which keys were consumed.
class Section {
public:
  Section(const YAML::Node &node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.IsMap())
      fail(node_, path_.empty() ? "<document>" : path_,
           "expected a mapping of keys to values");
  }

  std::optional<YAML::Node> get(const std::string &key) {
    allowed_.insert(key);
    const YAML::Node &view = node_;
    YAML::Node child = view[key];
    if (!child.IsDefined() || child.IsNull())
      return std::nullopt;
    return child;
  }

  std::string field(const std::string &key) const { return join(path_, key); }

  /// Errors on any key that no accessor asked for.
  void finish() const {
    for (const auto &kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed_.contains(key))
        fail(kv.first, join(path_, key), "unknown key '" + key + "'");
    }
  }

  const YAML::Node &node() const { return node_; }

private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> allowed_;
};

template <class T>
T scalar(const YAML::Node &node, const std::string &field,
         const char *expected) {
  if (!node.IsScalar())
    fail(node, field, std::string("expected ") + expected);
  try {
    return node.as<T>();
  } catch (const YAML::Exception &) {
    fail(node, field,
         std::string("expected ") + expected + ", got '" +
             node.Scalar() + "'");
  }
}

std::uint64_t read_count(const YAML::Node &node, const std::string &field,
                         std::uint64_t minimum) {
  const std::string text = scalar<std::string>(node, field, "an integer");
  std::uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(node, field, "expected a nonnegative integer, got '" + text + "'");
  if (value < minimum)
    fail(node, field,
         "must be at least " + std::to_string(minimum) + ", got " + text);
  return value;
}

std::uint32_t read_u32(const YAML::Node &node, const std::string &field,
                       std::uint32_t minimum) {
  const auto v = read_count(node, field, minimum);
  if (v > 0xffffffffULL)
    fail(node, field, "value out of range");
  return static_cast<std::uint32_t>(v);
}

double read_positive(const YAML::Node &node, const std::string &field,
                     bool allow_zero = false) {
  const double v = scalar<double>(node, field, "a number");
  if (allow_zero ? !(v >= 0.0) : !(v > 0.0))
    fail(node, field,
         allow_zero ? "must be nonnegative" : "must be positive");
  return v;
}

bool read_bool(const YAML::Node &node, const std::string &field) {
  return scalar<bool>(node, field, "true or false");
}

// "name" or "name:N"
std::pair<std::string, std::optional<std::string>>
split_tagged(const std::string &text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    return {text, std::nullopt};
  return {text.substr(0, colon), text.substr(colon + 1)};
}

std::uint32_t tagged_count(const YAML::Node &node, const std::string &field,
                           const std::string &digits, std::uint32_t minimum) {
  std::uint32_t v = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size())
    fail(node, field, "expected an integer after ':', got '" + digits + "'");
  if (v < minimum)
    fail(node, field, "parameter must be at least " + std::to_string(minimum));
  return v;
}

PolicyConfig read_policy(const YAML::Node &node, const std::string &path) {
  Section sec(node, path);
  PolicyConfig p;
  if (auto n = sec.get("increase")) {
    const auto f = sec.field("increase");
    auto [name, arg] = split_tagged(scalar<std::string>(*n, f, "a policy"));
    if (name == "parabolic" && !arg)
      p.increase = Parabolic{};
    else if (name == "linear" && arg)
      p.increase = LinearEvery{tagged_count(*n, f, *arg, 1)};
    else
      fail(*n, f, "expected 'parabolic' or 'linear:N'");
  }
  if (auto n = sec.get("decrease")) {
    const auto f = sec.field("decrease");
    const auto s = scalar<std::string>(*n, f, "a policy");
    if (s == "sudden")
      p.decrease = DecreasePolicy::Sudden;
    else if (s == "gradual")
      p.decrease = DecreasePolicy::Gradual;
    else if (s == "binary")
      p.decrease = DecreasePolicy::Binary;
    else
      fail(*n, f, "expected sudden, gradual or binary, got '" + s + "'");
  }
  if (auto n = sec.get("init")) {
    const auto f = sec.field("init");
    const auto s = scalar<std::string>(*n, f, "a policy");
    if (s == "at_min")
      p.init = InitPolicy::AtMin;
    else if (s == "at_max")
      p.init = InitPolicy::AtMax;
    else if (s == "halfway")
      p.init = InitPolicy::Halfway;
    else if (s == "remembered")
      p.init = InitPolicy::Remembered;
    else
      fail(*n, f,
           "expected at_min, at_max, halfway or remembered, got '" + s + "'");
  }
  if (auto n = sec.get("min_rule")) {
    const auto f = sec.field("min_rule");
    auto [name, arg] = split_tagged(scalar<std::string>(*n, f, "a rule"));
    if (name == "one" && !arg)
      p.min_rule = MinOne{};
    else if (name == "hops" && !arg)
      p.min_rule = MinHops{};
    else if (name == "hops_times" && arg)
      p.min_rule = MinHopsTimes{tagged_count(*n, f, *arg, 2)};
    else
      fail(*n, f, "expected 'one', 'hops' or 'hops_times:M' (M >= 2)");
  }
  sec.finish();
  return p;
}

void read_service(const YAML::Node &node, const std::string &path,
                  NetworkConfig &cfg) {
  Section sec(node, path);
  if (auto n = sec.get("distribution")) {
    const auto f = sec.field("distribution");
    const auto s = scalar<std::string>(*n, f, "a distribution");
    if (s == "deterministic")
      cfg.distribution = ServiceDistribution::Deterministic;
    else if (s == "exponential")
      cfg.distribution = ServiceDistribution::Exponential;
    else
      fail(*n, f, "expected deterministic or exponential, got '" + s + "'");
  }
  if (auto n = sec.get("cpu_time"))
    cfg.cpu_time = read_positive(*n, sec.field("cpu_time"));
  if (auto n = sec.get("link_times")) {
    const auto f = sec.field("link_times");
    cfg.link_times.clear();
    if (n->IsSequence()) {
      for (std::size_t i = 0; i < n->size(); ++i)
        cfg.link_times.push_back(
            read_positive((*n)[i], f + "[" + std::to_string(i) + "]"));
      if (cfg.link_times.empty())
        fail(*n, f, "must not be empty");
    } else {
      cfg.link_times.push_back(read_positive(*n, f));
    }
  }
  sec.finish();
}

NetworkConfig read_network(const YAML::Node &node) {
  Section sec(node, "network");
  NetworkConfig cfg;
  if (auto n = sec.get("sources"))
    cfg.sources = read_u32(*n, sec.field("sources"), 1);
  if (auto n = sec.get("hops"))
    cfg.hops = read_u32(*n, sec.field("hops"), 1);
  if (auto n = sec.get("buffer_capacity"))
    cfg.buffer_capacity = read_u32(*n, sec.field("buffer_capacity"), 1);
  if (auto n = sec.get("credits"))
    cfg.credits = read_u32(*n, sec.field("credits"), 1);
  if (auto n = sec.get("ooc_caching"))
    cfg.ooc_caching = read_bool(*n, sec.field("ooc_caching"));
  if (auto n = sec.get("window_control"))
    cfg.window_control = read_bool(*n, sec.field("window_control"));
  if (auto n = sec.get("policy"))
    cfg.policy = read_policy(*n, sec.field("policy"));
  if (auto n = sec.get("pipe_size")) {
    const auto f = sec.field("pipe_size");
    const auto v = scalar<std::string>(*n, f, "a string");
    if (v == "terrestrial")
      cfg.pipe_size = PipeSizeRule::Terrestrial;
    else if (v == "analytic")
      cfg.pipe_size = PipeSizeRule::Analytic;
    else if (v == "credits")
      cfg.pipe_size = PipeSizeRule::CreditsOnly;
    else
      fail(*n, f, "expected terrestrial, analytic or credits, got '" + v + "'");
  }
  if (auto n = sec.get("service"))
    read_service(*n, sec.field("service"), cfg);
  if (auto n = sec.get("timeout_factor")) {
    const auto f = sec.field("timeout_factor");
    cfg.timeout_factor = scalar<double>(*n, f, "a number");
    if (!(cfg.timeout_factor >= 1.0))
      fail(*n, f, "must be at least 1");
  }
  if (auto n = sec.get("duration"))
    cfg.duration = read_positive(*n, sec.field("duration"));
  if (auto n = sec.get("warmup"))
    cfg.warmup = read_positive(*n, sec.field("warmup"), true);
  if (auto n = sec.get("seed"))
    cfg.seed = read_count(*n, sec.field("seed"), 0);
  if (auto n = sec.get("fault_schedule")) {
    const auto f = sec.field("fault_schedule");
    if (!n->IsSequence())
      fail(*n, f, "expected a list of {connection, sequence} entries");
    for (std::size_t i = 0; i < n->size(); ++i) {
      Section entry((*n)[i], f + "[" + std::to_string(i) + "]");
      FaultDrop drop;
      auto c = entry.get("connection");
      auto s = entry.get("sequence");
      if (!c || !s)
        fail((*n)[i], f, "each entry needs connection and sequence");
      drop.connection = read_u32(*c, entry.field("connection"), 0);
      drop.sequence = read_count(*s, entry.field("sequence"), 1);
      entry.finish();
      cfg.fault_schedule.push_back(drop);
    }
  }
  sec.finish();

  try {
    cfg.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what(), "network", line_of(node));
  }
  return cfg;
}

SweepConfig read_sweep(const YAML::Node &node, NetworkConfig base) {
  Section sec(node, "sweep");
  SweepConfig s;
  s.base = std::move(base);
  if (auto n = sec.get("variable")) {
    const auto f = sec.field("variable");
    const auto v = scalar<std::string>(*n, f, "credits or sources");
    if (v == "credits")
      s.variable = SweepVariable::Credits;
    else if (v == "sources")
      s.variable = SweepVariable::Sources;
    else
      fail(*n, f, "expected credits or sources, got '" + v + "'");
  } else {
    fail(node, "sweep.variable", "missing required key");
  }
  if (auto n = sec.get("values")) {
    const auto f = sec.field("values");
    if (!n->IsSequence() || n->size() == 0)
      fail(*n, f, "expected a nonempty list of counts");
    for (std::size_t i = 0; i < n->size(); ++i) {
      const auto v =
          read_u32((*n)[i], f + "[" + std::to_string(i) + "]", 1);
      if (!s.values.empty() && v <= s.values.back())
        fail((*n)[i], f, "values must be strictly increasing");
      s.values.push_back(v);
    }
  } else {
    fail(node, "sweep.values", "missing required key");
  }
  if (auto n = sec.get("arms")) {
    const auto f = sec.field("arms");
    if (!n->IsSequence() || n->size() == 0)
      fail(*n, f, "expected a nonempty list of arms");
    s.arms.clear();
    for (std::size_t i = 0; i < n->size(); ++i) {
      const auto af = f + "[" + std::to_string(i) + "]";
      Section arm((*n)[i], af);
      Arm a;
      if (auto c = arm.get("window_control"))
        a.window_control = read_bool(*c, arm.field("window_control"));
      if (auto c = arm.get("ooc_caching"))
        a.ooc_caching = read_bool(*c, arm.field("ooc_caching"));
      arm.finish();
      s.arms.push_back(a);
    }
  }
  if (auto n = sec.get("replications"))
    s.replications = read_u32(*n, sec.field("replications"), 1);
  if (auto n = sec.get("seed_base"))
    s.seed_base = read_count(*n, sec.field("seed_base"), 0);
  sec.finish();

  try {
    s.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what(), "sweep", line_of(node));
  }
  return s;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

ConfigError::ConfigError(const std::string &message, std::string field,
                         std::optional<int> line)
    : std::runtime_error(describe(message, field, line)),
      field_(std::move(field)), line_(line) {}

ParsedConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException &e) {
    throw ConfigError("syntax error: " + e.msg, {},
                      e.mark.is_null() ? std::nullopt
                                       : std::optional(e.mark.line + 1));
  }
  if (!root.IsDefined() || root.IsNull())
    throw ConfigError("empty configuration document");

  Section top(root, "");
  auto network = top.get("network");
  auto sweep = top.get("sweep");
  top.finish();
  if (!network)
    throw ConfigError("missing required section", "network");

  NetworkConfig base = read_network(*network);
  if (!sweep)
    return base;
  return read_sweep(*sweep, std::move(base));
}

ParsedConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_yaml(const SweepConfig &sweep) {
  const NetworkConfig &n = sweep.base;
  std::ostringstream out;
  out << "network:\n"
      << "  sources: " << n.sources << "\n"
      << "  hops: " << n.hops << "\n"
      << "  buffer_capacity: " << n.buffer_capacity << "\n"
      << "  credits: " << n.credits << "\n"
      << "  ooc_caching: " << (n.ooc_caching ? "true" : "false") << "\n"
      << "  window_control: " << (n.window_control ? "true" : "false") << "\n"
      << "  policy:\n"
      << "    increase: " << to_string(n.policy.increase) << "\n"
      << "    decrease: " << to_string(n.policy.decrease) << "\n"
      << "    init: " << to_string(n.policy.init) << "\n"
      << "    min_rule: " << to_string(n.policy.min_rule) << "\n"
      << "  pipe_size: " << to_string(n.pipe_size) << "\n"
      << "  service:\n"
      << "    distribution: " << to_string(n.distribution) << "\n"
      << "    cpu_time: " << fmt_double(n.cpu_time) << "\n"
      << "    link_times: [";
  for (std::size_t i = 0; i < n.link_times.size(); ++i)
    out << (i ? ", " : "") << fmt_double(n.link_times[i]);
  out << "]\n"
      << "  timeout_factor: " << fmt_double(n.timeout_factor) << "\n"
      << "  duration: " << fmt_double(n.duration) << "\n"
      << "  warmup: " << fmt_double(n.warmup) << "\n"
      << "  seed: " << n.seed << "\n";
  if (!n.fault_schedule.empty()) {
    out << "  fault_schedule:\n";
    for (const auto &f : n.fault_schedule)
      out << "    - {connection: " << f.connection
          << ", sequence: " << f.sequence << "}\n";
  }
  out << "sweep:\n"
      << "  variable: " << to_string(sweep.variable) << "\n"
      << "  values: [";
  for (std::size_t i = 0; i < sweep.values.size(); ++i)
    out << (i ? ", " : "") << sweep.values[i];
  out << "]\n  arms:\n";
  for (const auto &a : sweep.arms)
    out << "    - {window_control: " << (a.window_control ? "true" : "false")
        << ", ooc_caching: " << (a.ooc_caching ? "true" : "false") << "}\n";
  out << "  replications: " << sweep.replications << "\n"
      << "  seed_base: " << sweep.seed_base << "\n";
  return out.str();
}

} // namespace cute
