#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cute/config_io.hpp"
#include "cute/experiment.hpp"

using namespace cute;

namespace {

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path temp_file(const std::string &name) {
  return std::filesystem::temp_directory_path() /
         ("cute_test_" + std::to_string(::getpid()) + "_" + name);
}

SweepConfig tiny_sweep() {
  SweepConfig s;
  s.base.sources = 2;
  s.base.hops = 3;
  s.base.buffer_capacity = 10;
  s.base.duration = 300.0;
  s.base.warmup = 50.0;
  s.variable = SweepVariable::Credits;
  s.values = {2, 5, 9};
  s.replications = 2;
  s.base.distribution = ServiceDistribution::Exponential;
  return s;
}

ResultRow row_with(std::vector<double> t) {
  ResultRow r;
  r.replication = 0;
  r.seed = 1;
  r.metrics.throughputs = std::move(t);
  for (double v : r.metrics.throughputs)
    r.metrics.total_throughput += v;
  return r;
}

std::string expect_config_error(const std::string &text) {
  try {
    parse_config(text);
  } catch (const ConfigError &e) {
    return e.what();
  }
  FAIL("no ConfigError for:\n" << text);
  return {};
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("presets") {
  const auto c1 = preset("case1");
  CHECK(c1.base.sources == 3);
  CHECK(c1.base.buffer_capacity == 42);
  CHECK(c1.variable == SweepVariable::Credits);
  CHECK(c1.values.front() < 14);
  CHECK(c1.values.back() * 3 > 42 * 2);
  CHECK(c1.arms == all_arms());

  const auto c2 = preset("case2");
  CHECK(c2.base.credits == 8);
  CHECK(c2.base.buffer_capacity == 80);
  CHECK(c2.variable == SweepVariable::Sources);
  CHECK(std::any_of(c2.values.begin(), c2.values.end(),
                    [](std::uint32_t n) { return n * 8 > 80; }));
  CHECK(std::any_of(c2.values.begin(), c2.values.end(),
                    [](std::uint32_t n) { return n * 8 < 80; }));
  CHECK(c2.arms.size() == 4);

  CHECK_THROWS_AS(preset("case3"), std::invalid_argument);
  CHECK(preset_names() == std::vector<std::string>{"case1", "case2"});
}

TEST_CASE("preset files match the built-in presets") {
  for (const auto &name : preset_names()) {
    const auto path =
        std::filesystem::path(CUTE_SOURCE_DIR) / "presets" / (name + ".yaml");
    const auto parsed = load_config(path);
    REQUIRE(std::holds_alternative<SweepConfig>(parsed));
    CHECK(std::get<SweepConfig>(parsed) == preset(name));
  }
}

TEST_CASE("yaml round trip") {
  auto s = tiny_sweep();
  s.base.policy.increase = LinearEvery{3};
  s.base.policy.decrease = DecreasePolicy::Binary;
  s.base.policy.init = InitPolicy::Remembered;
  s.base.policy.min_rule = MinHopsTimes{2};
  s.base.pipe_size = PipeSizeRule::Analytic;
  s.base.link_times = {0.1, 0.7, 1.0 / 3.0};
  s.base.fault_schedule = {{1, 4}, {0, 9}};
  s.arms = {{false, true}};
  const auto parsed = parse_config(to_yaml(s));
  REQUIRE(std::holds_alternative<SweepConfig>(parsed));
  CHECK(std::get<SweepConfig>(parsed) == s);
}

TEST_CASE("parse a single-run document") {
  const auto parsed = parse_config(R"(network:
  sources: 4
  hops: 2
  credits: 5
  service:
    distribution: exponential
    link_times: 0.25
  policy: {increase: "linear:4", min_rule: hops}
)");
  REQUIRE(std::holds_alternative<NetworkConfig>(parsed));
  const auto &n = std::get<NetworkConfig>(parsed);
  CHECK(n.sources == 4);
  CHECK(n.credits == 5);
  CHECK(n.link_times == std::vector<double>{0.25});
  CHECK(n.distribution == ServiceDistribution::Exponential);
  CHECK(n.policy.increase == IncreasePolicy{LinearEvery{4}});
  CHECK(n.policy.min_rule == MinRule{MinHops{}});
}

TEST_CASE("configuration errors carry field and line") {
  SUBCASE("zero buffer") {
    const auto msg = expect_config_error("network:\n  buffer_capacity: 0\n");
    CHECK(msg.find("buffer_capacity") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
  }
  SUBCASE("misspelled key") {
    const auto msg =
        expect_config_error("network:\n  sources: 2\n  bufer_capacity: 3\n");
    CHECK(msg.find("unknown key 'bufer_capacity'") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  SUBCASE("misspelled nested key") {
    const auto msg = expect_config_error(
        "network:\n  policy:\n    decrese: binary\n");
    CHECK(msg.find("network.policy.decrese") != std::string::npos);
  }
  SUBCASE("syntax error") {
    const auto msg = expect_config_error("network:\n  sources: [1, 2\n");
    CHECK(msg.find("line") != std::string::npos);
  }
  SUBCASE("bad enum") {
    const auto msg = expect_config_error(
        "network:\n  policy:\n    decrease: sometimes\n");
    CHECK(msg.find("decrease") != std::string::npos);
  }
  SUBCASE("wrong type") {
    CHECK(expect_config_error("network:\n  credits: many\n").find("credits") !=
          std::string::npos);
  }
  SUBCASE("cross-field invariant") {
    const auto msg =
        expect_config_error("network:\n  duration: 10\n  warmup: 20\n");
    CHECK(msg.find("warmup") != std::string::npos);
  }
  SUBCASE("sweep values must increase") {
    const auto msg = expect_config_error(
        "network: {}\nsweep:\n  variable: credits\n  values: [4, 2]\n");
    CHECK(msg.find("increasing") != std::string::npos);
  }
  SUBCASE("missing network section") {
    expect_config_error("sweep:\n  variable: credits\n  values: [1]\n");
  }
  SUBCASE("unknown top-level key") {
    CHECK(expect_config_error("network: {}\nnetwrok: {}\n").find("netwrok") !=
          std::string::npos);
  }
  SUBCASE("missing file") {
    CHECK_THROWS(load_config("/nonexistent/cute.yaml"));
  }
}

TEST_CASE("sweep validation") {
  auto s = tiny_sweep();
  s.values = {};
  CHECK_THROWS(s.validate());
  s = tiny_sweep();
  s.values = {3, 3};
  CHECK_THROWS(s.validate());
  s = tiny_sweep();
  s.replications = 0;
  CHECK_THROWS(s.validate());
  s = tiny_sweep();
  s.arms.clear();
  CHECK_THROWS(s.validate());
}

TEST_CASE("point configuration") {
  const auto s = tiny_sweep();
  const auto p = point_config(s, {false, true}, 5, 1);
  CHECK(p.credits == 5);
  CHECK_FALSE(p.window_control);
  CHECK(p.ooc_caching);
  CHECK(p.seed == s.seed_base + 1);
}

TEST_CASE("run_sweep row order and replication means") {
  const auto s = tiny_sweep();
  const auto rows = run_sweep(s, 1);
  REQUIRE(rows.size() == s.arms.size() * s.values.size() * 3);
  std::size_t i = 0;
  for (const auto &arm : s.arms)
    for (auto v : s.values) {
      for (std::uint32_t r = 0; r < 2; ++r, ++i) {
        CHECK(rows[i].arm == arm);
        CHECK(rows[i].sweep_value == v);
        CHECK(rows[i].replication == r);
        CHECK(rows[i].seed == s.seed_base + r);
      }
      const auto &mean = rows[i++];
      CHECK_FALSE(mean.replication.has_value());
      CHECK(mean.metrics.total_throughput ==
            doctest::Approx((rows[i - 3].metrics.total_throughput +
                             rows[i - 2].metrics.total_throughput) /
                            2));
    }
}

TEST_CASE("run_sweep is independent of thread count") {
  const auto s = tiny_sweep();
  const auto one = format_csv(run_sweep(s, 1));
  CHECK(one == format_csv(run_sweep(s, 3)));
  CHECK(one == format_csv(run_sweep(s, 0)));
}

TEST_CASE("run_sweep names the failing point") {
  auto s = tiny_sweep();
  s.base.hops = 4;
  s.base.policy.min_rule = MinHops{};
  s.values = {2, 6};
  try {
    run_sweep(s, 1);
    FAIL("expected a SweepError");
  } catch (const SweepError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("credits=2") != std::string::npos);
    CHECK(msg.find("replication 0") != std::string::npos);
  }
}

TEST_CASE("mean of optional metrics skips missing values") {
  SummaryMetrics a, b;
  a.throughputs = {1.0};
  b.throughputs = {3.0, 2.0};
  a.mean_response = 4.0;
  const SummaryMetrics reps[] = {a, b};
  const auto m = mean_metrics(reps);
  CHECK(m.throughputs == std::vector<double>{2.0, 1.0});
  CHECK(m.mean_response == 4.0);
  CHECK_FALSE(m.power.has_value());
}

TEST_CASE("csv format") {
  SUBCASE("header and one row") {
    auto r = row_with({0.5, 0.25, 0.125});
    r.metrics.fairness = 0.75;
    const ResultRow rows[] = {r};
    CHECK(format_csv(rows) ==
          "arm_control,arm_caching,sweep_var,sweep_value,replication,seed,"
          "total_throughput,mean_response,power,fairness,loss_prob,t1,t2,t3\n"
          "1,1,none,,0,1,0.875,,,0.75,0,0.5,0.25,0.125\n");
  }
  SUBCASE("six significant digits") {
    const ResultRow rows[] = {row_with({1.0 / 3.0})};
    CHECK(format_csv(rows).find(",0.333333\n") != std::string::npos);
  }
  SUBCASE("short rows are blank padded") {
    auto mean = row_with({1.0});
    mean.replication.reset();
    mean.seed.reset();
    const ResultRow rows[] = {row_with({1.0, 2.0, 3.0}), mean};
    const auto text = format_csv(rows);
    CHECK(text.ends_with("1,1,none,,mean,,1,,,,0,1,,\n"));
  }
  SUBCASE("empty input") {
    CHECK_THROWS(format_csv(std::span<const ResultRow>{}));
  }
}

TEST_CASE("emit_csv writes identical bytes on re-emit") {
  const auto rows = run_sweep(tiny_sweep(), 1);
  const auto path = temp_file("emit.csv");
  emit_csv(rows, path);
  const auto first = read_file(path);
  emit_csv(rows, path);
  CHECK(read_file(path) == first);
  CHECK(first == format_csv(rows));
  CHECK(first.back() == '\n');
  std::filesystem::remove(path);
  CHECK_THROWS(emit_csv(rows, "/nonexistent/dir/out.csv"));
}

}
