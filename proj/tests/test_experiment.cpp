#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "common.hpp"
#include "orbitherm/experiment.hpp"

using namespace orbitherm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("orbitherm_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kCatPressure = R"({
  "system": {"name": "cat_map"},
  "potential": {"name": "zero"},
  "window": [6, 10],
  "filter": {"alphas": [0.9], "cs": [1.0, 0.5]},
  "seed": 42,
  "out": "unused"
})";

}  // namespace

TEST_CASE("config parsing: canonical round trip") {
  auto cfg = parse_config(kCatPressure);
  auto again = parse_config(cfg.canonical_json);
  CHECK(cfg.canonical_json == again.canonical_json);
  CHECK(cfg.config_hash == again.config_hash);
  CHECK(cfg.system_name == "cat_map");
  CHECK(cfg.window.lo == 6);
  CHECK(cfg.window.hi == 10);
}

TEST_CASE("config parsing: schema errors name the field") {
  CHECK_THROWS_WITH_AS(parse_config("{}"), doctest::Contains("system.name"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"system":{"name":"cat_map"},"window":[0,3]})"),
                       doctest::Contains("window"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"system":{"name":"cat_map"},"filter":{"cs":[2.0]}})"),
      doctest::Contains("filter.cs"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("unknown system names list the catalog") {
  auto cfg = parse_config(R"({"system":{"name":"lorenz"}})");
  try {
    run_experiment(cfg, "orbits");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    for (const auto& name : catalog_names())
      CHECK(msg.find(name) != std::string::npos);
  }
}

TEST_CASE("missing seed for stochastic commands is a schema error") {
  auto cfg = parse_config(R"({
    "system": {"name": "linear_horseshoe"},
    "escape": {"samples": 100000, "n_max": 10, "window": [4, 10]}
  })");
  CHECK_THROWS_WITH_AS(run_experiment(cfg, "escape"), doctest::Contains("seed"),
                       ConfigError);
}

TEST_CASE("pressure pipeline: summary, tables, exact CSV schema") {
  auto cfg = parse_config(kCatPressure);
  auto bundle = run_experiment(cfg, "pressure");
  CHECK(!bundle.status_error);
  auto summary = nlohmann::json::parse(bundle.summary_json);
  CHECK(summary["config_hash"] == cfg.config_hash);
  double est = summary["limits"][0]["estimate"].get<double>();
  CHECK(std::abs(est - 0.962424) <= 0.01);

  REQUIRE(!bundle.csv_files.empty());
  const auto& [name, content] = bundle.csv_files.front();
  CHECK(name == "pressure_a0_c0.csv");
  CHECK(content.substr(0, content.find('\n')) == "n,Q,logQ_over_n,count,fallback");

  // summary references only emitted tables
  for (const auto& t : summary["tables"]) {
    bool found = false;
    for (const auto& [fname, _] : bundle.csv_files) found = found || fname == t;
    CHECK(found);
  }
}

TEST_CASE("emit_report: files exist and the manifest round-trips the config") {
  auto dir = fresh_dir("emit");
  auto cfg = parse_config(kCatPressure);
  auto bundle = run_experiment(cfg, "pressure");
  auto paths = emit_report(bundle, dir.string());
  for (const auto& p : paths) CHECK(fs::exists(p));

  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config_hash"] == cfg.config_hash);
  auto embedded = parse_config(manifest["config"].dump());
  CHECK(embedded.canonical_json == cfg.canonical_json);
  for (const auto& f : manifest["files"]) CHECK(fs::exists(dir / f.get<std::string>()));
}

TEST_CASE("emit_report: byte-identical reruns for identical config and seed") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  auto cfg = parse_config(R"({
    "system": {"name": "linear_horseshoe"},
    "escape": {"samples": 50000, "n_max": 10, "window": [4, 10]},
    "seed": 4242, "threads": 3
  })");
  auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  emit_report(run_experiment(cfg, "escape"), d1.string());
  emit_report(run_experiment(cfg, "escape"), d2.string());
  for (const auto& entry : fs::directory_iterator(d1)) {
    auto name = entry.path().filename();
    CHECK_MESSAGE(slurp(entry.path()) == slurp(d2 / name), name.string());
  }
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("seed override changes the effective config hash") {
  auto cfg = parse_config(kCatPressure);
  auto shifted = with_overrides(cfg, 777, std::nullopt, std::nullopt);
  CHECK(shifted.config_hash != cfg.config_hash);
  // out/threads overrides do not touch the science hash
  auto moved = with_overrides(cfg, std::nullopt, 8, std::string("/tmp/elsewhere"));
  CHECK(moved.config_hash == cfg.config_hash);
}

TEST_CASE("volume command surfaces the no-saddle status") {
  auto cfg = parse_config(R"({
    "system": {"name": "example1_product"},
    "window": [3, 6],
    "orbits": {"seed_resolution": 5},
    "volume": {"alphas": [0.9], "cs": [1.0, 0.1]}
  })");
  auto bundle = run_experiment(cfg, "volume");
  REQUIRE(bundle.status_error);
  CHECK(bundle.status_error->find("no saddles") != std::string::npos);
}

TEST_CASE("orbit tables carry the configured alpha grid") {
  auto cfg = parse_config(R"({
    "system": {"name": "linear_horseshoe"},
    "window": [1, 4],
    "filter": {"alphas": [0.5, 1.0], "cs": [1.0]}
  })");
  auto bundle = run_experiment(cfg, "orbits");
  const auto& [name, content] = bundle.csv_files.front();
  CHECK(name == "orbits.csv");
  auto header = content.substr(0, content.find('\n'));
  CHECK(header ==
        "period,x0,x1,lambda_1,lambda_2,saddle,cmax_a0,cmax_a1,residual");
}

TEST_CASE("oracle command: reducible input is a runtime status") {
  auto cfg = parse_config(R"({
    "system": {"name": "cat_map"},
    "oracle": {"transitions": [[1, 1], [0, 1]], "weights": [1.0, 1.0]},
    "window": [1, 6]
  })");
  CHECK_THROWS_AS(run_experiment(cfg, "oracle"), std::domain_error);
}

TEST_CASE("CLI exit-code contract") {
  auto dir = fresh_dir("cli");
  auto write_cfg = [&](const std::string& name, const std::string& body) {
    std::ofstream f(dir / name);
    f << body;
    return (dir / name).string();
  };
  auto run = [&](const std::string& cmd, const std::string& cfg) {
    std::string line = std::string(ORBITHERM_CLI_PATH) + " " + cmd + " --config " +
                       cfg + " --out " + (dir / "out").string() + " > /dev/null 2>&1";
    int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };

  std::string ok_cfg = write_cfg("ok.json", R"({
    "system": {"name": "cat_map"},
    "oracle": {"transitions": [[1,1],[1,0]], "weights": [1.0, 1.0]},
    "window": [1, 6]})");
  CHECK(run("oracle", ok_cfg) == 0);

  std::string bad_cfg = write_cfg("bad.json", R"({
    "system": {"name": "linear_horseshoe"},
    "escape": {"samples": 100000, "n_max": 10, "window": [4, 10]}})");
  CHECK(run("escape", bad_cfg) == 2);  // missing seed

  std::string status_cfg = write_cfg("status.json", R"({
    "system": {"name": "example1_product"},
    "window": [3, 4],
    "orbits": {"seed_resolution": 4},
    "volume": {"alphas": [0.9], "cs": [1.0, 0.1]}})");
  CHECK(run("volume", status_cfg) == 3);  // no saddles
}

TEST_CASE("bound command emits the pass/fail ledger row") {
  auto cfg = parse_config(R"({
    "system": {"name": "linear_horseshoe"},
    "window": [1, 6],
    "escape": {"samples": 100000, "n_max": 12, "window": [5, 12]},
    "boxdim": {"scales": [0.25, 0.0625, 0.015625, 0.00390625, 0.0009765625],
               "source": "survivor", "depth": 10, "samples": 15000},
    "grid_resolution": 64,
    "seed": 42
  })");
  auto bundle = run_experiment(cfg, "bound");
  REQUIRE(bundle.checks.size() == 1);
  CHECK(bundle.checks[0].name == "dim_bound_check");
  CHECK(bundle.checks[0].pass);
}
