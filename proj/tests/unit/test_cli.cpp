// Drives the parahom binary end to end.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using parahom::cli::read_file;
using parahom::cli::sha256_hex;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("parahom_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PARAHOM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kConstant = R"({
  "lattice": {"d": 2, "n": 8, "n_t": 8, "L": 8},
  "ensemble": {"kind": "constant", "value": 2.0},
  "run": {"seed": 4, "samples": 3}
}
)";

const char* kBoard = R"({
  "lattice": {"d": 2, "n": 8, "n_t": 8, "L": 8},
  "ensemble": {"kind": "checkerboard", "mu": 0.5, "phases": [0.5, 2.0]},
  "run": {"seed": 9, "samples": 4}
}
)";

}  // namespace

TEST_CASE("effective on a constant medium: abar = 2I, tiny residuals [TRIVIAL]") {
  const fs::path d = scratch("eff");
  put(d / "c.json", kConstant);
  REQUIRE(run("effective --config " + (d / "c.json").string() + " --out " + (d / "run").string(), d / "log") == 0);
  const auto s = nlohmann::json::parse(read_file((d / "run" / "effective_summary.json").string()));
  CHECK(s["abar_mean"][0][0].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s["abar_mean"][1][1].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(s["abar_mean"][0][1].get<double>()) <= 1e-12);
  CHECK(s["residual_max"].get<double>() <= 1e-12);
  CHECK(fs::exists(d / "run" / "config.resolved.json"));
}

TEST_CASE("manifest checksums match the files; reruns are bit-identical") {
  const fs::path d = scratch("manifest");
  put(d / "c.json", kBoard);
  REQUIRE(run("effective --config " + (d / "c.json").string() + " --out " + (d / "a").string(), d / "log") == 0);
  REQUIRE(run("effective --config " + (d / "c.json").string() + " --out " + (d / "b").string() + " --workers 2",
              d / "log") == 0);
  const auto m = nlohmann::json::parse(read_file((d / "a" / "manifest.json").string()));
  CHECK(m["status"] == "complete");
  CHECK(m["seed"] == 9);
  CHECK(m["version"] == PARAHOM_VERSION);
  CHECK(m["files"].size() == 3);
  for (const auto& f : m["files"]) {
    const std::string name = f["name"];
    const std::string bytes = read_file((d / "a" / name).string());
    CHECK(sha256_hex(bytes) == f["sha256"]);
    CHECK(f["bytes"].get<std::size_t>() == bytes.size());
  }
  // worker count does not change numbers
  CHECK(read_file((d / "a" / "effective.csv").string()) == read_file((d / "b" / "effective.csv").string()));
  // --seed override changes them and is recorded
  REQUIRE(run("effective --config " + (d / "c.json").string() + " --out " + (d / "c").string() + " --seed 10",
              d / "log") == 0);
  CHECK(read_file((d / "a" / "effective.csv").string()) != read_file((d / "c" / "effective.csv").string()));
  const auto resolved = nlohmann::json::parse(read_file((d / "c" / "config.resolved.json").string()));
  CHECK(resolved["run"]["seed"] == 10);
}

TEST_CASE("PARAHOM_WORKERS is a fallback below --workers") {
  const fs::path d = scratch("workers");
  put(d / "c.json", kBoard);
  ::setenv("PARAHOM_WORKERS", "3", 1);
  REQUIRE(run("effective --config " + (d / "c.json").string() + " --out " + (d / "a").string(), d / "log") == 0);
  auto r = nlohmann::json::parse(read_file((d / "a" / "config.resolved.json").string()));
  CHECK(r["run"]["workers"] == 3);
  REQUIRE(run("effective --config " + (d / "c.json").string() + " --out " + (d / "b").string() + " --workers 2",
              d / "log") == 0);
  r = nlohmann::json::parse(read_file((d / "b" / "config.resolved.json").string()));
  CHECK(r["run"]["workers"] == 2);
  ::unsetenv("PARAHOM_WORKERS");
}

TEST_CASE("missing config: exit 2 and no artifacts [TRIVIAL]") {
  const fs::path d = scratch("missing");
  CHECK(run("effective --config " + (d / "nope.json").string() + " --out " + (d / "run").string(), d / "log") == 2);
  CHECK_FALSE(fs::exists(d / "run"));
}

TEST_CASE("schema violations are line-anchored and exit 2") {
  const fs::path d = scratch("schema");
  put(d / "c.json", "{\n  \"lattice\": {\"d\": 2, \"n\": 8, \"n_t\": 8, \"L\": 8},\n  \"run\": {\n    \"sed\": 1\n  }\n}\n");
  CHECK(run("effective --config " + (d / "c.json").string() + " --out " + (d / "run").string(), d / "log") == 2);
  const std::string log = read_file((d / "log").string());
  CHECK(log.find("c.json:4:") != std::string::npos);
  CHECK(log.find("/run/sed") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "run"));

  put(d / "t.json", "{\n  \"ensemble\": {\n    \"kind\": \"checkerboard\",\n    \"mu\": 2.0\n  }\n}\n");
  CHECK(run("effective --config " + (d / "t.json").string(), d / "log") == 2);
  CHECK(read_file((d / "log").string()).find("t.json:2:") != std::string::npos);

  put(d / "m.json", "{ \"run\": { \"samples\": \"many\" } }");
  CHECK(run("effective --config " + (d / "m.json").string(), d / "log") == 2);
  put(d / "x.json", "{ \"run\": ");
  CHECK(run("effective --config " + (d / "x.json").string(), d / "log") == 2);
}

TEST_CASE("config parser: defaults, lines and resolved output") {
  const parahom::cli::Config c = parahom::cli::parse_config(kBoard, "mem.json");
  CHECK(c.lattice.n == 8);
  CHECK(c.ensemble.kind == parahom::EnsembleKind::checkerboard);
  CHECK(c.run.samples == 4);
  CHECK(c.lines.at("/run/seed") == 4);
  const auto j = parahom::cli::to_json(c);
  const parahom::cli::Config back = parahom::cli::parse_config(j.dump(), "back.json");
  CHECK(parahom::cli::to_json(back) == j);
}

TEST_CASE("plotdata: growth series and error cases [TRIVIAL]") {
  const fs::path d = scratch("plot");
  put(d / "c.json", R"({
  "lattice": {"d": 2, "n": 16, "n_t": 32, "L": 16},
  "ensemble": {"kind": "checkerboard", "mu": 0.5, "phases": [0.5, 2.0]},
  "run": {"seed": 2, "samples": 2}
})");
  REQUIRE(run("fluxcor-verify --config " + (d / "c.json").string() + " --out " + (d / "run").string(), d / "log") == 0);
  REQUIRE(run("plotdata --run " + (d / "run").string(), d / "log") == 0);
  const std::string csv = read_file((d / "run" / "plotdata" / "plotdata.csv").string());
  CHECK(csv.rfind("x,y,series,stderr\n", 0) == 0);
  CHECK(csv.find(",rms,") != std::string::npos);
  CHECK(csv.find("2,2,mu_d,0") != std::string::npos);  // mu_2(2) = 2
  CHECK(fs::exists(d / "run" / "plotdata" / "manifest.json"));

  fs::create_directories(d / "empty");
  CHECK(run("plotdata --run " + (d / "empty").string(), d / "log") != 0);
  fs::create_directories(d / "partial");
  put(d / "partial" / "effective.csv", "sample\n");
  CHECK(run("plotdata --run " + (d / "partial").string(), d / "log") != 0);
}

TEST_CASE("rate plotdata is a log-log series") {
  const fs::path d = scratch("rate");
  put(d / "c.json", R"({
  "lattice": {"d": 2, "n": 8, "n_t": 8, "L": 8},
  "ensemble": {"kind": "checkerboard", "mu": 0.5, "phases": [0.5, 2.0], "corr_length": 0.25},
  "run": {"seed": 1, "samples": 2, "eps": [0.5, 0.25]},
  "twoscale": {"box": 0.5, "horizon": 0.0625, "abar": 1.08}
})");
  REQUIRE(run("rate --config " + (d / "c.json").string() + " --out " + (d / "run").string(), d / "log") == 0);
  const auto s = nlohmann::json::parse(read_file((d / "run" / "rate_summary.json").string()));
  CHECK(s["slope_defined"] == true);
  CHECK(s["per_eps"].size() == 2);
  REQUIRE(run("plotdata --run " + (d / "run").string(), d / "log") == 0);
  const std::string csv = read_file((d / "run" / "plotdata" / "plotdata.csv").string());
  CHECK(csv.find("-0.69314718055994") != std::string::npos);  // log(1/2)
  CHECK(csv.find("log_err") != std::string::npos);
}

TEST_CASE("dump-field writes a PHOM file") {
  const fs::path d = scratch("dump");
  put(d / "c.json", R"({
  "lattice": {"d": 2, "n": 8, "n_t": 8, "L": 8},
  "ensemble": {"kind": "checkerboard", "mu": 0.5, "phases": [0.5, 2.0]},
  "dump": {"field": "phi", "j": 1}
})");
  REQUIRE(run("dump-field --config " + (d / "c.json").string() + " --out " + (d / "run").string(), d / "log") == 0);
  const std::string bytes = read_file((d / "run" / "phi_2.phom").string());
  CHECK(bytes.substr(0, 4) == "PHOM");
  CHECK(bytes.size() == 20 + 8 * 512);
}
