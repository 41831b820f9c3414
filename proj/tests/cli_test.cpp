// Runs the command-line tool as a subprocess and checks exit codes and
// artifacts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string data_dir = TSCOPF_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tscopf_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(TSCOPF_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string base_args() { return "--case " + data_dir + "/wecc9.json --load-scale 1.5"; }

std::string contingency(int n) { return " --contingency " + data_dir + "/contingency" + std::to_string(n) + ".json"; }

}  // namespace

TEST_CASE("opf writes a balanced dispatch") {
  const fs::path out = scratch("opf");
  REQUIRE(run("opf " + base_args() + " --out " + out.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(out / "dispatch.json"));
  double generation = 0.0;
  for (double p : doc["p"]) generation += p;
  const double load = 1.5 * (1.25 + 0.9 + 1.0);
  CHECK(generation > load);
  CHECK(generation < 1.02 * load);
  CHECK(doc["objective"].get<double>() == doctest::Approx(10133.714).epsilon(1e-6));
  fs::remove_all(out);
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("codes");
  CHECK(run("opf --case " + data_dir + "/wecc9.json --load-scale 10 --out " + out.string()) == 2);
  CHECK(run("opf --case " + data_dir + "/nope.json --out " + (out / "a").string()) == 1);
  CHECK(run("tscopf " + base_args() + contingency(1) + " --dt 7ms --out " + (out / "b").string()) == 1);
  CHECK(run("tscopf " + base_args() + " --out " + (out / "c").string()) == 1);
  CHECK(run("bogus") == 1);
  CHECK(run("tscopf " + base_args() + contingency(1) + " --correction twice --out " + (out / "d").string()) == 1);
  fs::remove_all(out);
}

TEST_CASE("tscopf writes the full trajectory and refuses to overwrite") {
  const fs::path out = scratch("tscopf");
  const std::string args = "tscopf " + base_args() + contingency(1) + " --dt 10ms --correction none --dump-nlp";
  REQUIRE(run(args + " --out " + out.string()) == 0);
  const auto rows = read_csv(out / "trajectories.csv");
  CHECK(rows.size() == 501);
  CHECK(rows.back()[0] == doctest::Approx(5.0));
  CHECK(fs::exists(out / "nlp_stats.json"));
  CHECK(fs::exists(out / "nlp.json"));
  const auto stats = nlohmann::json::parse(slurp(out / "nlp_stats.json"));
  CHECK(stats["status"] == "optimal");

  const std::string csv = slurp(out / "trajectories.csv");
  const std::string dispatch = slurp(out / "dispatch.json");
  const std::string stats_text = slurp(out / "nlp_stats.json");
  CHECK(run(args + " --out " + out.string()) == 1);
  REQUIRE(run(args + " --out " + out.string() + " --force") == 0);
  CHECK(slurp(out / "trajectories.csv") == csv);
  CHECK(slurp(out / "dispatch.json") == dispatch);
  CHECK(slurp(out / "nlp_stats.json") == stats_text);
  fs::remove_all(out);
}

TEST_CASE("severe contingency drives G3 to the angle bound") {
  const fs::path out = scratch("tscopf2");
  REQUIRE(run("tscopf " + base_args() + contingency(2) + " --out " + out.string()) == 0);
  const auto rows = read_csv(out / "trajectories.csv");
  const double h[3] = {23.64, 6.4, 3.01};
  double peak = 0.0;
  for (const auto& r : rows) {
    const double coi = (h[0] * r[1] + h[1] * r[2] + h[2] * r[3]) / (h[0] + h[1] + h[2]);
    peak = std::max(peak, std::abs(r[3] - coi));
  }
  CHECK(std::abs(peak - 100.0 * std::numbers::pi / 180.0) < 1e-3);
  fs::remove_all(out);
}

TEST_CASE("simulate and reduce") {
  const fs::path out = scratch("sim");
  REQUIRE(run("simulate " + base_args() + contingency(1) + " --dt 1ms --out " + out.string()) == 0);
  CHECK(read_csv(out / "trajectories.csv").size() == 5001);
  const fs::path red = scratch("reduce");
  REQUIRE(run("reduce " + base_args() + contingency(1) + " --out " + red.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(red / "reduced_network.json"));
  CHECK(doc["post_fault"]["y_red"].size() == 3);
  CHECK(doc["during_fault"]["stage"] == "during_fault");
  fs::remove_all(out);
  fs::remove_all(red);
}

TEST_CASE("compare writes the MAE table and one plot series per variant") {
  const fs::path out = scratch("compare");
  const fs::path cfg = scratch("compare_config.json");
  {
    std::ofstream f(cfg);
    f << "{\"case\": \"" << data_dir << "/wecc9.json\", \"load_scale\": 1.5, \"contingencies\": [\"" << data_dir
      << "/contingency1.json\"], \"out\": \"/nonexistent/overridden\"}";
  }
  REQUIRE(run("compare --config " + cfg.string() + " --out " + out.string()) == 0);
  const fs::path dir = out / "contingency1";
  const std::string md = slurp(dir / "report.md");
  CHECK(md.find("w/o correction 10 ms") != std::string::npos);
  CHECK(md.find("w/o correction 1 ms") != std::string::npos);
  CHECK(md.find("w correction 10 ms") != std::string::npos);
  CHECK(md.find("w correction 1 ms") != std::string::npos);
  CHECK(md.find("benchmark 10 ms") != std::string::npos);
  for (const char* q : {"delta", "omega"}) {
    for (int g = 1; g <= 3; ++g) {
      const std::string svg = slurp(dir / (std::string(q) + "_g" + std::to_string(g) + ".svg"));
      std::size_t lines = 0;
      for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
      CHECK(lines == 6);
    }
  }
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["variants"].size() == 5);
  fs::remove_all(out);
  fs::remove(cfg);
}
