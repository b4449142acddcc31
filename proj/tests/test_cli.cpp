#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "wlgp/gaussian.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return std::getenv("WLGP_CLI"); }

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string(cli_path()) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  CmdResult r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), p)) > 0) {
    r.out.append(buf, got);
  }
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// fixture: a simulated track written as movement CSV, 30 s cadence so the
// half-minute bins each hold one record
fs::path fixture_dir() {
  const fs::path dir = fs::temp_directory_path() / "wlgp_cli_fixtures";
  fs::create_directories(dir);
  return dir;
}

fs::path write_track_csv() {
  const fs::path path = fixture_dir() / "track.csv";
  if (fs::exists(path)) return path;
  wlgp::KernelModel truth{wlgp::WeightedLogExp{1.7, 0.044}};
  wlgp::TimeGrid grid = wlgp::uniform_grid(60.0, 120);
  auto sim = wlgp::simulate_paths(truth, grid, 1, 42u);
  std::ofstream out(path);
  out << "timestamp,location-long,location-lat\n";
  out << "1561670971,0.0,1.0\n";  // the origin record
  for (int i = 0; i < 120; ++i) {
    out << 1561670971 + 30 * (i + 1) << "," << sim.paths(i, 0) << ","
        << 1.0 + 0.5 * sim.paths(i, 0) << "\n";
  }
  return path;
}

}  // namespace

TEST_CASE("CLI end-to-end") {
  if (cli_path() == nullptr) {
    SKIP("WLGP_CLI not set; run through ctest");
  }

  SECTION("simulate is deterministic for a fixed seed") {
    const std::string args =
        "simulate --model integrated_ou --sigma 1 --beta 0.5 --horizon 4 "
        "--n 6 --paths 2 --seed 11";
    auto a = run_cli(args);
    auto b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.substr(0, 19) == "time,path_0,path_1\n");
    auto c = run_cli(args + "1");  // different seed: 111
    CHECK(c.out != a.out);
  }

  SECTION("fit emits a model JSON that predict can consume") {
    const fs::path csv = write_track_csv();
    const fs::path fit_json = fixture_dir() / "fit.json";
    auto fit = run_cli("fit --data " + csv.string() +
                       " --family weighted_log_exp --out " +
                       fit_json.string());
    REQUIRE(fit.exit_code == 0);
    std::ifstream in(fit_json);
    json doc = json::parse(in);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["family"] == "weighted_log_exp");
    CHECK(doc["sigma_hat"].get<double>() > 0.0);
    CHECK(doc["beta_hat"].get<double>() > 0.0);
    CHECK(doc["model"]["family"] == "weighted_log_exp");
    CHECK(doc["preprocessing"]["binned_points"].get<int>() == 121);
    CHECK(doc["n_obs"].get<int>() == 120);
    CHECK(doc["sigma_ci"].size() == 2);
    CHECK(doc["profile"].size() > 10);

    const fs::path metrics = fixture_dir() / "metrics.json";
    auto pred = run_cli("predict --data " + csv.string() + " --model-file " +
                        fit_json.string() +
                        " --train-fraction 0.9 --metrics-out " +
                        metrics.string());
    REQUIRE(pred.exit_code == 0);
    CHECK(pred.out.substr(0, 31) == "time,observed,mean,lower,upper\n");
    CHECK(std::count(pred.out.begin(), pred.out.end(), '\n') == 14);
    std::ifstream min(metrics);
    json mdoc = json::parse(min);
    CHECK(mdoc["n_test"].get<int>() == 13);
    CHECK(mdoc["relative_error"].get<double>() >= 0.0);
    CHECK(mdoc["sd_normalized_error"].get<double>() >= 0.0);
  }

  SECTION("compare ranks families") {
    const fs::path csv = write_track_csv();
    auto cmp = run_cli("compare --data " + csv.string() +
                       " --families weighted_log_exp,fbm --out -");
    REQUIRE(cmp.exit_code == 0);
    json doc = json::parse(cmp.out);
    REQUIRE(doc["results"].size() == 2);
    CHECK(doc["results"][0]["aic"].get<double>() <=
          doc["results"][1]["aic"].get<double>());
    CHECK(doc["results"][0]["delta_aic"].get<double>() == 0.0);
    const std::string best = doc["best_family"].get<std::string>();
    CHECK((best == "weighted_log_exp" || best == "fbm"));
  }

  SECTION("diagnose writes the report and companion tables") {
    const fs::path csv = write_track_csv();
    const fs::path prefix = fixture_dir() / "diag";
    auto d = run_cli("diagnose --data " + csv.string() +
                     " --csv-prefix " + prefix.string() + " --out -");
    REQUIRE(d.exit_code == 0);
    json doc = json::parse(d.out);
    CHECK(doc["kpss_level"]["critical_5pct"].get<double>() == 0.463);
    CHECK(doc["kpss_difference"].contains("statistic"));
    CHECK(doc["acf_level"].size() == 51);
    CHECK(fs::exists(prefix.string() + "_rolling.csv"));
    CHECK(fs::exists(prefix.string() + "_acf_level.csv"));
    CHECK(fs::exists(prefix.string() + "_acf_diff.csv"));
  }

  SECTION("config file supplies defaults that flags override") {
    const fs::path cfg = fixture_dir() / "cfg.json";
    {
      std::ofstream out(cfg);
      out << R"({"model": "fbm", "hurst": 0.6, "horizon": 2.0, "n": 4, )"
          << R"("seed": 5})";
    }
    auto a = run_cli("simulate --config " + cfg.string());
    REQUIRE(a.exit_code == 0);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 5);  // header + 4
    auto b = run_cli("simulate --config " + cfg.string() + " --n 2");
    CHECK(std::count(b.out.begin(), b.out.end(), '\n') == 3);
  }

  SECTION("exit codes distinguish usage, data, and numerical failures") {
    CHECK(run_cli("simulate --model nope --horizon 1 --n 2").exit_code == 1);
    CHECK(run_cli("fit --data /no/such/file.csv").exit_code == 2);
    CHECK(run_cli("simulate --model weighted_log --weight \"exp(80*u)\" "
                  "--horizon 120 --n 3")
              .exit_code == 3);
  }
}
