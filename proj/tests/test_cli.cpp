#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "lgm/inference.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = lgm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lgm_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string kData = std::string(LGM_TEST_DATA) + "/data/";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help matches the golden file") {
  const Result r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out == slurp(std::string(LGM_TEST_DATA) + "/golden/help.txt"));
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == lgm::cli::kConfigError);
  CHECK(run({"simulate", "--bogus"}).code == lgm::cli::kConfigError);
  const Result r = run({"simulate"});
  CHECK(r.code == lgm::cli::kConfigError);
  CHECK(r.err.find("no model") != std::string::npos);
  CHECK(run({"simulate", "--preset", "ex9"}).code == lgm::cli::kConfigError);
}

TEST_CASE("simulate is reproducible") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const std::vector<std::string> common = {"simulate", "--preset", "ex4", "--set", "grid.n_angles=60", "--seed", "9"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out-dir", a.string()});
  args_b.insert(args_b.end(), {"--out-dir", b.string(), "--threads", "1"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  for (const char* f : {"history.csv", "polylines.csv", "profiles.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f).rfind("# ", 0) == 0);
  }
}

TEST_CASE("ex3 simulation reports its observation times") {
  const fs::path d = scratch("ex3");
  REQUIRE(run({"simulate", "--preset", "ex3", "--set", "grid.n_angles=40", "--out-dir", d.string()}).code == 0);
  const lgm::ProfileDataset data = lgm::ingest_profiles((d / "profiles.csv").string(), "csv", false);
  CHECK(data.times == std::vector<double>{75.0, 100.0, 125.0});
}

TEST_CASE("config errors exit with code 2") {
  const Result malformed = run({"simulate", "--config", kData + "malformed.json"});
  CHECK(malformed.code == lgm::cli::kConfigError);
  CHECK(malformed.err.find("malformed.json") != std::string::npos);
  const Result unknown = run({"simulate", "--config", kData + "unknown_key.json"});
  CHECK(unknown.code == lgm::cli::kConfigError);
  CHECK(unknown.err.find("resolution") != std::string::npos);
  CHECK(run({"simulate", "--config", kData + "missing.json"}).code == lgm::cli::kConfigError);
  CHECK(run({"simulate", "--preset", "ex4", "--set", "model.basis.variance=-1"}).code != 0);
  CHECK(run({"simulate", "--preset", "ex4", "--set", "grid.n_angles"}).code == lgm::cli::kConfigError);
}

TEST_CASE("overrides merge over the preset") {
  nlohmann::json c = lgm::cli::preset_config("ex4");
  lgm::cli::apply_override(c, "model.basis.variance=2.5");
  lgm::cli::apply_override(c, "grid.n_angles=50");
  CHECK(c["model"]["basis"]["variance"] == 2.5);
  CHECK(lgm::cli::build_grid(c).n_angles() == 50);
  CHECK_NOTHROW(lgm::cli::validate_config(c));
  CHECK(lgm::cli::config_hash(c) != lgm::cli::config_hash(lgm::cli::preset_config("ex4")));
}

TEST_CASE("single harmonic covariance is proportional to cos") {
  const fs::path d = scratch("cov");
  REQUIRE(run({"cov", "--config", kData + "single_harmonic.json", "--out-dir", d.string()}).code == 0);
  std::ifstream is(d / "cov.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("# ", 0) == 0);
  std::getline(is, line);
  CHECK(line == "t1,t2,dphi,cov");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(is, line)) {
    double t1, t2, dphi, cov;
    char c;
    std::istringstream ls(line);
    ls >> t1 >> c >> t2 >> c >> dphi >> c >> cov;
    rows.emplace_back(dphi, cov);
  }
  REQUIRE(rows.size() == 6);
  const double c0 = rows.front().second;
  CHECK(c0 > 0.0);
  for (const auto& [dphi, cov] : rows) CHECK(cov == doctest::Approx(c0 * std::cos(dphi)).epsilon(1e-9).scale(c0));
}

TEST_CASE("mc-verify passes on a gaussian rectangular model") {
  const fs::path d = scratch("verify");
  const Result r = run({"mc-verify", "--config", kData + "gauss_rect.json", "--out-dir", d.string(), "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(slurp(d / "mc_verify.csv").rfind("# ", 0) == 0);
}

TEST_CASE("moments command") {
  const fs::path d = scratch("moments");
  REQUIRE(run({"moments", "--preset", "ex4", "--set", "grid.n_angles=40", "--out-dir", d.string()}).code == 0);
  const std::string text = slurp(d / "moments.csv");
  CHECK(text.rfind("# ", 0) == 0);
  CHECK(text.find("t,dphi,mean,cov") != std::string::npos);
}

TEST_CASE("fit round trip") {
  const fs::path d = scratch("fit");
  REQUIRE(run({"simulate", "--preset", "ex4", "--set", "grid.n_angles=100", "--replicates", "300", "--seed", "5",
               "--out-dir", d.string()})
              .code == 0);
  const Result r = run({"fit", "--preset", "ex4", "--dataset", (d / "profiles.csv").string(), "--out-dir", d.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("converged: true") != std::string::npos);
  const nlohmann::json report = nlohmann::json::parse(slurp(d / "fit.json"));
  CHECK(report["converged"] == true);
  CHECK(report["provenance"].get<std::string>().rfind("# ", 0) == 0);
  CHECK(std::abs(report["estimates"]["sigma2"].get<double>() - 1.0) < 0.3);
  CHECK(std::abs(report["estimates"]["Theta"].get<double>() - lgm::kPi / 5.0) < 0.2);
  const Result missing = run({"fit", "--preset", "ex4", "--out-dir", d.string()});
  CHECK(missing.code == lgm::cli::kConfigError);
}

}  // TEST_SUITE
