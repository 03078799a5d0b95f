#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "ftadsim/cli_app.hpp"

using namespace ftadsim;
using ftadsim::cli::run_cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ftadsim_cli_test_" + std::to_string(SplitMix64(std::random_device{}()).next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("exact command writes the six nonzero trajectories") {
  TempDir dir;
  const std::string out = dir.file("exact.json");
  CHECK(run_cli({"exact", "--delta", "0.77", "--p", "0.19", "--eta", "0.7", "--format", "json",
                 "--output", out}) == 0);

  const Json j = Json::parse(slurp(out));
  CHECK(j.at("trajectories").size() == 16);
  int nonzero = 0;
  for (const Json& row : j.at("trajectories")) {
    if (row.at("probability").get<double>() > 0.0) ++nonzero;
  }
  CHECK(nonzero == 6);
  CHECK(j.at("ft_value").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j.at("p_final").at(0).get<double>() == doctest::Approx(0.596).epsilon(1e-12));
  const double change = j.at("entropy_change").at("trajectory_average").get<double>();
  CHECK(change == doctest::Approx(0.13532388921783356).epsilon(1e-10));
}

TEST_CASE("exact at eta = 1 reports zero average entropy production") {
  TempDir dir;
  const std::string out = dir.file("exact.json");
  CHECK(run_cli({"exact", "--eta", "1.0", "--format", "json", "--output", out}) == 0);
  const Json j = Json::parse(slurp(out));
  CHECK(std::abs(j.at("avg_sigma").get<double>()) <= 1e-12);
}

TEST_CASE("angle form gives the same exact output as the probability form") {
  TempDir dir;
  const std::string out_prob = dir.file("prob.json");
  const std::string out_angle = dir.file("angle.json");
  CHECK(run_cli({"exact", "--delta", "0.77", "--p", "0.19", "--eta", "0.7", "--format", "json",
                 "--output", out_prob}) == 0);
  std::ostringstream phi, theta;
  phi.precision(17);
  theta.precision(17);
  phi << std::asin(std::sqrt(0.19));
  theta << std::acos(std::sqrt(0.7));
  CHECK(run_cli({"exact", "--delta", "0.77", "--phi", phi.str(), "--theta", theta.str(),
                 "--format", "json", "--output", out_angle}) == 0);

  const Json a = Json::parse(slurp(out_prob));
  const Json b = Json::parse(slurp(out_angle));
  CHECK(std::abs(a.at("p").get<double>() - b.at("p").get<double>()) <= 1e-12);
  CHECK(std::abs(a.at("eta").get<double>() - b.at("eta").get<double>()) <= 1e-12);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(std::abs(a.at("trajectories").at(i).at("probability").get<double>() -
                   b.at("trajectories").at(i).at("probability").get<double>()) <= 1e-12);
  }
}

TEST_CASE("mixing the two parameter forms is rejected") {
  TempDir dir;
  CHECK(run_cli({"exact", "--p", "0.19", "--phi", "0.3", "--output", dir.file("x.csv")}) == 1);
}

TEST_CASE("exact csv has the golden header and a summary sidecar") {
  TempDir dir;
  const std::string out = dir.file("exact.csv");
  CHECK(run_cli({"exact", "--output", out}) == 0);

  std::istringstream table(slurp(out));
  std::string header;
  std::getline(table, header);
  CHECK(header == "gamma,gamma_prime,j,probability,sigma");

  const std::string summary = slurp(dir.file("exact_summary.csv"));
  CHECK(summary.rfind("key,value\n", 0) == 0);
  CHECK(summary.find("avg_sigma,") != std::string::npos);
  CHECK(summary.find("ft_value,") != std::string::npos);
  CHECK(summary.find("entropy_change_trajectory,") != std::string::npos);
}

TEST_CASE("simulate is deterministic for a fixed seed and rejects N = 0") {
  TempDir dir;
  const std::string out1 = dir.file("sim1.csv");
  const std::string out2 = dir.file("sim2.csv");
  CHECK(run_cli({"simulate", "--counts", "5000", "--seed", "42", "--output", out1}) == 0);
  CHECK(run_cli({"simulate", "--counts", "5000", "--seed", "42", "--output", out2}) == 0);
  CHECK(slurp(out1) == slurp(out2));

  std::istringstream table(slurp(out1));
  std::string header;
  std::getline(table, header);
  CHECK(header == "eta,gamma,gamma_prime,j,count,est_prob,std_err,sigma,sigma_err");

  CHECK(run_cli({"simulate", "--counts", "0", "--output", dir.file("bad.csv")}) == 1);

  // Multinomial model: one joint acquisition of exactly N coincidences.
  const std::string multi = dir.file("multi.json");
  CHECK(run_cli({"simulate", "--counts", "5000", "--seed", "42", "--noise-model", "multinomial",
                 "--format", "json", "--output", multi}) == 0);
  const Json j = Json::parse(slurp(multi));
  CHECK(j.at("noise_model").get<std::string>() == "multinomial");
  std::uint64_t total = 0;
  for (const Json& row : j.at("records")) total += row.at("count").get<std::uint64_t>();
  CHECK(total == 5000);
}

TEST_CASE("simulate json round-trips into an estimate report") {
  TempDir dir;
  const std::string out = dir.file("sim.json");
  CHECK(run_cli({"simulate", "--counts", "20000", "--seed", "7", "--format", "json", "--output",
                 out}) == 0);
  const Json j = Json::parse(slurp(out));
  const EstimateReport report = report_from_json(j);
  CHECK(report.records.size() == 16);
  CHECK(report.fidelity > 0.99);
  CHECK(j.at("seed").get<std::uint64_t>() == 7);
  // Re-serializing the parsed report reproduces the record table exactly.
  RunConfig cfg{SourceParams::with_occupation(j.at("delta").get<double>()),
                FtadParams::from_probabilities(j.at("p").get<double>(), j.at("eta").get<double>()),
                j.at("counts_per_setting").get<std::uint64_t>(), j.at("seed").get<std::uint64_t>(),
                noise_model_from_string(j.at("noise_model").get<std::string>())};
  CHECK(report_to_json(report, cfg).at("records") == j.at("records"));
}

TEST_CASE("sweep writes per-point files, combined table and summary") {
  TempDir dir;
  const std::string out = dir.file("sweep.csv");
  CHECK(run_cli({"sweep", "--counts", "2000", "--seed", "9", "--eta-steps", "5", "--output",
                 out}) == 0);

  CHECK(fs::exists(dir.file("sweep_eta_000.csv")));
  CHECK(fs::exists(dir.file("sweep_eta_004.csv")));
  CHECK_FALSE(fs::exists(dir.file("sweep_eta_005.csv")));

  std::istringstream combined(slurp(out));
  std::string header;
  std::getline(combined, header);
  CHECK(header ==
        "eta,gamma,gamma_prime,j,count,est_prob,std_err,sigma,sigma_err,prob_theory,sigma_theory");
  int rows = 0;
  std::string line;
  while (std::getline(combined, line)) ++rows;
  CHECK(rows == 5 * 16);

  std::istringstream summary(slurp(dir.file("sweep_summary.csv")));
  std::getline(summary, header);
  CHECK(header == "eta,avg_sigma,avg_sigma_err,ft_value,ft_err,fidelity,avg_sigma_theory,ft_theory");
  rows = 0;
  while (std::getline(summary, line)) ++rows;
  CHECK(rows == 5);

  // Rerun is byte-identical.
  const std::string again = dir.file("sweep_again.csv");
  CHECK(run_cli({"sweep", "--counts", "2000", "--seed", "9", "--eta-steps", "5", "--output",
                 again}) == 0);
  CHECK(slurp(out) == slurp(again));
}

TEST_CASE("sweep json points re-parse and the ft curve covers 1") {
  TempDir dir;
  const std::string out = dir.file("sweep.json");
  CHECK(run_cli({"sweep", "--counts", "20000", "--seed", "11", "--eta-steps", "6", "--format",
                 "json", "--output", out}) == 0);

  const Json combined = Json::parse(slurp(out));
  REQUIRE(combined.at("points").size() == 6);
  int covered = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    const Json& point = combined.at("points").at(i);
    const EstimateReport report = report_from_json(point);

    // The standalone per-point file holds the identical report.
    char tag[32];
    std::snprintf(tag, sizeof(tag), "sweep_eta_%03zu.json", i);
    const EstimateReport standalone = report_from_json(Json::parse(slurp(dir.file(tag))));
    CHECK(standalone.records == report.records);
    CHECK(standalone.ft_value.value == report.ft_value.value);

    if (std::abs(report.ft_value.value - 1.0) <=
        std::max(5.0 * report.ft_value.std_err, 1e-12)) {
      ++covered;
    }
  }
  CHECK(covered >= 5);  // 5-sigma bands; allow one unlucky point
}

TEST_CASE("config file supplies values and flags override it") {
  TempDir dir;
  const std::string config = dir.file("config.json");
  {
    std::ofstream out(config);
    out << R"({"delta": 0.6, "p": 0.25, "eta": 0.5, "counts": 1000, "seed": 5,
               "format": "json"})";
  }
  const std::string out = dir.file("exact.json");
  CHECK(run_cli({"exact", "--config", config, "--eta", "0.9", "--output", out}) == 0);
  const Json j = Json::parse(slurp(out));
  CHECK(j.at("delta").get<double>() == 0.6);
  CHECK(j.at("p").get<double>() == 0.25);
  CHECK(j.at("eta").get<double>() == 0.9);  // flag wins over config

  const std::string bad_config = dir.file("bad.json");
  {
    std::ofstream outfile(bad_config);
    outfile << R"({"detla": 0.6})";
  }
  CHECK(run_cli({"exact", "--config", bad_config, "--output", dir.file("y.json")}) == 1);
}

TEST_CASE("seed falls back to the FTADSIM_SEED environment variable") {
  TempDir dir;
  ::setenv("FTADSIM_SEED", "31337", 1);
  const std::string out = dir.file("sim.json");
  CHECK(run_cli({"simulate", "--counts", "500", "--format", "json", "--output", out}) == 0);
  ::unsetenv("FTADSIM_SEED");
  CHECK(Json::parse(slurp(out)).at("seed").get<std::uint64_t>() == 31337);
}

TEST_CASE("verify passes on the default grid and fails on a corrupted channel") {
  TempDir dir;
  CHECK(run_cli({"verify", "--grid-points", "5", "--random-inputs", "2"}) == 0);

  const FtadParams params = FtadParams::from_probabilities(0.19, 0.7);
  Json good = channel_to_json(params, build_ftad(params));
  const std::string good_path = dir.file("channel.json");
  atomic_write_text(good_path, good.dump());
  CHECK(run_cli({"verify", "--grid-points", "3", "--random-inputs", "1", "--channel-file",
                 good_path}) == 0);

  good["operators"][0][0][0][0] = 0.9;
  const std::string bad_path = dir.file("corrupt.json");
  atomic_write_text(bad_path, good.dump());
  CHECK(run_cli({"verify", "--grid-points", "3", "--random-inputs", "1", "--channel-file",
                 bad_path}) == 2);
}

TEST_CASE("trace dumps stages and enforces normalization") {
  TempDir dir;
  const std::string out = dir.file("trace.json");
  CHECK(run_cli({"trace", "--a-re", "1", "--b-re", "0", "--p", "0.19", "--eta", "0.7",
                 "--output", out}) == 0);
  const Json j = Json::parse(slurp(out));
  for (const Json& term : j.at("stages").at("psi2")) {
    CHECK(term.at("pol").at(1).at(0).get<double>() == 0.0);
    CHECK(term.at("pol").at(1).at(1).get<double>() == 0.0);
  }

  // theta = pi/2 (eta = 0) on |1>: the (l_i, s_f) amplitude is sin(phi).
  const std::string jump = dir.file("jump.json");
  CHECK(run_cli({"trace", "--a-re", "0", "--b-re", "1", "--p", "0.19", "--eta", "0.0",
                 "--output", jump}) == 0);
  const Json jj = Json::parse(slurp(jump));
  bool found = false;
  for (const Json& term : jj.at("stages").at("psi6")) {
    if (term.at("lm_i") == "l_i" && term.at("lm_f") == "s_f") {
      found = true;
      CHECK(term.at("pol").at(1).at(0).get<double>() ==
            doctest::Approx(std::sqrt(0.19)).epsilon(1e-12));
    }
  }
  CHECK(found);

  // Unnormalized input is rejected without --subnormalized.
  CHECK(run_cli({"trace", "--a-re", "0.5", "--b-re", "0", "--output", dir.file("t1.json")}) == 1);
  CHECK(run_cli({"trace", "--a-re", "0.5", "--b-re", "0", "--subnormalized", "--output",
                 dir.file("t2.json")}) == 0);

  // Masked trace shows only the open path.
  const std::string masked = dir.file("masked.json");
  CHECK(run_cli({"trace", "--paths", "l_i:l_f", "--output", masked}) == 0);
  CHECK(Json::parse(slurp(masked)).at("stages").at("psi6").size() == 1);
}

TEST_CASE("unknown arguments and missing subcommands exit with code 1") {
  CHECK(run_cli({"exact", "--frequency", "11"}) == 1);
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"nonsense"}) == 1);
}
