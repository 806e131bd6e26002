#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/erf.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lss/cli.hpp"

namespace fs = std::filesystem;
using lss::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lss_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("threshold command") {
  auto r = run({"threshold", "--detectors", "HDL", "--M", "70", "--L", "30", "--pfa", "0.5,0.01"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "detector,M,L,pfa,mean,variance,threshold");
  CHECK(rows[1] == "HDL,70,30,0.5,70,2.33333333333,70");
  const double tau = std::stod(rows[2].substr(rows[2].rfind(',') + 1));
  const double expected = 70.0 + std::sqrt(7.0 / 3.0) * std::sqrt(2.0) * boost::math::erfc_inv(0.02);
  CHECK_THAT(tau, Catch::Matchers::WithinAbs(expected, 1e-9));
  CHECK_THAT(tau, Catch::Matchers::WithinAbs(73.5533, 5e-4));

  r = run({"threshold", "--pfa", "1.5"});
  CHECK(r.code == 1);
  r = run({"threshold", "--detectors", "GLR", "--pfa", "0.1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("no closed-form null") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"null-dist", "--trials", "0"}).code == 1);
  CHECK(run({"null-dist", "--M", "x"}).code == 1);
  CHECK(run({"roc", "--channel", "exp:2", "--out", scratch("bad_channel").string()}).code == 1);
  CHECK(run({"pd-vs-snr", "--out", scratch("empty_snr").string()}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("unwritable output path exits with code 2") {
  const auto dir = scratch("io");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  const auto r = run({"null-dist", "--trials", "10", "--out", (dir / "file" / "sub").string()});
  CHECK(r.code == 2);
}

TEST_CASE("null-dist writes per-detector samples and a summary") {
  const auto dir = scratch("nulldist");
  const auto r = run({"null-dist", "--M", "90", "--L", "30", "--trials", "300", "--seed", "7",
                      "--out", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* d : {"hdl", "hds", "hdq"}) {
    const auto rows = lines(slurp(dir / ("nulldist_" + std::string(d) + ".csv")));
    REQUIRE(rows.size() == 301);
    CHECK(rows[0] == "trial,statistic");
    CHECK(rows[1].rfind("0,", 0) == 0);
  }
  const auto summary = lines(slurp(dir / "nulldist_summary.csv"));
  REQUIRE(summary.size() == 4);
  CHECK(summary[0] == "detector,M,L,theory_mean,theory_var,sample_mean,sample_var,ks_stat,n");
  CHECK(summary[1].rfind("HDL,90,30,90,3,", 0) == 0);
  CHECK(summary[2].rfind("HDS,90,30,360,210,", 0) == 0);
  CHECK(summary[3].rfind("HDQ,90,30,270,126,", 0) == 0);
  CHECK(summary[1].substr(summary[1].rfind(',') + 1) == "300");
  const auto manifest = slurp(dir / "run_manifest.json");
  CHECK(manifest.find("\"config_digest\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("same seed gives byte-identical CSVs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const std::vector<std::string> common{"roc", "--M", "20", "--L", "30", "--trials", "300",
                                        "--seed", "11", "--snr-db", "-12", "--channel", "exp:0.5",
                                        "--detectors", "HDL,HDS,HDQ,GLR,FN,RAO"};
  auto args = common;
  args.insert(args.end(), {"--out", a.string()});
  REQUIRE(run(args).code == 0);
  args = common;
  args.insert(args.end(), {"--out", b.string()});
  REQUIRE(run(args).code == 0);
  CHECK(slurp(a / "roc.csv") == slurp(b / "roc.csv"));
  const auto rows = lines(slurp(a / "roc.csv"));
  CHECK(rows[0] == "detector,pfa_target,threshold,pd_hat,pfa_hat,ci_halfwidth,trials,seed");
  CHECK(rows.size() == 1 + 6 * 20);
  CHECK(rows[1].substr(rows[1].size() - 7) == ",300,11");
}

TEST_CASE("pd-vs-snr accepts negative and infinite SNR lists") {
  const auto dir = scratch("pdsnr");
  auto r = run({"pd-vs-snr", "--M", "10", "--L", "20", "--trials", "200", "--pfa", "0.1",
                "--snr-db=-inf,-20,-10,0", "--out", dir.string()});
  REQUIRE(r.code == 0);
  auto rows = lines(slurp(dir / "pd_vs_snr.csv"));
  REQUIRE(rows.size() == 1 + 3 * 4);
  CHECK(rows[0] == "detector,snr_db,pd_hat,ci_halfwidth");
  CHECK(rows[1].rfind("HDL,-inf,", 0) == 0);
  r = run({"pd-vs-snr", "--trials", "50", "--snr-db", "-5", "0", "--out", dir.string()});
  REQUIRE(r.code == 0);
  rows = lines(slurp(dir / "pd_vs_snr.csv"));
  CHECK(rows.size() == 1 + 3 * 2);
}

TEST_CASE("config file values yield to command-line flags") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "M = 40\nL = 20\npfa = 0.1\n";
  auto r = run({"threshold", "--config", (dir / "run.ini").string(), "--detectors", "HDL"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out)[1].rfind("HDL,40,20,0.1,", 0) == 0);
  r = run({"threshold", "--config", (dir / "run.ini").string(), "--detectors", "HDL", "--M", "10"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out)[1].rfind("HDL,10,20,0.1,", 0) == 0);
  CHECK(run({"threshold", "--config", (dir / "missing.ini").string()}).code == 1);
}

TEST_CASE("verify negative control and node refinement") {
  auto find = [](const std::vector<lss::cli::VerifyCheck>& checks, const std::string& name) {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    FAIL("missing check " << name);
    return checks.front();
  };
  const auto base = lss::cli::run_verify_suite({});
  CHECK(find(base, "null_moments.monte_carlo").passed);
  for (const char* g : {"linear", "square", "quadratic"}) {
    CHECK(find(base, std::string("contour.") + g + ".node_doubling").passed);
  }

  lss::cli::VerifyOptions faulty;
  faulty.inject_fault = true;
  CHECK_FALSE(find(lss::cli::run_verify_suite(faulty), "null_moments.monte_carlo").passed);

  const auto r = run({"verify", "--inject-fault"});
  CHECK(r.code == 3);
  CHECK(r.err.find("null_moments.monte_carlo") != std::string::npos);
  CHECK(r.out.find("FAIL  null_moments.monte_carlo") != std::string::npos);

  // The node-doubling delta measures the error at the coarser rule, so it
  // must shrink (down to rounding) as the base node count grows.
  lss::cli::VerifyOptions coarse;
  coarse.nodes = 256;
  const auto low = lss::cli::run_verify_suite(coarse);
  lss::cli::VerifyOptions fine;
  fine.nodes = 4096;
  const auto high = lss::cli::run_verify_suite(fine);
  for (const char* g : {"linear", "square", "quadratic"}) {
    const auto name = std::string("contour.") + g + ".node_doubling";
    INFO(name);
    CHECK(find(high, name).measured <= std::max(find(low, name).measured, 1e-12));
  }
  CHECK(run({"verify", "--nodes", "100"}).code == 1);
}
