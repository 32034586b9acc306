#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#ifndef THERMIES_CLI_PATH
#define THERMIES_CLI_PATH "thermies"
#endif
#ifndef THERMIES_DATA_DIR
#define THERMIES_DATA_DIR "data"
#endif

namespace {

const std::string kCli = THERMIES_CLI_PATH;
const std::string kMat =
    std::string(THERMIES_DATA_DIR) + "/matrices/example_2d.mat";

int run(const std::string& args) {
  std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("cli exit codes: usage errors return 2") {
  CHECK(run("definitely-not-a-subcommand") == 2);
  CHECK(run("sample --matrix " + kMat + " --epsilon 1 --seed 1 --n 0") == 2);
  CHECK(run("weights --matrix " + kMat) == 2);  // missing --epsilon
  CHECK(run("sample --matrix " + kMat + " --epsilon 1 --seed 1 --n 10 "
            "--unknown-flag 3") == 2);
  // both a uniform step and a grid given
  CHECK(run("sample --matrix " + kMat +
            " --epsilon 1 --grid-diag 1,2 --grid-offdiag -1,0,1 "
            "--seed 1 --n 10") == 2);
}

TEST_CASE("cli exit codes: runtime errors return 1, success 0") {
  CHECK(run("residual --matrix /nonexistent.mat --epsilon 1") == 1);
  CHECK(run("weights --matrix " + kMat + " --epsilon 1") == 0);
  CHECK(run("--help") == 0);
  // strict mode on an unrepresentable target is a runtime failure
  CHECK(run("sample --matrix " + kMat +
            " --epsilon 1 --mode strict --seed 1 --n 10") == 1);
}

TEST_CASE("environment variable supplies the seed") {
  std::string out = "/tmp/thermies_cli_env.csv";
  std::string cmd = "THERMIES_SEED=99 " + kCli + " sample --matrix " + kMat +
                    " --epsilon 1 --n 50 --output " + out +
                    " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::string via_env = slurp(out);
  CHECK(run("sample --matrix " + kMat + " --epsilon 1 --n 50 --seed 99 "
            "--output " + out) == 0);
  CHECK(slurp(out) == via_env);
}

TEST_CASE("config file supplies flags") {
  std::string cfg = "/tmp/thermies_cli_cfg.ini";
  {
    std::ofstream c(cfg);
    c << "matrix = " << kMat
      << "\nquant.mode = uniform\nquant.epsilon = 1\nn = 50\nseed = 4\n";
  }
  std::string out_cfg = "/tmp/thermies_cli_cfg_out.csv";
  CHECK(run("sample --config " + cfg + " --output " + out_cfg) == 0);
  std::string out_flags = "/tmp/thermies_cli_flags_out.csv";
  CHECK(run("sample --matrix " + kMat + " --epsilon 1 --n 50 --seed 4 "
            "--output " + out_flags) == 0);
  CHECK(slurp(out_cfg) == slurp(out_flags));

  // command-line flags win over config values
  std::string out_override = "/tmp/thermies_cli_override_out.csv";
  CHECK(run("sample --config " + cfg + " --seed 9 --output " + out_override) ==
        0);
  CHECK(slurp(out_override) != slurp(out_flags));

  // inconsistent mode is a usage error
  std::string bad = "/tmp/thermies_cli_bad_cfg.ini";
  {
    std::ofstream c(bad);
    c << "matrix = " << kMat
      << "\nquant.mode = grid\nquant.epsilon = 1\nn = 50\nseed = 4\n";
  }
  CHECK(run("sample --config " + bad) == 2);
}

TEST_CASE("csv outputs start with a provenance comment") {
  std::string out = "/tmp/thermies_cli_prov.csv";
  REQUIRE(run("residual --matrix " + kMat + " --epsilon 1 --output " + out) ==
          0);
  std::string text = slurp(out);
  CHECK(text.rfind("# thermies", 0) == 0);
  CHECK(text.find("cmd=residual") != std::string::npos);
  CHECK(text.find("epsilon=1") != std::string::npos);
}

TEST_CASE("sample writes the optional binary batch") {
  std::string csv = "/tmp/thermies_cli_bin.csv";
  std::string bin = "/tmp/thermies_cli_bin.dat";
  REQUIRE(run("sample --matrix " + kMat + " --epsilon 1 --n 64 --seed 12 "
              "--output " + csv + " --binary-output " + bin) == 0);
  std::string bytes = slurp(bin);
  REQUIRE(bytes.size() == 16 + 64 * 2 * sizeof(double));
  CHECK(bytes.compare(0, 4, "TSMB") == 0);
}

TEST_CASE("invert accepts a matrix file with a uniform step") {
  std::string fixture =
      std::string(THERMIES_DATA_DIR) + "/fixtures/inv8_00.mat";
  std::string out = "/tmp/thermies_cli_invert_uniform.csv";
  CHECK(run("invert --matrix " + fixture + " --epsilon 0.05 --n 2000 "
            "--repetitions 2 --seed 6 --output " + out) == 0);
  std::string text = slurp(out);
  CHECK(text.find("cmd=invert") != std::string::npos);
  // both --matrix and --fixture-seed is a usage error
  CHECK(run("invert --matrix " + fixture +
            " --fixture-seed 1 --seed 6 --n 2000") == 2);
}

TEST_SUITE_END();
