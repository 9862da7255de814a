#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

const std::string cli = DCSCA_CLI_PATH;

int run(const std::string& args) {
  const int status = std::system((cli + " " + args + " > cli_stdout.txt 2> cli_stderr.txt").c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Trace rows with the seconds column removed, for wall-clock-insensitive
// comparisons.
std::string strip_seconds(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("gen writes deterministic instance files") {
  CHECK(run("gen --problem capped_l1 --scale desk --seed 7 --out cli_cap_a.bin") == 0);
  CHECK(run("gen --problem capped_l1 --scale desk --seed 7 --out cli_cap_b.bin") == 0);
  CHECK(slurp("cli_cap_a.bin") == slurp("cli_cap_b.bin"));
  CHECK(slurp("cli_stdout.txt").find("mu=") != std::string::npos);

  CHECK(run("gen --problem anomaly --scale desk --seed 3 --out cli_an.bin") == 0);
  CHECK(slurp("cli_stdout.txt").find("lambda=") != std::string::npos);

  // A different seed changes the bytes.
  CHECK(run("gen --problem capped_l1 --scale desk --seed 8 --out cli_cap_c.bin") == 0);
  CHECK(slurp("cli_cap_a.bin") != slurp("cli_cap_c.bin"));
}

TEST_CASE("run solves a stored instance and writes a well-formed trace") {
  REQUIRE(run("gen --problem capped_l1 --scale desk --seed 7 --out cli_cap_a.bin") == 0);
  CHECK(run("run --instance cli_cap_a.bin --algorithm stela --out cli_tr.csv") == 0);
  const std::string csv = slurp("cli_tr.csv");
  CHECK(csv.rfind("iter,h,gap,gamma,seconds\n", 0) == 0);

  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("converged=1") != std::string::npos);

  // Row count = reported iterations + header + initial row.
  const auto pos = out.find("iterations=");
  REQUIRE(pos != std::string::npos);
  const int iters = std::stoi(out.substr(pos + 11));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == iters + 2);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("run --problem capped_l1 --scale desk --algorithm warp") == 2);
  CHECK(run("run --problem anomaly --scale desk --algorithm gist") == 2);
  CHECK(run("run --problem capped_l1 --scale nope --algorithm stela") == 2);
  CHECK(run("compare --problem capped_l1 --scale desk --algorithms stela") == 2);
  CHECK(run("run --problem capped_l1 --scale desk --format yaml") == 2);
  CHECK(run("run --instance does_not_exist.bin") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("iteration budget exhaustion exits with code 3 but writes the trace") {
  CHECK(run("run --problem anomaly --scale desk --seed 3 --algorithm stela "
            "--max-iter 5 --out cli_short.csv") == 3);
  const std::string csv = slurp("cli_short.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 rows
}

TEST_CASE("same seed and one thread reproduce the trace byte for byte") {
  const std::string base =
      "run --problem capped_l1 --scale desk --seed 11 --algorithm stela --threads 1 ";
  CHECK(run(base + "--timing none --out cli_d1.csv") == 0);
  CHECK(run(base + "--timing none --out cli_d2.csv") == 0);
  CHECK(slurp("cli_d1.csv") == slurp("cli_d2.csv"));

  CHECK(run(base + "--out cli_w1.csv") == 0);
  CHECK(run(base + "--out cli_w2.csv") == 0);
  CHECK(strip_seconds(slurp("cli_w1.csv")) == strip_seconds(slurp("cli_w2.csv")));
  CHECK(strip_seconds(slurp("cli_w1.csv")) == strip_seconds(slurp("cli_d1.csv")));
}

TEST_CASE("json traces parse and carry the same fields") {
  CHECK(run("run --problem capped_l1 --scale desk --seed 5 --algorithm stela "
            "--format json --out cli_tr.json") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_tr.json"));
  REQUIRE(j.is_array());
  REQUIRE(!j.empty());
  CHECK(j[0].contains("iter"));
  CHECK(j[0].contains("h"));
  CHECK(j[0].contains("gap"));
  CHECK(j[0].contains("gamma"));
  CHECK(j[0].contains("seconds"));
}

TEST_CASE("distributed runs write a communication report") {
  CHECK(run("run --problem anomaly --scale desk --seed 3 "
            "--algorithm stela_distributed --nodes 4 --out cli_dist.csv") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_dist.csv.comm.json"));
  CHECK(j["total_messages"].get<std::size_t>() > 0);
  CHECK(j["iterations"].size() > 0);
}

TEST_CASE("splitting baseline is allowed to stop unconverged") {
  const int code = run("run --problem anomaly --scale desk --seed 3 "
                       "--algorithm admm --max-iter 80 --out cli_admm.csv");
  CHECK((code == 0 || code == 3));
  CHECK(slurp("cli_admm.csv").rfind("iter,", 0) == 0);
}

TEST_CASE("compare runs every algorithm and emits per-algorithm traces") {
  CHECK(run("compare --problem capped_l1 --scale desk --seed 5 "
            "--algorithms stela,classic_mm,proximal_mm --out cli_cmp") == 0);
  CHECK(slurp("cli_cmp_stela.csv").rfind("iter,", 0) == 0);
  CHECK(slurp("cli_cmp_classic_mm.csv").rfind("iter,", 0) == 0);
  CHECK(slurp("cli_cmp_proximal_mm.csv").rfind("iter,", 0) == 0);
  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("final_h") != std::string::npos);
  CHECK(out.find("stela") != std::string::npos);
}

TEST_CASE("config files supply defaults and flags win") {
  {
    std::ofstream cfg("cli_cfg.txt");
    cfg << "# solver settings\n"
        << "problem=capped_l1\n"
        << "scale=desk\n"
        << "seed=11\n"
        << "algorithm=stela\n"
        << "timing=none\n"
        << "out=cli_cfg_run.csv\n";
  }
  CHECK(run("run --config cli_cfg.txt") == 0);
  CHECK(slurp("cli_cfg_run.csv") == slurp("cli_d1.csv"));

  // Explicit flag beats the config value.
  CHECK(run("run --config cli_cfg.txt --seed 12 --out cli_cfg_run2.csv") == 0);
  CHECK(slurp("cli_cfg_run2.csv") != slurp("cli_d1.csv"));

  {
    std::ofstream cfg("cli_bad.txt");
    cfg << "volume=11\n";
  }
  CHECK(run("run --config cli_bad.txt") == 2);
}

TEST_CASE("seed falls back to the environment variable") {
  setenv("DCSCA_SEED", "11", 1);
  const std::string base =
      "run --problem capped_l1 --scale desk --algorithm stela --threads 1 --timing none ";
  CHECK(run(base + "--out cli_env.csv") == 0);
  unsetenv("DCSCA_SEED");
  CHECK(slurp("cli_env.csv") == slurp("cli_d1.csv"));
}
