#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "frailty_vb/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// stderr is folded into the captured output
Run run(const std::string& args) {
  const std::string cmd = std::string("\"") + FRAILTY_VB_CLI + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("frailty_vb_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const std::string data_dir = FRAILTY_VB_TEST_DATA;

}  // namespace

TEST_CASE("fit on a three-cluster toy file") {
  const fs::path out = scratch("toy3.json");
  const Run r = run("fit " + data_dir + "/toy3.csv --out " + out.string());
  CHECK(r.status == 0);
  CHECK(r.out.find("clusters 3") != std::string::npos);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("data").at("K") == 3);
  CHECK(j.at("fit").at("converged") == true);
  CHECK(j.at("ranked_random_effects").size() == 3);
}

TEST_CASE("fit rejects a bad event flag") {
  const Run r = run("fit " + data_dir + "/bad_event.csv");
  CHECK(r.status == 1);
  CHECK(r.out.find("invalid event flag at line 4") != std::string::npos);
}

TEST_CASE("fit reports the iteration cap") {
  const Run r = run("fit " + data_dir + "/toy3.csv --max-iter 1 --delta 1e-300");
  CHECK(r.status == 2);
}

TEST_CASE("unknown flags print usage") {
  const Run r = run("fit " + data_dir + "/toy3.csv --bogus 3");
  CHECK(r.status == 1);
  CHECK(r.out.find("Usage") != std::string::npos);
  CHECK(run("").status == 1);
}

TEST_CASE("generated K=30, n=5 data end to end") {
  const fs::path csv = scratch("k30.csv");
  const fs::path out = scratch("k30.json");
  REQUIRE(run("generate --K 30 --n 5 --seed 11 --out " + csv.string()).status == 0);
  CHECK(count_lines(slurp(csv)) == 151);
  const Run r = run("fit " + csv.string() + " --out " + out.string());
  CHECK((r.status == 0 || r.status == 2));
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  const nlohmann::json& icc = j.at("summary").at("icc");
  REQUIRE(icc.is_number());
  CHECK(icc.get<double>() > 0.0);
  CHECK(icc.get<double>() < 1.0);
}

TEST_CASE("simulate writes one row per parameter") {
  const Run r = run("simulate --K 15 --n 5 --N 25 --seed 1");
  CHECK(r.status == 0);
  CHECK(r.out.rfind("K,n,parameter,bias,sd,mse,cr,seconds\n", 0) == 0);
  CHECK(count_lines(r.out) == 5);
}

TEST_CASE("simulate grid covers sixteen scenarios") {
  const Run r = run("simulate --grid --N 1 --max-iter 3 --seed 1");
  CHECK(r.status == 0);
  CHECK(count_lines(r.out) == 1 + 16 * 4);
}

TEST_CASE("simulate output is byte-identical across runs") {
  const fs::path a = scratch("a.csv"), b = scratch("b.csv"), ja = scratch("a.json"), jb = scratch("b.json");
  const std::string flags = "simulate --K 15 --n 5 --N 10 --seed 3";
  REQUIRE(run(flags + " --out " + a.string() + " --report " + ja.string()).status == 0);
  REQUIRE(run(flags + " --out " + b.string() + " --report " + jb.string()).status == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(ja) == slurp(jb));
  CHECK(!slurp(a).empty());
}

TEST_CASE("verify filtering and negative control") {
  const Run q = run("verify --checks quadrature");
  CHECK(q.status == 0);
  CHECK(count_lines(q.out) == 1);
  CHECK(q.out.rfind("quadrature", 0) == 0);
  CHECK(q.out.find("PASS") != std::string::npos);

  const Run bad = run("verify --checks approx-error-scan --coeff-table " + data_dir + "/corrupted_table.json");
  CHECK(bad.status == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  CHECK(bad.out.find("check failed: approx-error-scan") != std::string::npos);

  CHECK(run("verify --checks nonsense").status == 1);
}
