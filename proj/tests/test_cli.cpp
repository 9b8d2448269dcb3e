#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "sslab/observation_grid.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SSLAB_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "sslab_cli_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& stdout_path = "") {
  std::string cmd = kCli + " " + args;
  if (!stdout_path.empty()) cmd += " > " + stdout_path;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_paper_config(const std::string& path, int m_max = 6) {
  std::ofstream out(path);
  out << R"({"q": 2, "p": 2.1, "r": 0.99, "tau": 1.0, "m_max": )" << m_max
      << R"(, "seed": 7})" << "\n";
}

}  // namespace

TEST_CASE("exponents prints the model-implied pair") {
  TempDir dir;
  write_paper_config(dir.file("config.json"));
  const std::string out = dir.file("exponents.txt");
  CHECK(run("exponents " + dir.file("config.json"), out) == 0);
  const std::string text = slurp(out);
  double alpha = 0.0, beta = 0.0;
  CHECK(std::sscanf(text.c_str(), "alpha = %lf\nbeta = %lf", &alpha, &beta) == 2);
  CHECK(std::abs(alpha - 0.6816) <= 2e-4);
  CHECK(std::abs(beta - 1.0849) <= 2e-4);
}

TEST_CASE("a zero-signal noiseless sweep reports zero error") {
  TempDir dir;
  const std::string config = dir.file("config.json");
  std::ofstream(config) << R"({"q":2,"p":2.1,"r":0.99,"tau":0.0,"m_max":5,"seed":3})";
  const std::string grid_path = dir.file("grid.csv");
  CHECK(run("simulate-sweep " + config +
            " --n-list 8 --m-list 2 --replicates 4 --zero-signal --out " + grid_path) == 0);
  const sslab::ObservationGrid grid = sslab::load_grid(grid_path);
  REQUIRE(grid.rows.size() == 1);
  CHECK(grid.rows[0].err == 0.0);
  CHECK(grid.rows[0].L == 7.0);
}

TEST_CASE("sweeps are byte-identical across reruns and thread counts") {
  TempDir dir;
  write_paper_config(dir.file("config.json"));
  const std::string flags = "simulate-sweep " + dir.file("config.json") +
                            " --n-list 8,16 --m-list 1,3 --replicates 5 --seed 11 --out ";
  CHECK(run(flags + dir.file("a.csv")) == 0);
  CHECK(run(flags + dir.file("b.csv")) == 0);
  CHECK(run(flags + dir.file("c.csv") + " --threads 3") == 0);
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("c.csv")));
  CHECK(slurp(dir.file("a.csv")).rfind("# storage-scaling-lab", 0) == 0);
}

TEST_CASE("every lambda policy spelling is accepted") {
  TempDir dir;
  write_paper_config(dir.file("config.json"));
  for (const std::string policy : {"oracle", "theorem", "boundary", "matched", "0.75"}) {
    CHECK(run("simulate-sweep " + dir.file("config.json") +
              " --n-list 8 --m-list 1 --replicates 2 --lambda-policy " + policy + " --out " +
              dir.file("p.csv")) == 0);
  }
  CHECK(run("simulate-sweep " + dir.file("config.json") +
            " --n-list 8 --m-list 1 --replicates 2 --lambda-policy bogus --out " +
            dir.file("p.csv")) == 2);
}

TEST_CASE("simulate, fit, and optimize chain end to end") {
  TempDir dir;
  write_paper_config(dir.file("config.json"), 7);
  const std::string grid_path = dir.file("grid.csv");
  CHECK(run("simulate-sweep " + dir.file("config.json") +
            " --n-list 16,32,64,128 --m-list 1,3,5 --replicates 8 --seed 2 --out " +
            grid_path) == 0);

  const std::string fit_path = dir.file("fit.json");
  CHECK(run("fit " + grid_path + " --out " + fit_path) == 0);
  const std::string fit_text = slurp(fit_path);
  CHECK(fit_text.find("\"params\"") != std::string::npos);
  CHECK(fit_text.find("\"alpha\"") != std::string::npos);

  const std::string alloc_path = dir.file("alloc.csv");
  CHECK(run("optimize " + fit_path + " --budgets 1e4,1e5,1e6 --out " + alloc_path) == 0);
  const std::string alloc_text = slurp(alloc_path);
  CHECK(alloc_text.find("s,n_star,L_star,n_int,predicted_err,scheme") != std::string::npos);
  CHECK(alloc_text.find("optimal") != std::string::npos);
}

TEST_CASE("optimize reproduces the reference allocation splits") {
  TempDir dir;
  const std::string fit_path = dir.file("fit.json");
  std::ofstream(fit_path) << R"({"params":{"err_star":0.0,"A":6.7,"B":1.4e3,)"
                          << R"("alpha":0.33,"beta":1.06}})";
  const std::string alloc_path = dir.file("alloc.csv");
  CHECK(run("optimize " + fit_path + " --budgets 48480000,96960000 --out " + alloc_path) == 0);

  std::istringstream lines(slurp(alloc_path));
  std::string line;
  std::getline(lines, line);  // provenance
  std::getline(lines, line);  // header
  double s = 0, n_star = 0, L_star = 0;
  std::getline(lines, line);
  CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf", &s, &n_star, &L_star) == 3);
  CHECK(std::abs(n_star - 6838.0) / 6838.0 <= 0.05);
  CHECK(std::abs(L_star - 7087.0) / 7087.0 <= 0.05);
}

TEST_CASE("predict-theory emits one status-tagged row per cell") {
  TempDir dir;
  write_paper_config(dir.file("config.json"), 8);
  const std::string out_path = dir.file("theory.csv");
  CHECK(run("predict-theory " + dir.file("config.json") +
            " --n-list 32,128 --m-list 2,4 --out " + out_path) == 0);
  const std::string text = slurp(out_path);
  CHECK(text.find("n,L,lambda,lambda_star,dof,bias,variance,tail,total,status") !=
        std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);  // provenance + header + 4 cells
  CHECK(text.find(",ok") != std::string::npos);
  CHECK(text.find("degenerate") == std::string::npos);

  // Fixed lambda variant.
  CHECK(run("predict-theory " + dir.file("config.json") +
            " --n-list 32 --m-list 2 --lambda 0.5 --out " + dir.file("fixed.csv")) == 0);
  CHECK(slurp(dir.file("fixed.csv")).find("32,7,0.5,") != std::string::npos);
}

TEST_CASE("plan-randomized writes reproducible plans") {
  TempDir dir;
  const std::string catalog_path = dir.file("catalog.csv");
  std::ofstream(catalog_path) << "id,class,s0,decay\n"
                              << "a,x,100,1\nb,x,100,1\nc,y,100,1\nd,y,100,1\n";
  const std::string flags = "plan-randomized " + catalog_path +
                            " --budget 250 --seed 9 --level-min 0 --level-max 15 --out ";
  CHECK(run(flags + dir.file("plan_a.csv")) == 0);
  CHECK(run(flags + dir.file("plan_b.csv")) == 0);
  const std::string plan = slurp(dir.file("plan_a.csv"));
  CHECK(plan == slurp(dir.file("plan_b.csv")));
  CHECK(plan.find("id,level,bytes") != std::string::npos);
  CHECK(std::count(plan.begin(), plan.end(), '\n') == 6);  // provenance + header + 4 items

  // Infeasible budget is a user-input error.
  CHECK(run("plan-randomized " + catalog_path + " --budget 0.001 --seed 9 --out " +
            dir.file("plan_c.csv")) == 2);
}

TEST_CASE("user errors exit with code 2") {
  TempDir dir;
  std::ofstream(dir.file("empty.csv")) << "n,L,err\n";
  CHECK(run("fit " + dir.file("empty.csv") + " --out " + dir.file("fit.json")) == 2);
  CHECK(run("fit missing_file.csv --out " + dir.file("fit.json")) == 2);
  CHECK(run("exponents missing_config.json") == 2);
  CHECK(run("bogus-subcommand") == 2);

  std::ofstream(dir.file("bad.json")) << R"({"q":2})";
  CHECK(run("exponents " + dir.file("bad.json")) == 2);
}
