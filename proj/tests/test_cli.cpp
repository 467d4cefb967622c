#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "treeging/data.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = TREEGING_CLI_PATH;

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("treeging_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = cli + " " + args + " 2>" + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n == 0 ? 0 : n - 1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void simulate_once() {
  static bool done = false;
  if (done) return;
  fs::create_directories(scratch() / "sp");
  fs::create_directories(scratch() / "st");
  REQUIRE(run("simulate spatial --eta 1.0 --nu 0.5 --seed 7 --out " + q(scratch() / "sp")) == 0);
  REQUIRE(run("simulate spacetime --defaults --seed 7 --n-train-locs 12 --n-times 5 --grid-side 3 --out " +
              q(scratch() / "st")) == 0);
  done = true;
}

}  // namespace

TEST_CASE("simulate writes the expected sizes") {
  simulate_once();
  CHECK(data_rows(scratch() / "sp" / "train.csv") == 100);
  CHECK(data_rows(scratch() / "sp" / "test.csv") == 441);
  CHECK(fs::exists(scratch() / "sp" / "meta.txt"));
  CHECK(data_rows(scratch() / "st" / "train.csv") == 60);

  fs::create_directories(scratch() / "full");
  CHECK(run("simulate spacetime --defaults --out " + q(scratch() / "full")) == 0);
  CHECK(data_rows(scratch() / "full" / "train.csv") == 1200);
  CHECK(data_rows(scratch() / "full" / "test.csv") == 3630);
}

TEST_CASE("missing output directory is an io error") {
  CHECK(run("simulate spatial --out " + q(scratch() / "nope" / "deeper")) == 10);
  CHECK(slurp(scratch() / "stderr.txt").find("nope") != std::string::npos);
}

TEST_CASE("fit is deterministic and independent of jobs") {
  simulate_once();
  const auto train = q(scratch() / "sp" / "train.csv");
  REQUIRE(run("fit treeging " + train + " --seed 1 --n-learners 8 --out " + q(scratch() / "a.json")) == 0);
  REQUIRE(run("fit treeging " + train + " --seed 1 --n-learners 8 --jobs 3 --out " + q(scratch() / "b.json")) == 0);
  CHECK(slurp(scratch() / "a.json") == slurp(scratch() / "b.json"));
  CHECK(slurp(scratch() / "stderr.txt").find("# fit: seed=1") != std::string::npos);

  REQUIRE(run("predict " + q(scratch() / "a.json") + " " + q(scratch() / "sp" / "test.csv") + " --out " +
              q(scratch() / "p1.csv")) == 0);
  REQUIRE(run("predict " + q(scratch() / "b.json") + " " + q(scratch() / "sp" / "test.csv") + " --jobs 2 --out " +
              q(scratch() / "p2.csv")) == 0);
  CHECK(slurp(scratch() / "p1.csv") == slurp(scratch() / "p2.csv"));
  CHECK(data_rows(scratch() / "p1.csv") == 441);
  CHECK(slurp(scratch() / "p1.csv").rfind("row,y_hat\n", 0) == 0);
}

TEST_CASE("rf archive round trips through predict") {
  simulate_once();
  REQUIRE(run("fit rf " + q(scratch() / "sp" / "train.csv") + " --n-learners 50 --out " + q(scratch() / "rf.json")) ==
          0);
  CHECK(run("predict " + q(scratch() / "rf.json") + " " + q(scratch() / "sp" / "test.csv") + " --out " +
            q(scratch() / "rf.csv")) == 0);
  CHECK(data_rows(scratch() / "rf.csv") == 441);
}

TEST_CASE("kriging errors and interpolation") {
  // five rows, twenty covariates
  {
    std::ofstream out(scratch() / "tiny.csv");
    out << "s1,s2,y";
    for (int j = 1; j <= 20; ++j) out << ",x" << j;
    out << '\n';
    for (int i = 0; i < 5; ++i) {
      out << i << ',' << i * i << ',' << i;
      for (int j = 1; j <= 20; ++j) out << ',' << (i * j) % 7;
      out << '\n';
    }
  }
  CHECK(run("fit kriging " + q(scratch() / "tiny.csv") + " --out " + q(scratch() / "k.json")) == 18);

  // a smooth field with no nugget: kriging reproduces the training responses
  {
    std::ofstream out(scratch() / "smooth.csv");
    out << "s1,s2,y\n";
    for (int i = 0; i < 40; ++i) {
      const double s1 = (i * 37 % 40) / 4.0, s2 = (i * 11 % 40) / 4.0;
      out << s1 << ',' << s2 << ',' << treeging::format_double(1.0 + 0.3 * s1 - 0.2 * s2) << '\n';
    }
  }
  REQUIRE(run("fit kriging " + q(scratch() / "smooth.csv") + " --out " + q(scratch() / "smooth.json")) == 0);
  REQUIRE(run("predict " + q(scratch() / "smooth.json") + " " + q(scratch() / "smooth.csv") + " --out " +
              q(scratch() / "smooth_pred.csv")) == 0);
  std::ifstream data(scratch() / "smooth.csv"), pred(scratch() / "smooth_pred.csv");
  std::string a, b;
  std::getline(data, a);
  std::getline(pred, b);
  double worst = 0.0;
  while (std::getline(data, a) && std::getline(pred, b)) {
    const double y = std::stod(a.substr(a.rfind(',') + 1));
    const double f = std::stod(b.substr(b.find(',') + 1));
    worst = std::max(worst, std::abs(y - f));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("archive version mismatch") {
  simulate_once();
  REQUIRE(run("fit rf " + q(scratch() / "sp" / "train.csv") + " --n-learners 2 --out " + q(scratch() / "v.json")) == 0);
  auto text = slurp(scratch() / "v.json");
  const auto pos = text.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"version\":9");
  std::ofstream(scratch() / "v9.json") << text;
  CHECK(run("predict " + q(scratch() / "v9.json") + " " + q(scratch() / "sp" / "test.csv")) == 22);
}

TEST_CASE("crossval writes one row per fold and a mean") {
  simulate_once();
  REQUIRE(run("crossval kriging " + q(scratch() / "st" / "train.csv") + " --mode location --k 10 --out " +
              q(scratch() / "cv.csv")) == 0);
  const auto text = slurp(scratch() / "cv.csv");
  CHECK(data_rows(scratch() / "cv.csv") == 11);
  CHECK(text.find("\nmean,") != std::string::npos);
}

TEST_CASE("sweep and summary") {
  REQUIRE(run("sweep --param n_learners --values 1,2,3 --replicates 1 --out " + q(scratch() / "sweep.csv")) == 0);
  CHECK(data_rows(scratch() / "sweep.csv") == 3);
  REQUIRE(run("summary " + q(scratch() / "sweep.csv") + " > " + q(scratch() / "summary.csv")) == 0);
  CHECK(data_rows(scratch() / "summary.csv") == 3);
  CHECK(run("sweep --param n_learners --replicates 1") == 2);
}

TEST_CASE("battery rows and determinism") {
  const std::string base = "battery spatial --models all --eta 0,1 --nu 0.5 --n-learners 3 --seed 4";
  REQUIRE(run(base + " --out " + q(scratch() / "bat1.csv")) == 0);
  REQUIRE(run(base + " --jobs 3 --out " + q(scratch() / "bat2.csv")) == 0);
  CHECK(data_rows(scratch() / "bat1.csv") == 8);
  CHECK(slurp(scratch() / "bat1.csv") == slurp(scratch() / "bat2.csv"));
}

TEST_CASE("config file with flag override") {
  simulate_once();
  {
    std::ofstream cfg(scratch() / "run.cfg");
    cfg << "# defaults\nn_learners = 2\nseed=5\n";
  }
  const auto train = q(scratch() / "sp" / "train.csv");
  REQUIRE(run("fit treeging " + train + " --config " + q(scratch() / "run.cfg") + " --seed 6 --out " +
              q(scratch() / "c.json")) == 0);
  const auto echo = slurp(scratch() / "stderr.txt");
  CHECK(echo.find("n-learners=2") != std::string::npos);
  CHECK(echo.find("seed=6") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run("") != 0);
  CHECK(run("fit nonsense " + q(scratch() / "x.csv")) != 0);
  CHECK(run("--help > /dev/null") == 0);
}
