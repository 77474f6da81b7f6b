#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(BMCD_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

// Same shape as the golden file; numbers agree to 1e-9 relative, text fields exactly.
void check_golden(const std::string& args, const std::string& file, int code) {
  CAPTURE(args);
  Run r = run(args);
  CHECK(r.code == code);
  std::ifstream in(std::string(BMCD_TEST_DATA "/golden/") + file);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  auto want = lines(ss.str()), got = lines(r.out);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    auto a = fields(got[i]), b = fields(want[i]);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      char* end = nullptr;
      const double y = std::strtod(b[j].c_str(), &end);
      if (b[j].empty() || *end != '\0' || std::isnan(y)) {
        CHECK(a[j] == b[j]);
      } else {
        const double x = std::strtod(a[j].c_str(), nullptr);
        CHECK(std::abs(x - y) <= 1e-9 * std::max(std::abs(y), 1e-300) + 1e-300);
      }
    }
  }
}

}  // namespace

TEST_CASE("golden outputs") {
  check_golden("cd-scan --manifold 'gaussian(2,1)' --K 0.5 --N 3 --grid 3", "cd_scan_gaussian.csv", 2);
  check_golden("jacobian --manifold 'sphere(2,1)' --x0 0.1,0.2 --v0 1,0.5 --lambda 0.3 --N 3 --steps 16 --hessian 0.2",
               "jacobian_sphere.csv", 0);
  check_golden("bm-test --manifold 'sphere(2,1)' --x0 0.1,0.2 --v0 1,0 --K 1 --N 2 --lambda 0.1 --lines 512",
               "bm_test_sphere.csv", 0);
  check_golden("counterexample --manifold 'saddle_weight(2,1)' --x0 0,0 --v0 1,0 --K 0 --N 4 --delta 0.1 "
               "--lambda-schedule 0.1 --lines 4096",
               "counterexample_saddle.csv", 0);
}

TEST_CASE("distortion output") {
  Run r = run("distortion --K 0 --N 3 --t 0.5 --theta 2");
  CHECK(r.code == 0);
  auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  CHECK(l[0] == "K,N,t,theta,sigma,tau,expansion_defect");
  CHECK(l[1] == "0,3,0.5,2,0.5,0.5,0");
}

TEST_CASE("modified Ricci output") {
  Run r = run("ric --manifold 'sphere(2,1)' --point 0,0 --N 3");
  CHECK(r.code == 0);
  auto l = lines(r.out);
  REQUIRE(l.size() == 6);
  CHECK(l[0] == "quantity,i,j,value");
  CHECK(l[1] == "ric,1,1,4");
  CHECK(l[2] == "ric,1,2,0");
  CHECK(l[5] == "min_eigenvalue,,,1");
}

TEST_CASE("manifold files on the command line") {
  Run r = run("ric --manifold " BMCD_TEST_DATA "/saddle.json --point 0,0 --N 4");
  CHECK(r.code == 0);
  CHECK(r.out.find("ric,1,1,-2\n") != std::string::npos);
  CHECK(run("ric --manifold " BMCD_TEST_DATA "/bad_metric.json --point 0,0 --N 3").code == 65);
}

TEST_CASE("cd scan verdicts") {
  CHECK(run("cd-scan --manifold 'sphere(2,1)' --K 1 --N 2 --grid 4").code == 0);
  Run r = run("cd-scan --manifold 'saddle_weight(2,1)' --K 0 --N 4 --grid 4");
  CHECK(r.code == 2);
  CHECK(lines(r.out).size() == 17);
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 64);
  CHECK(run("distortion --K 1").code == 64);
  CHECK(run("frobnicate").code == 64);
  CHECK(run("ric --manifold 'torus(2)' --point 0,0 --N 3").code == 64);
  CHECK(run("distortion --K 1 --N 0.5 --t 0.5 --theta 1").code == 64);
  CHECK(run("jacobian --manifold 'sphere(2,1)' --x0 0,0 --v0 0.9,0 --lambda 1 --N 3").code == 65);
  CHECK(run("counterexample --manifold 'sphere(2,1)' --x0 0,0 --v0 1,0 --K 1 --N 2 --delta 0.1").code == 4);
}

TEST_CASE("jacobian profile") {
  Run r = run("jacobian --manifold 'euclidean(2)' --x0 0,0 --v0 1,0 --lambda 1 --N 3 --steps 64 --hessian 1");
  CHECK(r.code == 0);
  auto l = lines(r.out);
  REQUIRE(l.size() == 66);
  CHECK(l[0] == "t,D,E,ric_term,riccati_residual");
  CHECK(l[65].rfind("1,", 0) == 0);
}

TEST_CASE("--out writes the same bytes as stdout") {
  const auto path = std::filesystem::temp_directory_path() / "bmcd_cli_out.csv";
  Run a = run("distortion --K 1 --N 2 --t 0.25 --theta 1 --out " + path.string());
  CHECK(a.code == 0);
  CHECK(a.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == run("distortion --K 1 --N 2 --t 0.25 --theta 1").out);
  std::filesystem::remove(path);
}
