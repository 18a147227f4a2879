#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROUGHLAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmpdir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("roughlap_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("cli mesh command writes mesh and quality files") {
  fs::path out = tmpdir("mesh");
  CHECK(run_cli("mesh --domain spiral --n-max 4 --h 0.1 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "mesh.txt"));
  CHECK(fs::exists(out / "quality.json"));
  json q = json::parse(slurp(out / "quality.json"));
  CHECK(q["violations"].empty());
  CHECK(q["boundary_loops"] == 1);
  CHECK(q.contains("config"));
  CHECK(q.contains("version"));
}

TEST_CASE("cli mesh reports rect-union loop counts") {
  fs::path out = tmpdir("meshru");
  CHECK(run_cli("mesh --domain rect-union --k-max 3 --h 0.1 --out " + out.string()) == 0);
  json q = json::parse(slurp(out / "quality.json"));
  CHECK(q["boundary_loops"] == 4);
  CHECK(q["domain_loops"] == 4);
}

TEST_CASE("cli usage errors exit 2") {
  CHECK(run_cli("mesh --no-such-flag 1") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("solve --bc nonsense --domain square") == 2);
}

TEST_CASE("cli neumann incompatibility exits 3") {
  fs::path out = tmpdir("neumann");
  CHECK(run_cli("solve --bc neumann --domain square --source one --h 0.25 --out " +
                out.string()) == 3);
}

TEST_CASE("cli dirichlet ladder reports quartic ratios") {
  fs::path out = tmpdir("ladder");
  REQUIRE(run_cli("solve --bc dirichlet --domain square --manufactured sine --h 0.25 "
                  "--levels 2 --out " +
                  out.string()) == 0);
  std::ifstream in(out / "solve.csv");
  std::string line;
  std::vector<double> l2;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'l') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double level, h, nv, it, res, l2e;
    row >> level >> h >> nv >> it >> res >> l2e;
    l2.push_back(l2e);
  }
  REQUIRE(l2.size() == 3);
  CHECK(l2[0] / l2[1] > 3.0);
  CHECK(l2[1] / l2[2] > 3.5);
}

TEST_CASE("cli spectrum poincare on the square") {
  fs::path out = tmpdir("spec");
  REQUIRE(run_cli("spectrum --which poincare --domain square --h 0.25 --levels 2 --out " +
                  out.string()) == 0);
  std::ifstream in(out / "spectrum.csv");
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'l') last = line;
  std::replace(last.begin(), last.end(), ',', ' ');
  std::istringstream row(last);
  double level, h, nv, idx, value;
  row >> level >> h >> nv >> idx >> value;
  CHECK(value == doctest::Approx(1.0 / 3.141592653589793).epsilon(0.02));
}

TEST_CASE("cli exterior rejects malformed json with exit 2") {
  fs::path out = tmpdir("extbad");
  std::ofstream(out / "bad.json") << "{ this is not json";
  CHECK(run_cli("exterior --config " + (out / "bad.json").string() + " --out " + out.string()) ==
        2);
}

TEST_CASE("cli reproducibility: identical configs give byte-identical csv") {
  fs::path out1 = tmpdir("rep1"), out2 = tmpdir("rep2");
  json cfg = {{"obstacle", {{"kind", "sphere"}}},
              {"bc", "dirichlet"},
              {"k", 0.0},
              {"epsilons", {0.1, 0.01}},
              {"a", 1.5},
              {"R_inf", 48.0},
              {"target_h", 0.15},
              {"refine", 1},
              {"tol", 1e-10},
              {"source", {{"kind", "shell"}, {"rho0", 2.0}, {"radius", 0.3}}},
              {"radii", {4.0, 5.0, 6.0}}};
  std::ofstream(out1 / "cfg.json") << cfg.dump();
  std::ofstream(out2 / "cfg.json") << cfg.dump();
  const std::string env = "ROUGHLAP_THREADS=2 ";
  const std::string base = std::string(ROUGHLAP_CLI_PATH);
  REQUIRE(std::system((env + base + " exterior --config " + (out1 / "cfg.json").string() +
                       " --out " + out1.string() + " >/dev/null 2>&1")
                          .c_str()) == 0);
  REQUIRE(std::system((env + base + " exterior --config " + (out2 / "cfg.json").string() +
                       " --out " + out2.string() + " >/dev/null 2>&1")
                          .c_str()) == 0);
  CHECK(slurp(out1 / "continuation.csv") == slurp(out2 / "continuation.csv"));
  CHECK(slurp(out1 / "radial.csv") == slurp(out2 / "radial.csv"));
  CHECK(!slurp(out1 / "continuation.csv").empty());
}

TEST_CASE("cli geometry-check passes") {
  fs::path out = tmpdir("geo");
  CHECK(run_cli("geometry-check --seed 1 --out " + out.string()) == 0);
  const std::string csv = slurp(out / "geometry.csv");
  CHECK(csv.find(",0\n") == std::string::npos);  // no failed row
}
