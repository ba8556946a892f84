// Drives the dtsys executable and checks exit codes and outputs.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "dtsys/io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kSystems = fs::path(DTSYS_GOLDEN_DIR).parent_path().parent_path() / "examples_systems";

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / ("dtsys_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = dir / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(DTSYS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sys(const char* name) { return (kSystems / name).string(); }

}  // namespace

TEST_CASE("cli simulate") {
  Scratch s;
  const auto out = s.path("t.csv");
  CHECK(run("simulate " + sys("blend.json") + " --x0 0.5 --steps 10 --out " + out) == 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 12);  // header + 11 rows
  const auto want = oracle::blend_orbit(0.5, 0.5, 10);
  for (std::size_t n = 0; n <= 10; ++n) {
    CHECK(std::stod(rows[n + 1].substr(rows[n + 1].find(',') + 1)) == want[n]);
  }
  const auto zero = s.path("z.csv");
  CHECK(run("simulate " + sys("blend.json") + " --x0 0.5 --steps 0 --out " + zero) == 0);
  CHECK(slurp(zero) == "n,x1\n0,0.5\n");
  CHECK(run("simulate " + sys("blend.json") + " --x0 0.5,1") == 2);
  CHECK(run("simulate " + sys("doubling.json") + " --x0 1 --steps 100") == 3);
  CHECK(run("simulate " + sys("doubling.json") + " --x0 1 --steps 100 --out " + s.path("no.csv")) == 3);
  CHECK_FALSE(fs::exists(s.path("no.csv")));
}

TEST_CASE("cli input errors") {
  Scratch s;
  CHECK(run("") == 2);
  CHECK(run("bogus") == 2);
  CHECK(run("simulate /nonexistent.json") == 2);
  CHECK(run("simulate " + s.file("bad.json", "{not json")) == 2);
  CHECK(run("limit-set " + sys("blend.json") + " --x0 0.5 --tol-cluster -1") == 2);
  CHECK(run("limit-set " + sys("blend.json") + " --x0 0.5 --grid 0") == 2);
  CHECK(run("invariant-part " + sys("blend.json") + " --pad lipschitz") == 2);
  CHECK(run("fixed-points " + sys("blend.json") + " --box 1:0") == 2);
}

TEST_CASE("cli lift") {
  Scratch s;
  const auto out = s.path("lifted.json");
  CHECK(run("lift " + sys("fibonacci.json") + " --out " + out) == 0);
  const auto lifted = dtsys::load_system_file(out);
  const auto tr = dtsys::trajectory(dtsys::build_system(lifted), *dtsys::file_initial_point(lifted), 40);
  const auto want = oracle::linear_recursion({1, 1}, {0, 1}, 42);
  for (std::size_t n = 0; n < tr.points.size(); ++n) CHECK(tr.points[n][0] == want[n + 1]);
  CHECK(run("lift " + sys("blend.json") + " --out " + s.path("same.json")) == 0);
  CHECK(dtsys::load_system_file(s.path("same.json")).map == dtsys::load_system_file(sys("blend.json")).map);
  const auto bad = s.file("bad.json", R"({"name": "b", "higher_order": {"order": 2, "g": "u1 + u3", "initial": [0, 1]}})");
  CHECK(run("lift " + bad) == 2);
}

TEST_CASE("cli limit-set") {
  Scratch s;
  const auto out = s.path("ls.json");
  CHECK(run("limit-set " + sys("blend.json") + " --x0 0.9 --out " + out) == 0);
  const auto j = dtsys::Json::parse(slurp(out));
  REQUIRE(j["representatives"].size() == 1);
  CHECK(std::abs(j["representatives"][0][0].get<double>()) <= 1e-9);
  CHECK(run("limit-set " + sys("doubling.json") + " --x0 1") == 3);
  CHECK(run("limit-set " + sys("doubling.json") + " --box 0.5:0.75 --grid 32") == 3);

  const auto box = s.path("box.json"), csv = s.path("box.csv");
  CHECK(run("limit-set " + sys("contraction.json") + " --box=-1:1,-1:1 --grid 32 --pad none --out " + box +
            " --csv " + csv) == 0);
  const auto jb = dtsys::Json::parse(slurp(box));
  CHECK(jb["mode"] == "nested");
  // Nested-interval oracle per axis: the product of the 1-D covers.
  const auto axis = oracle::nested_interval_cells({-1, 1, 32}, 0.5, 0, 31);
  CHECK(jb["cellset"]["cells"].size() == axis.size() * axis.size());
  CHECK(slurp(csv).rfind("c1,c2,h1,h2\n", 0) == 0);
}

TEST_CASE("cli invariant-part") {
  Scratch s;
  const auto id = s.file("id.json", R"({"name": "id", "dimension": 1, "map": ["x1"], "domain": {"lower": [0], "upper": [1]}})");
  const auto out = s.path("ip.json");
  CHECK(run("invariant-part " + id + " --grid 16 --out " + out) == 0);
  CHECK(dtsys::Json::parse(slurp(out))["cellset"]["cells"].size() == 16);

  CHECK(run("invariant-part " + sys("contraction.json") + " --grid 16 --pad none --out " + out) == 0);
  const auto j = dtsys::Json::parse(slurp(out));
  CHECK(j["cellset"]["cells"] == dtsys::Json::parse("[[7,7],[7,8],[8,7],[8,8]]"));

  const auto shift = s.file("shift.json", R"({"name": "s", "dimension": 1, "map": ["x1 + 2"], "domain": {"lower": [0], "upper": [1]}})");
  CHECK(run("invariant-part " + shift + " --grid 16 --out " + out) == 0);
  CHECK(dtsys::Json::parse(slurp(out))["cellset"]["cells"].empty());

  CHECK(run("invariant-part " + sys("contraction.json") + " --grid 16 --max-iters 1 --out " + s.path("x.json")) == 4);
  CHECK_FALSE(fs::exists(s.path("x.json")));
}

TEST_CASE("cli lasalle exit codes") {
  Scratch s;
  CHECK(run("lasalle " + sys("contraction.json") + " --x0 0.8,-0.6 --grid 32") == 0);
  CHECK(run("lasalle " + sys("doubling.json") + " --x0 0.5") == 5);
  const auto out = s.path("r.json");
  CHECK(run("lasalle " + sys("blend.json") + " --x0 0.2 --x0 0.5 --x0 0.9 --x0 1 --out " + out) == 0);
  const auto j = dtsys::Json::parse(slurp(out));
  const std::size_t want[] = {0, 0, 0, 255};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(j["verdicts"][i]["verdict"] == "converged");
    CHECK(j["verdicts"][i]["target_cells"] == dtsys::Json::array({dtsys::Json::array({want[i]})}));
  }
  const auto grow = s.file("grow.json", R"({"name": "g", "dimension": 1, "map": ["2*x1"], "lyapunov": "-x1^2",
                                           "domain": {"lower": [-10], "upper": [10]}})");
  CHECK(run("lasalle " + grow + " --x0 0.1 --G=-1:1") == 6);
  CHECK(run("lasalle " + grow + " --x0 0.1 --extension-box=-1:1 --extension-n 5") == 6);
  CHECK(run("lasalle " + sys("fibonacci.json")) == 2);  // no Lyapunov function
  // Quarter turn with V = |x|^2: descent holds with equality everywhere, but
  // the motion circles forever; the target {V = 1} is reached at once.
  CHECK(run("lasalle " + sys("quarter_turn.json") + " --x0 1,0 --grid 16") == 0);
}

TEST_CASE("cli config file mirrors flags") {
  Scratch s;
  const auto cfg = s.file("run.toml", "[simulate]\nsteps = 3\nx0 = \"0.5\"\n");
  const auto out = s.path("t.csv");
  CHECK(run("--config " + cfg + " simulate " + sys("blend.json") + " --out " + out) == 0);
  CHECK(slurp(out) == "n,x1\n0,0.5\n1,0.375\n2,0.2578125\n3,0.162139892578125\n");
}

TEST_CASE("cli output is deterministic") {
  Scratch s;
  const std::string cmds[] = {
      "simulate " + sys("blend.json") + " --x0 0.5 --steps 50",
      "lift " + sys("fibonacci.json"),
      "fixed-points " + sys("contraction.json") + " --grid 16",
      "limit-set " + sys("quarter_turn.json") + " --x0 1,0",
      "limit-set " + sys("contraction.json") + " --box=-1:1,-1:1 --grid 16",
      "invariant-part " + sys("contraction.json") + " --grid 16",
      "lasalle " + sys("contraction.json") + " --x0 0.8,-0.6 --grid 16",
  };
  int k = 0;
  for (const auto& c : cmds) {
    const auto a = s.path(std::to_string(k) + "a"), b = s.path(std::to_string(k) + "b");
    ++k;
    CHECK(run(c + " --out " + a) == 0);
    CHECK(run(c + " --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
  }
}
