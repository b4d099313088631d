#include "edmp/cli.hpp"

#include "support.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using edmp::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  return files;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string("\"") + EDMP_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Tiny scene set, dataset and checkpoint shared by the pipeline tests.
struct Fixture {
  fs::path dir = testing::temp_dir("cli");
  fs::path scenes = dir / "scenes";
  fs::path data = dir / "data";
  fs::path model = dir / "model";

  Fixture() {
    REQUIRE(cli({"gen-scenes", "--count", "1", "--seed", "2", "--out", scenes.string()}).code == 0);
    REQUIRE(cli({"gen-data", "--count", "200", "--seed", "2", "--out", data.string()}).code == 0);
    REQUIRE(cli({"train", "--data", (data / "dataset.bin").string(), "--T", "6", "--steps", "4", "--batch", "8",
                 "--widths", "8,8,8", "--seed", "2", "--out", model.string()})
                .code == 0);
  }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"gen-scenes", "--bogus-flag", "--out", "x"}).code == 2);
  const auto r = cli({"plan", "--ckpt", "/nonexistent.ckpt", "--scene", "/nonexistent.json", "--out", "x"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"gen-scenes", "--kinds", "dresser", "--out", testing::temp_dir("cli-kind").string()}).code == 2);
}

TEST_CASE("bench on an empty scene directory exits 2 with a message") {
  Fixture f;
  const auto empty = testing::temp_dir("cli-empty");
  const auto r = cli({"bench", "--ckpt", (f.model / "model.ckpt").string(), "--scenes", empty.string(), "--out",
                      (f.dir / "bench").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("scene") != std::string::npos);
}

TEST_CASE("gradcheck passes on the default chain") {
  const auto out = testing::temp_dir("cli-gradcheck");
  CHECK(cli({"gradcheck", "--tol", "1e-4", "--cases", "10", "--out", out.string()}).code == 0);
}

TEST_CASE("gen-scenes writes one file per kind and index plus the resolved config") {
  const auto out = testing::temp_dir("cli-scenes");
  REQUIRE(cli({"gen-scenes", "--kinds", "shelf,cubby", "--count", "2", "--seed", "5", "--out", out.string()}).code ==
          0);
  for (const char* name : {"shelf-000.json", "shelf-001.json", "cubby-000.json", "cubby-001.json", "config.json"})
    CHECK(fs::exists(out / name));
  CHECK_FALSE(fs::exists(out / "tabletop-000.json"));
  const auto cfg = nlohmann::json::parse(read_file(out / "config.json"));
  CHECK(cfg["seed"] == 5);
  CHECK(cfg["count"] == 2);
  CHECK_FALSE(cfg.contains("threads"));
}

TEST_CASE("plan and bench reruns are byte-identical") {
  Fixture f;
  const std::string ckpt = (f.model / "model.ckpt").string();
  const std::string scene = (f.scenes / "shelf-000.json").string();
  std::map<std::string, std::string> first;
  for (int rep = 0; rep < 2; ++rep) {
    const auto out = f.dir / ("plan" + std::to_string(rep));
    fs::remove_all(out);
    const auto r = cli({"plan", "--ckpt", ckpt, "--scene", scene, "--batch", "24", "--seed", "7", "--out", out.string()});
    CHECK((r.code == 0 || r.code == 1));
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(read_file(out / "trajectory.csv").rfind("#", 0) == 0);
    if (rep == 0) first = tree(out);
    else CHECK(tree(out) == first);
  }
  for (int rep = 0; rep < 2; ++rep) {
    const auto out = f.dir / ("bench" + std::to_string(rep));
    fs::remove_all(out);
    CHECK(cli({"bench", "--ckpt", ckpt, "--scenes", f.scenes.string(), "--batch", "12", "--out", out.string()}).code ==
          0);
    if (rep == 0) first = tree(out);
    else CHECK(tree(out) == first);
  }
}

TEST_CASE("outputs do not depend on the thread count") {
  Fixture f;
  const std::string ckpt = (f.model / "model.ckpt").string();
  const std::vector<std::string> commands = {
      "train --data " + (f.data / "dataset.bin").string() + " --T 6 --steps 3 --batch 8 --widths 8,8,8",
      "plan --ckpt " + ckpt + " --scene " + (f.scenes / "cubby-000.json").string() + " --batch 24",
      "gen-data --count 50",
  };
  for (const auto& c : commands) {
    std::map<std::string, std::string> first;
    for (int threads : {1, 3}) {
      const auto out = f.dir / ("threads" + std::to_string(threads));
      fs::remove_all(out);
      const int code = run_binary(c + " --seed 3 --threads " + std::to_string(threads) + " --out " + out.string());
      CHECK((code == 0 || code == 1));
      if (threads == 1) first = tree(out);
      else CHECK(tree(out) == first);
    }
  }
}

TEST_CASE("plan accepts an attached object") {
  Fixture f;
  const auto obj = f.dir / "cube.json";
  std::ofstream(obj) << R"({"half_extents": [0.05, 0.05, 0.05], "offset": {"xyz": [0.4, 0.0, 0.0]}})";
  const auto out = f.dir / "attach";
  const auto r = cli({"plan", "--ckpt", (f.model / "model.ckpt").string(), "--scene",
                      (f.scenes / "tabletop-000.json").string(), "--attach", obj.string(), "--batch", "12", "--out",
                      out.string()});
  CHECK((r.code == 0 || r.code == 1));
  CHECK(fs::exists(out / "trajectory.csv"));
}
