#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "dss/cli.hpp"
#include "dss/io.hpp"

using namespace dss;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dss_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

Json report(const std::string& path) { return Json::parse(read_text(path)); }

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("atom gen then check") {
  TempDir t;
  auto r = invoke({"atom", "gen", "--kind", "cantor", "--depth", "6", "--out", t.path.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(t / "atom.csv"));
  CHECK(fs::exists(t / "atom.csv.json"));
  r = invoke({"atom", "check", "--atom", t / "atom.csv", "--out", t.path.string()});
  CHECK(r.code == 0);
  const auto j = report(t / "atom_check.json");
  CHECK(j["tool"] == "dss");
  CHECK(j["version"] == kToolVersion);
  CHECK(j["passed"] == true);
  CHECK(j["results"]["certificate"]["passed"] == true);
  CHECK(j["constants"].contains("C_impl"));
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  CHECK_FALSE(j.contains("timestamp"));
}

TEST_CASE("failing certificate exits 1 and names the check") {
  TempDir t;
  const auto r = invoke({"atom", "check", "--kind", "dirac", "--beta", "0.9", "--out", t.path.string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("heat extension bound") != std::string::npos);
  const auto j = report(t / "atom_check.json");
  CHECK(j["passed"] == false);
  CHECK(j["failures"].size() >= 1);
}

TEST_CASE("verify thm13") {
  TempDir t;
  const auto r = invoke({"verify", "thm13", "--out", t.path.string()});
  CHECK(r.code == 0);
  const auto j = report(t / "verify_thm13.json");
  CHECK(j["passed"] == true);
  for (const auto& f : j["files"]) CHECK(fs::exists(t / f.get<std::string>()));
}

TEST_CASE("empty ball family gives an empty cover") {
  TempDir t;
  write_text(t / "balls.csv", "x,y,radius\n");
  const auto r = invoke({"content", "cover", "--balls", t / "balls.csv", "--dim", "2", "--out", t.path.string()});
  CHECK(r.code == 0);
  const auto csv = read_text(t / "content_cover_cover.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  CHECK(report(t / "content_cover.json")["results"]["input_balls"] == 0);
}

TEST_CASE("usage and configuration errors exit 2") {
  TempDir t;
  const std::string out = t.path.string();
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"bogus"}).code == 2);
  CHECK(invoke({"atom", "check", "--beta", "abc", "--out", out}).code == 2);
  CHECK(invoke({"atom", "check", "--atom", t / "missing.csv", "--out", out}).code == 2);
  CHECK(invoke({"potential", "riesz", "--alpha", "1.5", "--out", out}).code == 2);
  CHECK(invoke({"dim", "atomsum", "--count", "3", "--out", out}).code == 2);
  CHECK(invoke({"heat", "--kind", "unknown", "--out", out}).code == 2);

  write_text(t / "broken.json", "{");
  auto r = invoke({"--config", t / "broken.json"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  write_text(t / "extra.json", R"({"command": "heat", "no_such_option": 1})");
  CHECK(invoke({"--config", t / "extra.json"}).code == 2);
  write_text(t / "nocmd.json", R"({"kind": "cantor"})");
  CHECK(invoke({"--config", t / "nocmd.json"}).code == 2);
}

TEST_CASE("config supplies command and defaults; flags win") {
  TempDir t;
  const std::string cfg = t / "c.json";
  write_text(cfg, R"({"command": "dim estimate", "kind": "lebesgue", "n": 128, "out": ")" + t.path.string() +
                      R"("})");
  REQUIRE(invoke({"--config", cfg}).code == 0);
  auto j = report(t / "dim_estimate.json");
  CHECK(j["config"]["n"] == "128");
  CHECK(j["results"]["beta_hat"].get<double>() == doctest::Approx(1.0));

  REQUIRE(invoke({"dim", "estimate", "--config", cfg, "--n", "64"}).code == 0);
  j = report(t / "dim_estimate.json");
  CHECK(j["config"]["n"] == "64");
}

TEST_CASE("DSS_OUT_DIR overrides the config output directory") {
  TempDir t;
  write_text(t / "c.json", R"({"command": "content choquet", "kind": "cantor", "depth": 6, "out": ")" +
                               (t / "from_config") + R"("})");
  ::setenv("DSS_OUT_DIR", (t / "from_env").c_str(), 1);
  const auto r = invoke({"--config", t / "c.json"});
  ::unsetenv("DSS_OUT_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(t / "from_env/content_choquet.json"));
  CHECK_FALSE(fs::exists(t / "from_config"));
  // An explicit --out still wins.
  ::setenv("DSS_OUT_DIR", (t / "from_env2").c_str(), 1);
  CHECK(invoke({"content", "choquet", "--kind", "cantor", "--depth", "6", "--out", t / "flag"}).code == 0);
  ::unsetenv("DSS_OUT_DIR");
  CHECK(fs::exists(t / "flag/content_choquet.json"));
  CHECK_FALSE(fs::exists(t / "from_env2"));
}

TEST_CASE("identical config and seed give identical bytes") {
  TempDir t;
  for (const char* sub : {"a", "b"}) {
    REQUIRE(invoke({"content", "cover", "--dim", "2", "--count", "25", "--seed", "7", "--out", t / sub}).code == 0);
    REQUIRE(invoke({"dim", "estimate", "--kind", "random", "--count", "30", "--seed", "7", "--out", t / sub}).code == 0);
  }
  for (const char* f : {"content_cover_cover.csv", "content_cover.json", "dim_estimate_modulus.csv",
                        "dim_estimate.json"})
    CHECK(read_text(t / (std::string("a/") + f)) == read_text(t / (std::string("b/") + f)));

  REQUIRE(invoke({"content", "cover", "--dim", "2", "--count", "25", "--seed", "8", "--out", t / "c"}).code == 0);
  CHECK(read_text(t / "a/content_cover_cover.csv") != read_text(t / "c/content_cover_cover.csv"));
  CHECK(report(t / "a/content_cover.json")["config_hash"] != report(t / "c/content_cover.json")["config_hash"]);
}
