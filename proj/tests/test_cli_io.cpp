#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "riemannlab/cli_io.hpp"

using namespace riemannlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("riemannlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

RunConfig parse(std::initializer_list<const char*> args) {
  std::vector<const char*> v = {"riemannlab"};
  v.insert(v.end(), args.begin(), args.end());
  return parse_args(int(v.size()), v.data());
}

// Runs the installed binary, returns its exit code; stderr lands in err_file.
int run_bin(const std::string& args, const fs::path& err_file) {
  const char* bin = std::getenv("RIEMANNLAB_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("argument parsing") {
  const RunConfig c = parse({"theta", "eval", "--function", "R", "--t0", "0", "--t1", "6.2832", "--steps", "2000",
                             "--N", "100000"});
  CHECK(c.group == "theta");
  CHECK(c.verb == "eval");
  CHECK(c.raw("t1") == "6.2832");
  CHECK(c.real("t1") == 6.2832);
  CHECK(c.integer("N") == 100000);
  CHECK(c.out == "theta_eval.csv");
  // defaults are filled in and echoed
  CHECK(c.raw("omega") == "0/1");

  const RunConfig f = parse({"frame", "trajectory", "--n", "16", "--nu", "1", "--Gamma", "1", "--omega", "0/1",
                             "--T", "0.25", "--out", "x.csv"});
  CHECK(f.integer("n") == 16);
  CHECK(f.rational("omega").a == 0);
  CHECK(f.out == "x.csv");

  const RunConfig l = parse({"nls", "decay", "--ns", "8,16,32"});
  CHECK(l.integers("ns") == std::vector<long long>{8, 16, 32});

  CHECK_THROWS_AS(parse({"theta", "eval", "--bogus", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"theta", "nothing"}), UsageError);
  CHECK_THROWS_AS(parse({"nope", "eval"}), UsageError);
  CHECK_THROWS_AS(parse({"gauss", "sum", "--svg", "x.svg"}), UsageError);
  try {
    parse({"theta", "eval", "--steps", "abc"});
    FAIL("no throw");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("--steps") != std::string::npos);
  }
  CHECK_THROWS_AS(parse({"frame", "trajectory", "--omega", "2/4"}), UsageError);
  CHECK_THROWS_AS(parse({"theta", "eval", "--function", "zeta"}), UsageError);
  CHECK_FALSE(parse({"theta", "eval", "--help"}).help.empty());

  const RationalTorsion r = parse_rational("3/7");
  CHECK(r.a == 3);
  CHECK(r.b == 7);
  CHECK_THROWS(parse_rational("1/0"));
  CHECK_THROWS(parse_rational("-3/7"));
  CHECK_THROWS(parse_rational("x"));

  // every command in the table parses with its defaults
  for (const auto& cmd : command_table()) {
    const RunConfig d = parse({cmd.group.c_str(), cmd.verb.c_str()});
    CHECK(d.params.size() == cmd.params.size());
  }
}

TEST_CASE("CSV, JSON and SVG writers") {
  Table t;
  t.columns = {"t"};
  t.add_complex_columns("z");
  t.rows = {{0.1, 1.0 / 3.0, -2.0e-300}, {std::nextafter(1.0, 2.0), 6.02214076e23, -0.0}};
  const fs::path p = scratch() / "round.csv";
  write_csv(t, p.string());
  const Table back = read_csv(p.string());
  CHECK(back.columns == std::vector<std::string>{"t", "z_re", "z_im"});
  REQUIRE(back.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(back.rows[i][j] == t.rows[i][j]);

  Table empty;
  empty.columns = {"a", "b"};
  const fs::path e = scratch() / "empty.csv";
  write_csv(empty, e.string());
  CHECK(slurp(e) == "a,b\n");
  CHECK(read_csv(e.string()).rows.empty());

  Table bad = t;
  bad.rows.push_back({1.0});
  const fs::path b = scratch() / "bad.csv";
  CHECK_THROWS_AS(write_csv(bad, b.string()), IoError);
  CHECK_FALSE(fs::exists(b));
  try {
    write_csv(t, "/nonexistent_dir/x.csv");
    FAIL("no throw");
  } catch (const IoError& err) {
    CHECK(std::string(err.what()).find("/nonexistent_dir/x.csv") != std::string::npos);
  }

  nlohmann::ordered_json j;
  j["zeta"] = 1;
  j["alpha"] = "x";
  const fs::path jp = scratch() / "m.json";
  write_json(j, jp.string());
  const std::string js = slurp(jp);
  CHECK(js.find("zeta") < js.find("alpha"));

  const fs::path sp = scratch() / "c.svg";
  write_svg_polyline({{0.0, 0.0}, {2.0, 1.0}, {1.0, -1.0}}, sp.string());
  const std::string svg = slurp(sp);
  CHECK(svg.find("viewBox=\"0 0 1 1\"") != std::string::npos);
  std::size_t count = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++count;
  CHECK(count == 1);
}

TEST_CASE("run_command: outputs, metadata, determinism") {
  const fs::path out1 = scratch() / "g1.csv", out2 = scratch() / "g2.csv";
  std::string err;
  RunConfig c = parse({"gauss", "check", "--qmax", "41"});
  c.out = out1.string();
  REQUIRE(run_command(c, err) == 0);
  c.out = out2.string();
  REQUIRE(run_command(c, err) == 0);
  CHECK(slurp(out1) == slurp(out2));
  const Table t = read_csv(out1.string());
  CHECK(t.rows.size() == 21);
  for (const auto& row : t.rows) CHECK(row[1] < 1e-9);

  const auto meta = nlohmann::ordered_json::parse(slurp(out1.string() + ".meta.json"));
  CHECK(meta["command"] == "gauss check");
  CHECK(meta["parameters"]["qmax"] == "41");
  CHECK(meta["version"] == kVersion);
  CHECK(meta.contains("timestamp"));
  CHECK(meta.contains("achieved"));
  CHECK(meta["outputs"][0] == out1.string());

  // the R~ trajectory in the complex plane as a polyline
  const fs::path tr = scratch() / "tilde.csv", svg = scratch() / "tilde.svg";
  RunConfig tc = parse({"theta", "eval", "--function", "tilde", "--t0", "0", "--t1", "1", "--steps", "200",
                        "--N", "2000"});
  tc.out = tr.string();
  tc.svg = svg.string();
  REQUIRE(run_command(tc, err) == 0);
  CHECK(fs::exists(svg));
  CHECK(read_csv(tr.string()).rows.size() == 201);

  // a numerical failure leaves nothing behind
  const fs::path bad = scratch() / "corner.csv";
  RunConfig fc = parse({"theta", "eval", "--function", "corner", "--t0", "0", "--t1", "0.1", "--steps", "4"});
  fc.out = bad.string();
  CHECK(run_command(fc, err) == 1);
  const auto rep = nlohmann::json::parse(err);
  CHECK(rep.contains("error"));
  CHECK_FALSE(fs::exists(bad));
  CHECK_FALSE(fs::exists(bad.string() + ".meta.json"));
}

TEST_CASE("binary exit codes") {
  const fs::path errf = scratch() / "stderr.txt";
  CHECK(run_bin("theta eval --bogus 1", errf) == 2);
  CHECK(slurp(errf).find("--bogus") != std::string::npos);
  CHECK(run_bin("theta eval --steps -x", errf) == 2);
  CHECK(run_bin("--help", errf) == 0);

  const fs::path o = scratch() / "bin.csv";
  CHECK(run_bin("theta eval --function R --t0 0 --t1 6.2832 --steps 200 --N 1000 --out " + o.string(), errf) == 0);
  CHECK(fs::exists(o));
  CHECK(fs::exists(o.string() + ".meta.json"));

  const fs::path f = scratch() / "fail.csv";
  CHECK(run_bin("theta eval --function corner --t0 0 --out " + f.string(), errf) == 1);
  const auto rep = nlohmann::json::parse(slurp(errf));
  CHECK(rep["command"] == "theta eval");
  CHECK_FALSE(fs::exists(f));
}
