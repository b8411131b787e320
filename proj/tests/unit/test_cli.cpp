#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "config.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpmfs;
using namespace qpmfs::cli;

namespace {

json tiny_config() {
  return json::parse(R"({
    "format": "qpmfs-config-1",
    "geometry": {"shape": "smooth", "scale": 0.3},
    "bc": "neumann",
    "incident": {"k": 2.0, "theta": -0.7853981633974483, "phi": 1.0471975511965976},
    "lattice": {"ex": 2.0, "ey": 2.0},
    "numerics": {"N": 40, "P": 16, "tau": 0.15, "p": 8, "N0": 5, "M1": 8}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qpmfs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& j, const std::string& name = "cfg.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }
  // Runs the CLI; returns its exit status and captures stdout/stderr.
  int run(const std::string& args) {
    const std::string cmd = std::string(QPMFS_BIN) + " " + args + " > " + (dir_ / "out.txt").string() +
                            " 2> " + (dir_ / "err.txt").string();
    const int st = std::system(cmd.c_str());
    out_ = slurp(dir_ / "out.txt");
    err_ = slurp(dir_ / "err.txt");
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }

  fs::path dir_;
  std::string out_, err_;
};

}  // namespace

TEST(Config, ParsesAndResolves) {
  const RunConfig c = parse_config(tiny_config());
  EXPECT_EQ(c.shape, ShapeTag::smooth);
  EXPECT_EQ(c.numerics.mfs.N, 40);
  EXPECT_NEAR(c.incident().kvec.z(), -std::sqrt(2.0), 1e-15);
  const json r = resolved_config(c);
  EXPECT_EQ(r["format"], kConfigFormat);
  EXPECT_EQ(r["numerics"]["M"], 48);
  EXPECT_EQ(r["numerics"]["backend"], "direct");
  EXPECT_NO_THROW(parse_config(r));
}

TEST(Config, MissingKeyNamed) {
  json j = tiny_config();
  j["incident"].erase("k");
  try {
    parse_config(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("incident.k"), std::string::npos) << e.what();
  }
  j = tiny_config();
  j.erase("geometry");
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, Rejections) {
  auto bad = [](const std::string& path, const json& v) {
    json j = tiny_config();
    apply_override(j, path + "=" + v.dump());
    return j;
  };
  EXPECT_THROW(parse_config(bad("numerics.P", 15)), ConfigError);
  EXPECT_THROW(parse_config(bad("numerics.q", 8)), ConfigError);
  EXPECT_THROW(parse_config(bad("numerics.N", -3)), ConfigError);
  EXPECT_THROW(parse_config(bad("numerics.backend", "fmm")), ConfigError);
  EXPECT_THROW(parse_config(bad("numerics.typo", 1)), ConfigError);
  EXPECT_THROW(parse_config(bad("bc", "dirichlet")), ConfigError);
  EXPECT_THROW(parse_config(bad("bc", "transmission")), ConfigError);  // no k_minus
  EXPECT_THROW(parse_config(bad("format", "qpmfs-config-0")), ConfigError);
  EXPECT_THROW(parse_config(bad("geometry.shape", "blob")), InputError);
}

TEST(Config, OverridesAndComplexKMinus) {
  json j = tiny_config();
  apply_override(j, "bc=transmission");
  apply_override(j, "incident.k_minus={\"re\":6,\"im\":0.5}");
  apply_override(j, "numerics.p=12");
  const RunConfig c = parse_config(j);
  EXPECT_EQ(c.bc, BcKind::transmission);
  EXPECT_EQ(c.k_minus, cplx(6, 0.5));
  EXPECT_EQ(c.numerics.p, 12);
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
  const json r = resolved_config(c);
  EXPECT_EQ(r["incident"]["k_minus"]["im"], 0.5);
}

TEST(Report, CsvFormats) {
  std::ostringstream os;
  write_scan_csv(os, {{"p", 8, 1e-3, 2e-4, NAN, 12, 1.5}});
  EXPECT_EQ(os.str(),
            "param,value,eps_bc,eps_per,eps_flux,iters,seconds\r\n"
            "p,8,0.001,0.00020000000000000001,,12,1.5\r\n");
  EXPECT_THROW(parse_slice("w=0", "0:1:2", "0:1:2"), ConfigError);
  const auto s = parse_slice("y=0.5", "-1:1:3", "0:2:2");
  const auto pts = slice_points(s);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[1], Vec3(0, 0.5, 0));
  EXPECT_EQ(pts[5], Vec3(1, 0.5, 2));
}

TEST_F(CliRun, MissingKeyExitsTwo) {
  json j = tiny_config();
  j["numerics"]["P"] = 15;
  EXPECT_EQ(run("solve " + write_config(j).string()), 2);
  EXPECT_NE(err_.find("numerics.P"), std::string::npos) << err_;
  j = tiny_config();
  j.erase("bc");
  EXPECT_EQ(run("solve " + write_config(j).string()), 2);
  EXPECT_NE(err_.find("'bc'"), std::string::npos) << err_;
  EXPECT_EQ(run("solve " + (dir_ / "absent.json").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(CliRun, DryRunTouchesNothing) {
  const fs::path cfg = write_config(tiny_config());
  const fs::path out = dir_ / "results";
  EXPECT_EQ(run("solve " + cfg.string() + " --dry-run --out " + out.string()), 0);
  EXPECT_FALSE(fs::exists(out));
  const json r = json::parse(out_);
  EXPECT_EQ(r["numerics"]["N"], 40);
}

TEST_F(CliRun, WoodHardStopAndOverride) {
  json j = tiny_config();
  j["incident"] = {{"kvec", {0, 0, -2 * pi}}};
  j["lattice"] = {{"ex", 1.0}, {"ey", 1.0}};
  j["geometry"]["scale"] = 0.2;
  const fs::path cfg = write_config(j);
  EXPECT_EQ(run("wood " + cfg.string() + " --out " + dir_.string()), 4);
  const json w = json::parse(slurp(dir_ / "wood.json"));
  EXPECT_TRUE(w["hard"]);
  EXPECT_EQ(w["format"], "qpmfs-result-1");
  EXPECT_EQ(run("solve " + cfg.string() + " --out " + dir_.string()), 4);
  EXPECT_NE(err_.find("Wood"), std::string::npos);
  EXPECT_EQ(run("wood " + cfg.string() + " --allow-wood --out " + dir_.string()), 0);
}

TEST_F(CliRun, SolveWritesResultAndIsDeterministic) {
  const fs::path cfg = write_config(tiny_config());
  const fs::path a = dir_ / "a";
  ASSERT_EQ(run("solve " + cfg.string() + " --threads 1 --no-timings --out " + a.string()), 0) << err_;
  const std::string ra = slurp(a / "result.json");
  fs::remove_all(a);
  ASSERT_EQ(run("solve " + cfg.string() + " --threads 1 --no-timings --out " + a.string()), 0) << err_;
  EXPECT_EQ(ra, slurp(a / "result.json"));
  const json r = json::parse(ra);
  EXPECT_EQ(r["format"], "qpmfs-result-1");
  EXPECT_EQ(r["config"]["numerics"]["q"].get<int>() >= 16, true);
  EXPECT_TRUE(r["converged"]);
  EXPECT_FALSE(r.contains("timings"));
  bool found00 = false;
  for (const auto& m : r["modes"]) {
    EXPECT_TRUE(m["a"].contains("re") && m["a"].contains("im"));
    EXPECT_TRUE(m["kz"].contains("im"));
    if (m["m"] == 0 && m["n"] == 0) {
      found00 = true;
      EXPECT_TRUE(m["propagating"]);
    }
  }
  EXPECT_TRUE(found00);
  for (const char* key : {"eps_bc", "eps_per", "eps_flux", "wood_margin"})
    EXPECT_LT(r["errors"][key].get<double>(), key == std::string("wood_margin") ? 10.0 : 1e-4);

  ASSERT_EQ(run("solve " + cfg.string() + " --out " + a.string()), 0);
  const json timed = json::parse(slurp(a / "result.json"));
  for (const char* key : {"fill", "factor", "solve"}) EXPECT_TRUE(timed["timings"].contains(key));
}

TEST_F(CliRun, FieldCsvWithInsideFlag) {
  json j = tiny_config();
  apply_override(j, "bc=transmission");
  apply_override(j, "incident.k_minus=3");
  const fs::path cfg = write_config(j);
  ASSERT_EQ(run("field " + cfg.string() + " --plane y=0 --u -1.5:1.5:7 --v -1.5:1.5:5 --out " +
                dir_.string()),
            0)
      << err_;
  const std::string csv = slurp(dir_ / "field.csv");
  EXPECT_EQ(csv.rfind("x,y,z,re_u,im_u,re_ut,im_ut,inside\r\n", 0), 0u);
  std::size_t lines = 0, inside = 0;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    ++lines;
    ASSERT_EQ(line.back(), '\r');
    if (line[line.size() - 2] == '1') {
      ++inside;
      EXPECT_EQ(line.find(",,"), std::string::npos) << "transmission interior field missing";
    }
  }
  EXPECT_EQ(lines, 35u);
  EXPECT_GE(inside, 1u);
  const json meta = json::parse(slurp(dir_ / "field.csv.meta.json"));
  EXPECT_EQ(meta["kind"], "field");
  EXPECT_EQ(meta["config"]["bc"], "transmission");
}

TEST_F(CliRun, ScanAndOnebody) {
  const fs::path cfg = write_config(tiny_config());
  ASSERT_EQ(run("scan " + cfg.string() + " --param p --values 4,8 --out " + dir_.string()), 0) << err_;
  const std::string csv = slurp(dir_ / "scan.csv");
  EXPECT_EQ(csv.rfind("param,value,eps_bc,eps_per,eps_flux,iters,seconds\r\n", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "scan.csv.meta.json"));
  EXPECT_EQ(run("scan " + cfg.string() + " --param tau --values 1 --out " + dir_.string()), 2);

  ASSERT_EQ(run("onebody " + cfg.string() + " --out " + dir_.string()), 0) << err_;
  const json o = json::parse(slurp(dir_ / "onebody.json"));
  EXPECT_LT(o["eps1"].get<double>(), 1e-3);
  EXPECT_LT(o["eps2"].get<double>(), 1e-3);
  EXPECT_EQ(o["format"], "qpmfs-result-1");
}
