#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "tj/config.hpp"
#include "tj/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path r = [] {
    const fs::path p = fs::temp_directory_path() / "tj_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return r;
}

int run(const std::string& args) {
  const std::string cmd = std::string(TJLAB_PATH) + " " + args + " -q > /dev/null 2>> " + (root() / "stderr.txt").string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_config(const std::string& name, const std::string& field_extra) {
  const fs::path p = root() / name;
  std::ofstream(p) << "{\n"
                   << "  \"profile\": { \"n_1d\": 801, \"convergence_n\": [401, 801] },\n"
                   << "  \"field\": { \"Lx\": 8, \"n_2d\": 129" << field_extra << " },\n"
                   << "  \"diagnostics\": { \"radii\": [2, 4], \"triangle_radii\": [1.5], \"equipartition_radii\": [2],\n"
                   << "    \"strip_radii\": [3, 5], \"xs\": [2, 3, 4, 5], \"h_prime_x\": 3 }\n"
                   << "}\n";
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double relax_value(const fs::path& csv, const std::string& key) {
  std::istringstream in(slurp(csv));
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ",", 0) == 0) return std::stod(line.substr(key.size() + 1));
  return NAN;
}

fs::path run_dir(const std::string& config, const fs::path& out) { return out / tj::run_id(tj::load_config(config)); }

}  // namespace

TEST_CASE("bad configs exit with status 2") {
  const fs::path bad = root() / "bad.json";
  std::ofstream(bad) << "{ \"field\": { \"nope\": 1 } }";
  CHECK(run("hetero --config " + bad.string()) == 2);
  const fs::path invalid = root() / "invalid.json";
  std::ofstream(invalid) << "{ \"profile\": { \"n_1d\": 2 } }";
  CHECK(run("hetero --config " + invalid.string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("config") == 0);
}

TEST_CASE("hetero reruns are byte-identical") {
  const std::string cfg = write_config("small.json", "");
  const fs::path a = root() / "a", snap = root() / "snapshot";
  REQUIRE(run("hetero --config " + cfg + " --out " + a.string()) == 0);
  const fs::path da = run_dir(cfg, a);
  fs::copy(da, snap, fs::copy_options::recursive);
  REQUIRE(run("hetero --config " + cfg + " --out " + a.string()) == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(snap)) {
    const fs::path again = da / e.path().filename();
    REQUIRE(fs::exists(again));
    CHECK_MESSAGE(slurp(e.path()) == slurp(again), e.path().filename().string());
    ++files;
  }
  CHECK(files >= 10);
}

TEST_CASE("corrupted checkpoints exit with status 4") {
  const std::string cfg = write_config("small.json", "");
  const fs::path out = root() / "a";
  const fs::path dir = run_dir(cfg, out);
  REQUIRE(fs::exists(dir));
  const fs::path ck = root() / "corrupt.acf2";
  std::ofstream(ck, std::ios::binary) << "XXXX0000garbage";
  CHECK(run("diagnose --config " + cfg + " --out " + out.string() + " " + ck.string()) == 4);
  CHECK(run("diagnose --config " + cfg + " --out " + (root() / "empty").string()) == 4);
}

TEST_CASE("interrupted relaxation resumes where it stopped") {
  const std::string short_cfg = write_config("short.json", ", \"max_iter\": 40");
  const std::string full_cfg = write_config("full.json", "");
  const fs::path out = root() / "relax";
  CHECK(run("relax --config " + short_cfg + " --out " + out.string()) == 3);
  const fs::path dshort = run_dir(short_cfg, out);
  const double stopped = relax_value(dshort / (dshort.filename().string() + ".relax.csv"), "final_energy");
  REQUIRE(std::isfinite(stopped));
  const fs::path ck = root() / "stopped.acf2";
  fs::copy_file(dshort / (dshort.filename().string() + ".field.acf2"), ck, fs::copy_options::overwrite_existing);

  const fs::path dfull = run_dir(full_cfg, out);
  const fs::path csv = dfull / (dfull.filename().string() + ".relax.csv");
  REQUIRE(run("relax --config " + full_cfg + " --out " + out.string()) == 0);
  const double direct = relax_value(csv, "final_energy");

  REQUIRE(run("relax --config " + full_cfg + " --out " + out.string() + " --resume " + ck.string()) == 0);
  CHECK(relax_value(csv, "resumed") == 1.0);
  CHECK(relax_value(csv, "start_energy") == doctest::Approx(stopped).epsilon(1e-10));
  CHECK(relax_value(csv, "final_energy") == doctest::Approx(direct).epsilon(1e-8));
  CHECK(relax_value(csv, "final_energy") <= stopped);

  // A checkpoint from another grid is refused.
  const fs::path other = root() / "other.acf2";
  tj::write_checkpoint(other.string(), tj::Field2D(tj::GridSpec{8.0, 65}, {0.0, 0.0}));
  CHECK(run("relax --config " + full_cfg + " --out " + out.string() + " --resume " + other.string()) == 4);
}
