#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"

#include "ddpn/cli.hpp"
#include "ddpn/io.hpp"
#include "ddpn/text.hpp"

using namespace ddpn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ddpnkit_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

int run(std::vector<std::string> args) { return run_cli(args); }

std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
  std::istringstream is(read_file(p));
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> r;
    for (const auto& f : split(line, ',')) r.push_back(parse_double(f));
    rows.push_back(r);
  }
  return rows;
}

// Small end-to-end pipeline; returns its output root.
fs::path pipeline(const std::string& name) {
  const fs::path d = fresh_dir(name);
  const std::string out = d.string();
  const std::string data = (d / "data").string();
  REQUIRE(run({"simulate", "--process", "sine-conflation", "--seed", "3", "--n-train", "80",
               "--n-val", "20", "--n-test", "20", "--out", out}) == kExitOk);
  REQUIRE(run({"simulate", "--process", "sine-shifted", "--seed", "4", "--n-test", "30", "--out",
               out}) == kExitOk);
  REQUIRE(run({"train", "--train", data + "/sine-conflation_s3_train.csv", "--val",
               data + "/sine-conflation_s3_val.csv", "--epochs", "4", "--hidden", "8,8", "--members",
               "3", "--jobs", "2", "--out", out}) == kExitOk);
  const std::string ens = (d / "ckpt" / "double_poisson_s0_m3.ensemble").string();
  REQUIRE(run({"eval", "--model", (d / "ckpt" / "double_poisson_s1.ckpt").string(), "--data",
               data + "/sine-conflation_s3_test.csv", "--out", out}) == kExitOk);
  REQUIRE(run({"ensemble-eval", "--model", ens, "--data", data + "/sine-conflation_s3_test.csv",
               "--out", out}) == kExitOk);
  REQUIRE(run({"ood", "--model", ens, "--id", data + "/sine-conflation_s3_test.csv", "--ood",
               data + "/sine-shifted_s4_test.csv", "--repeats", "3", "--out", out}) == kExitOk);
  REQUIRE(run({"moments-grid", "--n-mu", "5", "--n-var", "5", "--out", out}) == kExitOk);
  REQUIRE(run({"attenuation-demo", "--n", "60", "--n-val", "20", "--epochs", "3", "--hidden", "8",
               "--beta", "0.5", "--out", out}) == kExitOk);
  return d;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}) == kExitUsage);
  CHECK(run({"--help"}) == kExitOk);
  CHECK(run({"train", "--help"}) == kExitOk);
  CHECK(run({"bogus"}) != kExitOk);
  CHECK(run({"moments-grid", "--nope", "1"}) == kExitUsage);
  CHECK(run({"moments-grid", "--n-mu", "abc"}) == kExitUsage);
  CHECK(run({"simulate", "--process", "unknown", "--out", fresh_dir("usage").string()}) == kExitUsage);
}

TEST_CASE("the installed binary reports exit codes") {
  const char* bin = std::getenv("DDPNKIT_BIN");
  if (!bin) return;
  CHECK(std::system((std::string(bin) + " --help > /dev/null").c_str()) == 0);
  const int rc = std::system((std::string(bin) + " bogus 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(rc) == kExitUsage);
}

TEST_CASE("missing inputs exit with the io code and write nothing") {
  const fs::path d = fresh_dir("missing");
  CHECK(run({"eval", "--model", (d / "none.ckpt").string(), "--data", (d / "none.csv").string(),
             "--out", d.string()}) == kExitIo);
  CHECK(run({"train", "--train", (d / "none.csv").string(), "--val", (d / "none.csv").string(),
             "--out", d.string()}) == kExitIo);
  CHECK(snapshot(d).empty());
}

TEST_CASE("divergence exits with its own code and writes nothing") {
  const fs::path d = fresh_dir("diverge");
  REQUIRE(run({"simulate", "--process", "misspec-poisson", "--n-train", "40", "--n-val", "10",
               "--n-test", "10", "--out", d.string()}) == kExitOk);
  const auto before = snapshot(d);
  const std::string data = (d / "data").string();
  CHECK(run({"train", "--train", data + "/misspec-poisson_s0_train.csv", "--val",
             data + "/misspec-poisson_s0_val.csv", "--gamma-init", "800", "--epochs", "2", "--hidden",
             "4", "--out", d.string()}) == kExitDivergence);
  CHECK(snapshot(d) == before);
}

TEST_CASE("config file values apply and command-line flags override them") {
  const fs::path d = fresh_dir("config");
  REQUIRE(run({"simulate", "--process", "misspec-poisson", "--n-train", "40", "--n-val", "10",
               "--n-test", "10", "--out", d.string()}) == kExitOk);
  const std::string data = (d / "data").string();
  std::ofstream(d / "run.ini") << "[train]\n"
                               << "train=" << data << "/misspec-poisson_s0_train.csv\n"
                               << "val=" << data << "/misspec-poisson_s0_val.csv\n"
                               << "epochs=2\nhidden=4\nbeta=0.5\nseed=7\n"
                               << "out=" << (d / "cfg").string() << "\n";
  REQUIRE(run({"train", "--config", (d / "run.ini").string()}) == kExitOk);
  CHECK(fs::exists(d / "cfg" / "ckpt" / "double_poisson_b0.5_s7.ckpt"));
  REQUIRE(run({"train", "--config", (d / "run.ini").string(), "--beta", "1"}) == kExitOk);
  CHECK(fs::exists(d / "cfg" / "ckpt" / "double_poisson_b1_s7.ckpt"));

  std::ofstream(d / "bad.ini") << "[train]\nnot_an_option=3\n";
  CHECK(run({"train", "--config", (d / "bad.ini").string()}) == kExitUsage);
}

TEST_CASE("pipeline outputs") {
  const fs::path d = pipeline("a");
  const auto files = snapshot(d);
  for (const char* f :
       {"data/sine-conflation_s3_train.csv", "data/sine-shifted_s4_test.csv", "ckpt/double_poisson_s2.ckpt",
        "reports/train_double_poisson_s0.json", "reports/eval_double_poisson_s1_sine-conflation_s3_test.json",
        "reports/ensemble_eval_double_poisson_s0_m3_sine-conflation_s3_test.json",
        "reports/ood_double_poisson_s0_m3_sine-shifted_s4_test.json", "reports/moments_grid_t100.csv",
        "reports/attenuation_b0.5_g0_s0.csv"}) {
    CAPTURE(f);
    CHECK(files.count(f) == 1);
  }
  for (const auto& [name, text] : files) CHECK(name.find(".tmp") == std::string::npos);

  const auto rows = read_csv_rows(d / "reports/decomposition_double_poisson_s0_m3_sine-conflation_s3_test.csv");
  CHECK(rows.size() == 20);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::abs(rows[i][6] - (rows[i][2] + rows[i][3])) <= 1e-10 * rows[i][6]);
    CHECK(rows[i][4] <= rows[i][5]);
    if (i) CHECK(rows[i - 1][0] <= rows[i][0]);
  }
  for (const auto& r : read_csv_rows(d / "reports/moments_grid_t100.csv")) {
    if (r[0] == r[1] && r[0] <= 10.0) {
      CHECK(r[2] <= 1e-9);
      CHECK(r[3] <= 1e-9);
    }
  }
  CHECK(read_csv_rows(d / "reports/attenuation_b0.5_g0_s0.csv").size() == 2 * 3);
}

TEST_CASE("reruns are byte-identical") {
  const auto a = snapshot(pipeline("det1"));
  const auto b = snapshot(pipeline("det2"));
  REQUIRE(a.size() == b.size());
  for (const auto& [name, text] : a) {
    CAPTURE(name);
    REQUIRE(b.count(name) == 1);
    CHECK(b.at(name) == text);
  }
}
