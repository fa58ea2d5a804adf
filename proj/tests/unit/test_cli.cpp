#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "meso/error.hpp"
#include "meso/table.hpp"
#include "meso/weak/operators.hpp"
#include "mesokit/cli.hpp"

namespace fs = std::filesystem;
using namespace mesokit::cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mesokit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "mesokit_cli_tests" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

// Every CSV listed in the manifest, by relative path.
std::map<std::string, std::string> csv_outputs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  const auto m = manifest(dir);
  for (const auto& o : m["outputs"]) {
    const std::string rel = o["path"];
    if (fs::path(rel).extension() == ".csv") files[rel] = slurp(dir / rel);
  }
  return files;
}

// y = 2 a − 0.5 c over random columns a, b, c.
void write_exact_library(const fs::path& dir) {
  meso::weak::OperatorLibrary lib;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  lib.labels = {"a", "b", "c"};
  lib.chi.resize(60, 3);
  for (Eigen::Index r = 0; r < 60; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) lib.chi(r, c) = g(rng);
  lib.y = 2.0 * lib.chi.col(0) - 0.5 * lib.chi.col(2);
  lib.dof_map.resize(60);
  meso::weak::write_library(lib, dir);
}

}  // namespace

TEST(Checksum, MatchesPublishedFnv1aVectors) {
  const fs::path dir = scratch();
  const std::vector<std::pair<std::string, std::uint64_t>> cases{
      {"", 0xcbf29ce484222325ULL}, {"a", 0xaf63dc4c8601ec8cULL}, {"foobar", 0x85944171f73967e8ULL}};
  for (const auto& [text, expected] : cases) {
    write_text(dir / "f", text);
    EXPECT_EQ(fnv1a64_file(dir / "f"), expected) << '"' << text << '"';
  }
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(1), "0000000000000001");
  EXPECT_THROW(fnv1a64_file(dir / "absent"), meso::IoError);
}

TEST(Usage, UnknownSubcommandIsAUsageError) {
  const auto r = invoke({"frobnicate"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("frobnicate"), std::string::npos);
  EXPECT_NE(r.out.find("allen-cahn-rom"), std::string::npos);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"vsi", "--y", "y.csv"}).code, kExitUsage);  // --chi is required
  EXPECT_EQ(invoke({"dns", "--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(invoke({"dns", "--set", "novalue"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST(Usage, MissingInputFileNamesThePath) {
  const fs::path dir = scratch();
  write_exact_library(dir);
  const std::string missing = (dir / "no_such_chi.csv").string();
  const auto r = invoke({"vsi", "--chi", missing, "--y", (dir / "y.csv").string(), "--out-dir", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.json"));

  const auto c = invoke({"dns", "--config", (dir / "absent.ini").string()});
  EXPECT_EQ(c.code, kExitFailure);
  EXPECT_NE(c.err.find("absent.ini"), std::string::npos);
}

TEST(Usage, ConfigurationErrorsExitWithTwo) {
  const fs::path dir = scratch();
  write_text(dir / "bad.ini", "[allen_cahn]\nstepz = 4\n");
  const auto r = invoke({"dns", "--config", (dir / "bad.ini").string(), "--out-dir", (dir / "o").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("stepz"), std::string::npos);
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1);  // one-line diagnostic
  EXPECT_EQ(invoke({"dns", "--set", "dns.model=cahn_hilliard", "--out-dir", (dir / "o").string()}).code, kExitFailure);
}

TEST(Vsi, WritesTraceModelAndManifest) {
  const fs::path dir = scratch();
  write_exact_library(dir);
  write_text(dir / "vsi.ini", "[VSI]\ntarget_index = 0\n[StepwiseRegression]\nregression_method = ols\nF_criteria = 1\n");
  const fs::path out = dir / "out";
  const auto r = invoke({"vsi", "--config", (dir / "vsi.ini").string(), "--chi", (dir / "chi.csv").string(), "--y",
                         (dir / "y.csv").string(), "--out-dir", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(out / "model.csv").substr(0, 20), "label,coefficient\na,");
  EXPECT_NE(slurp(out / "model.csv").find("\nc,"), std::string::npos);
  EXPECT_EQ(slurp(out / "model.csv").find("\nb,"), std::string::npos);
  const std::string trace = slurp(out / "trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "iteration,dropped,loss,F,a,b,c");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 3);

  const auto m = manifest(out);
  EXPECT_EQ(m["subcommand"], "vsi");
  EXPECT_EQ(m["inputs"]["chi"], (dir / "chi.csv").string());
  EXPECT_NE(std::string(m["config"]).find("regression_method = ols"), std::string::npos);
  std::set<std::string> listed;
  for (const auto& o : m["outputs"]) {
    const std::string rel = o["path"];
    listed.insert(rel);
    EXPECT_EQ(o["fnv1a64"], hex64(fnv1a64_file(out / rel))) << rel;
    EXPECT_EQ(o["bytes"], fs::file_size(out / rel)) << rel;
  }
  for (const char* f : {"trace.csv", "model.csv", "loss.csv", "confirmation.csv"}) EXPECT_TRUE(listed.count(f)) << f;
}

TEST(Manifest, OverridesAndSeedAreEchoed) {
  const fs::path dir = scratch();
  write_text(dir / "ac.ini", "[allen_cahn]\nsteps = 100\nsave_every = 50\nnodes = 33\n");
  const fs::path out = dir / "out";
  const auto r = invoke({"dns", "--config", (dir / "ac.ini").string(), "--set", "allen_cahn.steps=20", "--seed", "7",
                         "--out-dir", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto m = manifest(out);
  const std::string cfg = m["config"];
  EXPECT_NE(cfg.find("steps = 20"), std::string::npos);
  EXPECT_EQ(cfg.find("steps = 100"), std::string::npos);
  EXPECT_NE(cfg.find("seed = 7"), std::string::npos);
  EXPECT_EQ(m["seeds"]["initial_condition"], "7");
  EXPECT_EQ(m["config_file"], (dir / "ac.ini").string());
  // 20 steps saved every 50: the initial and final snapshots only.
  EXPECT_TRUE(fs::exists(out / "series" / "snapshot_00001.csv"));
  EXPECT_FALSE(fs::exists(out / "series" / "snapshot_00002.csv"));
  EXPECT_EQ(meso::read_csv(out / "observables.csv").rows(), 2u);
}

TEST(PlotData, GnuplotTwinsAndHeaderOnlyTables) {
  const fs::path dir = scratch();
  RunContext ctx;
  ctx.out_dir = dir;
  ctx.gnuplot = true;
  meso::Table loss(std::vector<std::string>{"iteration", "loss"});
  loss.add_row(std::vector<double>{1, 0.5});
  loss.add_row(std::vector<double>{2, 0.25});
  ctx.emit(loss, "loss.csv");
  ctx.emit(meso::Table(std::vector<std::string>{"eta0", "eta1", "f"}), "slices/empty.csv");
  EXPECT_EQ(slurp(dir / "loss.csv"), "iteration,loss\n1,0.5\n2,0.25\n");
  EXPECT_EQ(slurp(dir / "slices/empty.csv"), "eta0,eta1,f\n");
  EXPECT_TRUE(fs::exists(dir / "loss.dat"));
  EXPECT_EQ(slurp(dir / "loss.dat").front(), '#');
  EXPECT_EQ(ctx.outputs, (std::vector<std::string>{"loss.csv", "loss.dat", "slices/empty.csv", "slices/empty.dat"}));
  const auto recs = write_manifest(ctx, 0.0);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[0].checksum, fnv1a64_file(dir / "loss.csv"));
}

// Same configuration and seed, twice: every CSV is byte-identical. A different seed changes them.
TEST(Determinism, RepeatedRunsAreByteIdentical) {
  const fs::path dir = scratch();
  write_text(dir / "ac.ini", "[allen_cahn]\nsteps = 60\nsave_every = 20\n");
  write_text(dir / "rom.ini", "[allen_cahn]\nsteps = 100\nnodes = 65\n[ensemble]\ntrajectories = 6\n");
  write_text(dir / "al.ini",
             "[workflow]\nrounds = 2\nglobal_batch = 30\nlocal_batch = 10\nscreening = 80\nslice_resolution = 5\n"
             "[training]\nepochs = 4\n[hyperparameter_search]\ncandidates = 4; 6\nepochs = 2\n");
  {
    std::ofstream d(dir / "idnn.csv");
    d << "x,mu\n";
    for (int i = 0; i < 40; ++i) {
      const double x = -1.0 + 2.0 * i / 39.0;
      d << meso::format_number(x) << ',' << meso::format_number(4 * x * x * x - 2 * x) << '\n';
    }
  }
  write_text(dir / "idnn.ini", "[idnn]\ninputs = x\ngradients = mu\nhidden = 8, 8\n[training]\nepochs = 20\n");

  const std::vector<std::vector<std::string>> runs{
      {"dns", "--config", (dir / "ac.ini").string()},
      {"allen-cahn-rom", "--config", (dir / "rom.ini").string()},
      {"active-learning", "--config", (dir / "al.ini").string()},
      {"idnn", "--config", (dir / "idnn.ini").string(), "--data", (dir / "idnn.csv").string()},
  };
  for (const auto& base : runs) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 3; ++rep) {
      auto args = base;
      const fs::path out = dir / (base[0] + "_" + std::to_string(rep));
      args.insert(args.end(), {"--seed", rep < 2 ? "11" : "12", "--out-dir", out.string()});
      const auto r = invoke(args);
      ASSERT_EQ(r.code, kExitOk) << base[0] << ": " << r.err;
      const auto files = csv_outputs(out);
      ASSERT_FALSE(files.empty()) << base[0];
      if (rep == 0) first = files;
      else if (rep == 1) EXPECT_EQ(files, first) << base[0];
      else EXPECT_NE(files, first) << base[0] << " ignores --seed";
    }
  }
}
