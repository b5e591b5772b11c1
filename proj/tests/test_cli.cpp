#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("seqaudit_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
  }

  CliResult run(const std::string& args) {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(SEQAUDIT_CLI) + " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  std::string cfg(const std::string& name) { return std::string(SEQAUDIT_CONFIGS) + "/" + name; }
};

const char* kSmallIid = R"([model]
kind = iid
mu1 = 0
mu2 = 1
sigma1 = 5
sigma2 = 10

[thresholds]
l1 = 4
l2 = -2

[experiment]
trials = 20000
seed = 3
)";

}  // namespace

TEST_F(Cli, MissingTrialsNamesTheKey) {
  std::string text = kSmallIid;
  text.erase(text.find("trials = 20000\n"), 15);
  const auto r = run("simulate " + write("c.cfg", text).string() + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("experiment.trials"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownKeyIsRejectedWithLine) {
  const auto r = run("simulate " + write("c.cfg", std::string(kSmallIid) + "tirals = 5\n").string() +
                     " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("c.cfg:15"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("experiment.tirals"), std::string::npos) << r.err;
}

TEST_F(Cli, BadCommandLineIsAConfigError) {
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("simulate").code, 2);
}

TEST_F(Cli, SimulateIsByteIdenticalAcrossRunsAndThreads) {
  const auto c = write("c.cfg", kSmallIid).string();
  ASSERT_EQ(run("simulate " + c + " --out-dir " + (dir / "a").string()).code, 0);
  ASSERT_EQ(run("simulate " + c + " --out-dir " + (dir / "b").string()).code, 0);
  ASSERT_EQ(run("--threads 3 simulate " + c + " --out-dir " + (dir / "c").string()).code, 0);
  const std::string a = slurp(dir / "a/records.csv");
  EXPECT_GT(a.size(), 100000u);
  EXPECT_EQ(a, slurp(dir / "b/records.csv"));
  EXPECT_EQ(a, slurp(dir / "c/records.csv"));
  EXPECT_TRUE(fs::exists(dir / "a/records.meta"));
  EXPECT_TRUE(fs::exists(dir / "a/simulate.manifest"));
}

TEST_F(Cli, SeedFlagChangesOutput) {
  const auto c = write("c.cfg", kSmallIid).string();
  ASSERT_EQ(run("simulate " + c + " --out-dir " + (dir / "a").string()).code, 0);
  ASSERT_EQ(run("--seed 99 simulate " + c + " --out-dir " + (dir / "b").string()).code, 0);
  EXPECT_NE(slurp(dir / "a/records.csv"), slurp(dir / "b/records.csv"));
  EXPECT_NE(slurp(dir / "b/simulate.manifest").find("seed = 99"), std::string::npos);
}

TEST_F(Cli, RerunFromManifestReproducesOutputs) {
  const auto c = write("c.cfg", kSmallIid).string();
  ASSERT_EQ(run("--set experiment.trials=5000 simulate " + c + " --out-dir " + (dir / "a").string())
                .code, 0);
  ASSERT_EQ(run("rerun " + (dir / "a/simulate.manifest").string() + " --out-dir " + (dir / "b").string())
                .code, 0);
  EXPECT_EQ(slurp(dir / "a/records.csv"), slurp(dir / "b/records.csv"));
  EXPECT_EQ(slurp(dir / "a/records.meta"), slurp(dir / "b/records.meta"));
  EXPECT_NE(slurp(dir / "a/records.meta").find("trials=5000"), std::string::npos);

  ASSERT_EQ(run("analytic " + cfg("fig8_mi_discretized.cfg") + " --out-dir " + (dir / "c").string()).code, 0);
  ASSERT_EQ(run("rerun " + (dir / "c/analytic.manifest").string() + " --out-dir " + (dir / "d").string())
                .code, 0);
  EXPECT_EQ(slurp(dir / "c/analytic_mi-discretized.csv"), slurp(dir / "d/analytic_mi-discretized.csv"));
}

TEST_F(Cli, KnownHypothesisTestOnMatchedAndMismatchedData) {
  const auto c = write("c.cfg", kSmallIid).string();
  ASSERT_EQ(run("simulate " + c + " --out-dir " + dir.string()).code, 0);
  const auto t = write("t.cfg", "[test]\nrecords = " + (dir / "records.csv").string() + "\n");
  auto r = run("test " + t.string() + " --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("p = "), std::string::npos);
  EXPECT_NE(r.out.find("reject at 0.01"), std::string::npos);
  const std::string report = slurp(dir / "test_report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')),
            "comparison,method,statistic,p_value,n1,n2,dof,reject_0.01,reject_0.05");

  const auto m = write("m.cfg", std::string(kSmallIid) +
                                    "trials = 100000\n[device]\nmu2 = 5\nmax_steps = 10\n[model]\n");
  (void)m;
  std::string mis = kSmallIid;
  mis.replace(mis.find("mu1 = 0"), 7, "mu1 = -2");
  mis.replace(mis.find("trials = 20000"), 14, "trials = 100000");
  mis += "\n[device]\nmu2 = 5\nmax_steps = 10\n";
  ASSERT_EQ(run("simulate " + write("mis.cfg", mis).string() + " --out-dir " + (dir / "mis").string()).code, 0);
  r = run("test " + t.string() + " --records " + (dir / "mis/records.csv").string() + " --out-dir " +
          dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("reject at 0.01: yes"), std::string::npos) << r.out;
}

TEST_F(Cli, UnknownHypothesisModeWarns) {
  const auto c = write("c.cfg", kSmallIid).string();
  ASSERT_EQ(run("simulate " + c + " --out-dir " + dir.string()).code, 0);
  const auto t = write("t.cfg", "[test]\nrecords = " + (dir / "records.csv").string() + "\n");
  const auto r = run("test " + t.string() + " --mode unknown-h --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("caller's assertion"), std::string::npos);
  EXPECT_NE(r.err.find("symmetric-threshold assumption looks false"), std::string::npos);
}

TEST_F(Cli, SchemaAndPreconditionExitCodes) {
  write("bad.csv", "hypothesis,decision,time,terminal_llr\n1,7,3,\n");
  auto t = write("t.cfg", "[test]\nrecords = " + (dir / "bad.csv").string() + "\n");
  auto r = run("test " + t.string() + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;

  write("oned.csv", "hypothesis,decision,time,terminal_llr\n1,1,3,\n2,1,4,\n1,1,2,\n");
  t = write("t2.cfg", "[test]\nrecords = " + (dir / "oned.csv").string() + "\n");
  r = run("test " + t.string() + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(Cli, AnalyticQuantities) {
  auto r = run("analytic " + cfg("analytic_error_probs.cfg") + " --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string ep = slurp(dir / "analytic_error-probs.csv");
  EXPECT_NE(ep.find("0.0179862099620915"), std::string::npos) << ep;

  const auto zero = write("z.cfg", "[analytic]\nquantity = mi-continuous\na1 = 0.02\na2 = -0.02\nb = 0.02\n"
                                   "[thresholds]\nl1 = 4\n");
  ASSERT_EQ(run("analytic " + zero.string() + " --out-dir " + dir.string()).code, 0);
  EXPECT_EQ(slurp(dir / "analytic_mi-continuous.csv"), "mi_bits\n0\n");

  ASSERT_EQ(run("analytic " + cfg("fig8_mi_discretized.cfg") + " --out-dir " + dir.string()).code, 0);
  std::istringstream rows(slurp(dir / "analytic_mi-discretized.csv"));
  std::string line;
  std::getline(rows, line);
  double prev = 1e300;
  int n = 0;
  while (std::getline(rows, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(v, prev);
    prev = v;
    ++n;
  }
  EXPECT_EQ(n, 5);

  const auto reg = write("r.cfg", "[analytic]\nquantity = density\na1 = 0.02\na2 = -0.02\nb = 0.02\n"
                                  "t_values = 10, 100\n[thresholds]\nl1 = 4\nl2 = -4\n");
  r = run("analytic " + reg.string() + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.err.find("|l2||a1|/b = 4"), std::string::npos) << r.err;

  const auto unk = write("u.cfg", "[analytic]\nquantity = entropy\n[thresholds]\nl1 = 4\n");
  EXPECT_EQ(run("analytic " + unk.string() + " --out-dir " + dir.string()).code, 2);
}

TEST_F(Cli, MiScanSinglePoint) {
  const auto c = write("s.cfg", std::string(kSmallIid) + "\n[scan]\nparam = mu2\nvalues = 1\n");
  const auto r = run("mi-scan " + c.string() + " --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream rows(slurp(dir / "mi_scan.csv"));
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 2);
}

TEST_F(Cli, OracleAndOvershoot) {
  auto r = run("oracle " + cfg("lattice_oracle.cfg") + " --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fluctuation relation holds"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "exact_law.csv"));

  const auto c = write("o.cfg", "[model]\nkind = lattice\np = 0.8\nm1 = 2\nm2 = 2\n[experiment]\ntrials = 10000\n");
  r = run("overshoot " + c.string() + " --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("= 1\n"), std::string::npos) << r.out;
}

TEST_F(Cli, ReproduceRejectsUnknownFigure) {
  const auto r = run("reproduce fig1 --out-dir " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("fig2, fig3, fig4, fig5, fig6, fig7, fig8"), std::string::npos) << r.err;
}

TEST_F(Cli, ReproduceEveryFigureAtTinyScale) {
  const std::pair<const char*, const char*> figs[] = {
      {"fig2", "0.002"}, {"fig3", "0.0001"}, {"fig4", "0.000002"}, {"fig5", "0.00002"},
      {"fig6", "0.0002"}, {"fig7", "0.000005"}, {"fig8", "0.00001"}};
  for (const auto& [id, scale] : figs) {
    const auto out = dir / id;
    const auto r = run(std::string("reproduce ") + id + " --scale " + scale + " --out-dir " + out.string());
    ASSERT_EQ(r.code, 0) << id << ": " << r.err;
    EXPECT_TRUE(fs::exists(out / (std::string("plot_") + id + ".py"))) << id;
    EXPECT_TRUE(fs::exists(out / "reproduce.manifest")) << id;
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(out)) csvs += e.path().extension() == ".csv";
    EXPECT_GE(csvs, 1u) << id;
  }
}
