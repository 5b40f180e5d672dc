#include <catch2/catch.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path own_binary_dir() {
  char buf[4096];
  const ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  REQUIRE(n > 0);
  buf[n] = '\0';
  return fs::path(buf).parent_path();
}

std::string cli_path() {
  if (const char* env = std::getenv("SEGFLOW_CLI")) return env;
  return (own_binary_dir() / ".." / "tools" / "segflow").lexically_normal().string();
}

std::string demo_dir() {
  if (const char* env = std::getenv("SEGFLOW_DEMO")) return env;
  return std::string(SEGFLOW_SOURCE_DIR) + "/data/demo";
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path log = fs::temp_directory_path() / ("segflow_cli_log_" + std::to_string(counter++));
  const std::string cmd = cli_path() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.output = buf.str();
  fs::remove(log);
  return r;
}

fs::path fresh_out(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "segflow_cli_test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("usage and version") {
  CHECK(run("").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  const auto v = run("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.output.find("segflow") != std::string::npos);
  CHECK(run("--help").exit_code == 0);
  CHECK(run("segment --help").exit_code == 0);
}

TEST_CASE("validate") {
  const auto good = run("validate " + demo_dir() + "/corpus");
  CHECK(good.exit_code == 0);
  CHECK(good.output.find("ok") != std::string::npos);

  const auto empty = fresh_out("empty_corpus");
  fs::create_directories(empty);
  const auto none = run("validate " + empty.string());
  CHECK(none.exit_code == 2);
  CHECK(none.output.find("no sessions") != std::string::npos);

  const auto bad_dir = fresh_out("bad_corpus");
  fs::create_directories(bad_dir);
  std::ofstream(bad_dir / "broken.session.tsv") << "time\tkind\ttext\tpos\tdur\nnope\tins\ta\t0\t\n";
  const auto bad = run("validate " + bad_dir.string());
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("broken.session.tsv") != std::string::npos);
}

TEST_CASE("profile then segment with saved profiles") {
  const auto pdir = fresh_out("profile");
  const auto p = run("profile " + demo_dir() + "/corpus --out " + pdir.string());
  CHECK(p.exit_code == 0);
  REQUIRE(fs::exists(pdir / "profiles.csv"));
  CHECK(fs::exists(pdir / "study_summary.csv"));
  CHECK(fs::exists(pdir / "thresholds_by_language.csv"));
  CHECK(fs::exists(pdir / "manifest.json"));
  CHECK(slurp(pdir / "profiles.csv").find("translator,language,n_wp") == 0);

  const auto sdir = fresh_out("segment");
  const auto s = run("segment " + demo_dir() + "/corpus --profiles " +
                     (pdir / "profiles.csv").string() + " --out " + sdir.string());
  CHECK(s.exit_code == 0);
  CHECK(fs::exists(sdir / "FIG1.segments.json"));
  CHECK(fs::exists(sdir / "FIG1.tasks.csv"));
  CHECK(fs::exists(sdir / "ts_summary.csv"));
  CHECK(fs::exists(sdir / "ts_overall.csv"));
  CHECK(fs::exists(sdir / "a_only_coverage.csv"));
  CHECK(fs::exists(sdir / "hierarchy_correlations.csv"));
  CHECK(!slurp(sdir / "ts_summary.csv").empty());
}

TEST_CASE("byte-identical reruns") {
  const auto out1 = fresh_out("rerun1");
  const auto out2 = fresh_out("rerun2");
  REQUIRE(run("segment " + demo_dir() + "/corpus --out " + out1.string()).exit_code == 0);
  REQUIRE(run("segment " + demo_dir() + "/corpus --out " + out2.string()).exit_code == 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(out2 / name));
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("hof command") {
  const auto hdir = fresh_out("hof");
  const auto h = run("hof " + demo_dir() + "/corpus --annotations " + demo_dir() + "/hof --out " +
                     hdir.string());
  CHECK(h.exit_code == 0);
  for (const char* f :
       {"state_counts.csv", "transitions_by_language.csv", "task_distribution_by_state.csv",
        "ts_label_ranking_by_state.csv", "state_summary_O.csv", "state_summary_F.csv",
        "state_summary_H.csv", "pause_fraction_by_state.csv", "label_share_correlations.csv",
        "cut_stats.csv", "manifest.json"})
    CHECK(fs::exists(hdir / f));
  CHECK(h.output.find("no annotation file; skipped") != std::string::npos);

  CHECK(run("hof " + demo_dir() + "/corpus --out /tmp/x").exit_code == 2);  // no --annotations

  const auto empty_ann = fresh_out("no_annotations");
  fs::create_directories(empty_ann);
  const auto none = run("hof " + demo_dir() + "/corpus --annotations " + empty_ann.string() +
                        " --out " + fresh_out("hof_none").string());
  CHECK(none.exit_code == 1);
  CHECK(none.output.find("no annotated sessions") != std::string::npos);

  const auto sdir = fresh_out("hof_suggest");
  const auto sg = run("hof " + demo_dir() + "/corpus --annotations " + empty_ann.string() +
                      " --suggest --out " + sdir.string());
  CHECK(sg.exit_code == 0);
  CHECK(fs::exists(sdir / "FIG1.au.tsv"));
  CHECK(fs::exists(sdir / "FIG1.suggested.hof.tsv"));
}

TEST_CASE("identify command") {
  const auto idir = fresh_out("identify");
  const auto r = run("identify " + demo_dir() + "/corpus --pairs " + demo_dir() +
                     "/pairs.tsv --out " + idir.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(idir / "identify_pairs.csv"));
  CHECK(fs::exists(idir / "identify_summary.csv"));
  CHECK(r.output.find("class,truth,pairs") != std::string::npos);
  CHECK(slurp(idir / "identify_summary.csv").find("conventional") != std::string::npos);

  const auto ldir = fresh_out("identify_literal");
  const auto lit = run("identify " + demo_dir() + "/corpus --pairs " + demo_dir() +
                       "/pairs.tsv --literal-rule --out " + ldir.string());
  CHECK(lit.exit_code == 0);
  CHECK(slurp(ldir / "identify_summary.csv").find("literal") != std::string::npos);

  CHECK(run("identify " + demo_dir() + "/corpus --out /tmp/x").exit_code == 2);

  const auto bad_plan = fresh_out("bad_plan.tsv");
  std::ofstream(bad_plan) << "A\tB\tz\n";
  CHECK(run("identify " + demo_dir() + "/corpus --pairs " + bad_plan.string() + " --out /tmp/x")
            .exit_code == 1);
}

TEST_CASE("render command") {
  const auto rdir = fresh_out("render");
  const auto g = run("render " + demo_dir() + "/corpus --graph FIG1 --annotations " + demo_dir() +
                     "/hof --out " + rdir.string());
  CHECK(g.exit_code == 0);
  const auto svg = slurp(rdir / "graph_FIG1.svg");
  CHECK(svg.find("<svg") != std::string::npos);

  const auto d = run("render " + demo_dir() + "/corpus --dist cdf --group-by language --out " +
                     rdir.string());
  CHECK(d.exit_code == 0);
  CHECK(fs::exists(rdir / "dist_cdf.svg"));

  CHECK(run("render " + demo_dir() + "/corpus --graph NOPE --out /tmp/x").exit_code == 1);
  CHECK(run("render " + demo_dir() + "/corpus --out /tmp/x").exit_code == 2);
  CHECK(run("render " + demo_dir() + "/corpus --dist pie --out /tmp/x").exit_code == 2);
}

TEST_CASE("config plumbing") {
  CHECK(run("segment " + demo_dir() + "/corpus --set nope=1 --out /tmp/x").exit_code == 2);
  CHECK(run("segment " + demo_dir() + "/corpus --set ks_alpha=2 --out /tmp/x").exit_code == 2);

  const auto cfg = fresh_out("tuned.cfg");
  std::ofstream(cfg) << "delay_threshold_ms = 250\nfloat_precision = 8\n";
  const auto out = fresh_out("tuned_out");
  const auto r =
      run("segment " + demo_dir() + "/corpus --config " + cfg.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(slurp(out / "manifest.json").find("\"delay_threshold_ms\": \"250\"") != std::string::npos);
}
