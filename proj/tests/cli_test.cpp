#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "tagad/cli.hpp"

using namespace tagad;

namespace {

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string cli_path() { return std::string(TAGAD_CLI); }

// In-process run with captured output.
struct Invocation {
  std::ostringstream out, err;
  cli::Context ctx;
  Invocation() {
    ctx.out = &out;
    ctx.err = &err;
    ctx.sleeper = [](std::chrono::milliseconds) {};
  }
  int run(const std::string& command, const std::vector<std::pair<std::string, std::string>>& flags) {
    const Config cfg = parse_config(std::nullopt, nullptr, flags);
    return cli::dispatch(command, cfg, ctx);
  }
};

// Every regular file under `dir`, relative path -> content.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

TEST(Cli, DemoExitsZeroWithPerfectAuc) {
  TempDir dir;
  const std::string log = (dir / "log.txt").string();
  ASSERT_EQ(shell(cli_path() + " demo --out " + (dir / "runs").string() + " > " + log + " 2>&1"), 0)
      << read_file(log);
  const auto metrics = nlohmann::json::parse(read_file(dir / "runs/run-0001/metrics.json"));
  EXPECT_EQ(metrics["roc_auc"].get<double>(), 1.0);
  EXPECT_EQ(metrics["n_pos"], 10);
  EXPECT_TRUE(fs::exists(dir / "runs/run-0001/frameworks.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "runs/run-0001/dataset/manifest.jsonl"));
  EXPECT_NE(read_file(log).find("== eval"), std::string::npos);
}

TEST(Cli, RunDirectoriesNumberedAndExplicitIdsUnique) {
  TempDir dir;
  Invocation a;
  const std::vector<std::pair<std::string, std::string>> base{
      {"run.root", (dir / "runs").string()}, {"dataset.dir", fixture("tiny60").string()},
      {"run.seed", "1"}, {"inject.kinds", "structural"}, {"inject.rate", "0.2"}};
  ASSERT_EQ(a.run("inject", base), 0) << a.err.str();
  Invocation b;
  ASSERT_EQ(b.run("inject", base), 0) << b.err.str();
  EXPECT_TRUE(fs::exists(dir / "runs/run-0001/inject.config"));
  EXPECT_TRUE(fs::exists(dir / "runs/run-0002/dataset/nodes.jsonl"));
  EXPECT_EQ(read_file(dir / "runs/run-0001/dataset/manifest.jsonl"),
            read_file(dir / "runs/run-0002/dataset/manifest.jsonl"));
  auto named = base;
  named.emplace_back("run.id", "mine");
  Invocation c;
  EXPECT_EQ(c.run("inject", named), 0);
  Invocation d;
  EXPECT_EQ(d.run("inject", named), exit_status(ErrorCode::kIoError));
}

TEST(Cli, RagDetectWithoutStoreFails) {
  TempDir dir;
  Invocation inv;
  const int rc = inv.run("detect", {{"run.root", (dir / "runs").string()},
                                    {"dataset.dir", fixture("tiny60").string()},
                                    {"run.seed", "1"},
                                    {"detect.framework", "rag"}});
  EXPECT_EQ(rc, exit_status(ErrorCode::kFrameworkMissing));
  EXPECT_NE(inv.err.str().find("FrameworkMissing"), std::string::npos);
}

TEST(Cli, MissingSeedAndUnknownKeyFromShell) {
  TempDir dir;
  const std::string root = " --out " + (dir / "runs").string();
  EXPECT_EQ(shell(cli_path() + " inject --dataset " + fixture("tiny60").string() + root + " 2>/dev/null"),
            exit_status(ErrorCode::kMissingRequired));
  EXPECT_EQ(shell(cli_path() + " detect --set llm.tempreature=1" + root + " 2>/dev/null"),
            exit_status(ErrorCode::kUnknownKey));
  EXPECT_NE(shell(cli_path() + " nonsense 2>/dev/null"), 0);
}

TEST(Cli, RagBuildThenDetectThenEval) {
  TempDir dir;
  const std::string runs = (dir / "runs").string();
  Invocation inj;
  ASSERT_EQ(inj.run("inject", {{"run.root", runs}, {"run.id", "inj"},
                               {"dataset.dir", fixture("g1000").string()}, {"run.seed", "5"},
                               {"inject.kinds", "llm_contextual:0.5,structural:0.5"}}),
            0)
      << inj.err.str();
  EXPECT_NE(inj.out.str().find("llm_contextual: 25"), std::string::npos);
  EXPECT_NE(inj.out.str().find("structural: 20"), std::string::npos);
  const std::string dataset = (dir / "runs/inj/dataset").string();

  Invocation rag;
  ASSERT_EQ(rag.run("rag-build", {{"run.root", runs}, {"run.id", "rag"},
                                  {"rag.corpus", fixture("corpus").string()},
                                  {"rag.modes", "structural"}}),
            0)
      << rag.err.str();
  Invocation det;
  ASSERT_EQ(det.run("detect", {{"run.root", runs}, {"run.id", "det"}, {"dataset.dir", dataset},
                               {"run.seed", "5"}, {"encoder.mode", "structural"},
                               {"detect.framework", "rag"}, {"detect.nodes", "manifest"},
                               {"detect.frameworks", (dir / "runs/rag/frameworks.jsonl").string()}}),
            0)
      << det.err.str();
  const auto scores = load_score_file(dir / "runs/det/scores.csv");
  EXPECT_EQ(scores.rows.size(), 45u);
  EXPECT_EQ(scores.header.at("framework"), "rag");
  EXPECT_EQ(scores.header.at("mode"), "structural");

  // Every scored node is an anomaly, so evaluation has a single class.
  Invocation ev;
  EXPECT_EQ(ev.run("eval", {{"run.root", runs}, {"dataset.dir", dataset},
                            {"eval.scores", (dir / "runs/det/scores.csv").string()}}),
            exit_status(ErrorCode::kSingleClass));
}

TEST(Cli, ExportImportScoresEval) {
  TempDir dir;
  const std::string runs = (dir / "runs").string();
  Invocation inj;
  ASSERT_EQ(inj.run("inject", {{"run.root", runs}, {"run.id", "inj"},
                               {"dataset.dir", fixture("tiny60").string()}, {"run.seed", "2"},
                               {"inject.kinds", "structural"}, {"inject.rate", "0.2"},
                               {"inject.clique_size", "6"}}),
            0)
      << inj.err.str();
  const std::string dataset = (dir / "runs/inj/dataset").string();
  Invocation exp;
  ASSERT_EQ(exp.run("export-baselines", {{"run.root", runs}, {"run.id", "exp"}, {"dataset.dir", dataset}}), 0)
      << exp.err.str();
  EXPECT_EQ(count_occurrences(read_file(dir / "runs/exp/export/anomaly_labels.csv"), ",1\n"), 12u);

  // An external detector that scores by degree.
  const auto g = load_dataset(DatasetPaths::in(dataset));
  std::string text = "# method=degree seed=0\n";
  for (NodeId id : g.ids()) text += std::to_string(id) + "," + std::to_string(g.degree(id)) + ".5\n";
  write_file(dir / "degree.csv", text);

  Invocation imp;
  ASSERT_EQ(imp.run("import-scores", {{"run.root", runs}, {"run.id", "imp"}, {"dataset.dir", dataset},
                                      {"eval.scores", (dir / "degree.csv").string()}}),
            0)
      << imp.err.str();
  Invocation ev;
  ASSERT_EQ(ev.run("eval", {{"run.root", runs}, {"run.id", "ev"}, {"dataset.dir", dataset},
                            {"eval.scores", (dir / "runs/imp/scores.csv").string()}}),
            0)
      << ev.err.str();
  const auto j = nlohmann::json::parse(read_file(dir / "runs/ev/metrics.json"));
  EXPECT_EQ(j["n_pos"], 12);
  EXPECT_EQ(j["model_tag"], "degree");
  EXPECT_GT(j["roc_auc"].get<double>(), 0.8);

  // Partial coverage is refused.
  write_file(dir / "partial.csv", "0,1\n1,2\n");
  Invocation bad;
  EXPECT_EQ(bad.run("import-scores", {{"run.root", runs}, {"dataset.dir", dataset},
                                      {"eval.scores", (dir / "partial.csv").string()}}),
            exit_status(ErrorCode::kMissingRequired));
  write_file(dir / "stray.csv", text + "999,1\n");
  Invocation stray;
  EXPECT_EQ(stray.run("import-scores", {{"run.root", runs}, {"dataset.dir", dataset},
                                        {"eval.scores", (dir / "stray.csv").string()}}),
            exit_status(ErrorCode::kUnknownNode));
}

TEST(Cli, FixturesRegenerateIdentically) {
  TempDir dir;
  ASSERT_EQ(shell(std::string(TAGAD_MAKE_FIXTURE) + " tests " + (dir / "t").string()), 0);
  const auto fresh = tree(dir / "t");
  const auto committed = tree(fixture(""));
  EXPECT_EQ(fresh.size(), committed.size());
  for (const auto& [path, content] : fresh) {
    auto it = committed.find(path);
    ASSERT_NE(it, committed.end()) << path;
    EXPECT_TRUE(it->second == content) << path;
  }
  ASSERT_EQ(shell(std::string(TAGAD_MAKE_FIXTURE) + " demo " + (dir / "d").string()), 0);
  const auto demo = tree(fs::path(TAGAD_FIXTURES).parent_path().parent_path() / "assets/demo");
  EXPECT_TRUE(tree(dir / "d") == demo);
}
