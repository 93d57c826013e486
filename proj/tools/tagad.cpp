#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "tagad/cli.hpp"

namespace {

struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string seed, dataset, out, run_id, scores, manifest, framework,
      frameworks, mode, corpus, pool, kinds, rate, nodes, provider;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "INI config file");
  cmd->add_option("--set", f.sets, "override: section.key=value")
      ->take_all();
  cmd->add_option("--seed", f.seed, "run.seed");
  cmd->add_option("--dataset", f.dataset, "dataset.dir");
  cmd->add_option("--out", f.out, "run.root");
  cmd->add_option("--run-id", f.run_id, "run.id");
  cmd->add_option("--scores", f.scores, "eval.scores");
  cmd->add_option("--manifest", f.manifest, "eval.manifest");
  cmd->add_option("--framework", f.framework, "detect.framework");
  cmd->add_option("--frameworks", f.frameworks, "detect.frameworks");
  cmd->add_option("--mode", f.mode, "encoder.mode");
  cmd->add_option("--corpus", f.corpus, "rag.corpus");
  cmd->add_option("--pool", f.pool, "inject.pool");
  cmd->add_option("--kinds", f.kinds, "inject.kinds");
  cmd->add_option("--rate", f.rate, "inject.rate");
  cmd->add_option("--nodes", f.nodes, "detect.nodes");
  cmd->add_option("--llm", f.provider, "llm.provider");
}

std::vector<std::pair<std::string, std::string>> overrides(const Flags& f) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : f.sets) out.push_back(tagad::split_assignment(s));
  const std::pair<const std::string*, const char*> named[] = {
      {&f.seed, "run.seed"},           {&f.dataset, "dataset.dir"},
      {&f.out, "run.root"},            {&f.run_id, "run.id"},
      {&f.scores, "eval.scores"},      {&f.manifest, "eval.manifest"},
      {&f.framework, "detect.framework"},
      {&f.frameworks, "detect.frameworks"},
      {&f.mode, "encoder.mode"},       {&f.corpus, "rag.corpus"},
      {&f.pool, "inject.pool"},        {&f.kinds, "inject.kinds"},
      {&f.rate, "inject.rate"},        {&f.nodes, "detect.nodes"},
      {&f.provider, "llm.provider"}};
  for (const auto& [value, key] : named) {
    if (!value->empty()) out.emplace_back(key, *value);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anomaly injection and zero-shot LLM detection on text-attributed graphs"};
  app.require_subcommand(1);
  Flags flags;
  for (const auto& name : tagad::cli::subcommands()) {
    add_flags(app.add_subcommand(name), flags);
  }
  CLI11_PARSE(app, argc, argv);

  tagad::cli::Context ctx;
  const std::string command = app.get_subcommands().front()->get_name();
  tagad::Config config;
  try {
    std::optional<std::filesystem::path> file;
    if (!flags.config_file.empty()) file = flags.config_file;
    config = tagad::parse_config(file, tagad::process_env(), overrides(flags));
  } catch (const tagad::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tagad::exit_status(e.code());
  }
  return tagad::cli::dispatch(command, config, ctx);
}
