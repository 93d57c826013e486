#ifndef TAGAD_TESTS_PROMPT_FIXTURE_HPP
#define TAGAD_TESTS_PROMPT_FIXTURE_HPP

#include "support.hpp"
#include "tagad/encoders.hpp"
#include "tagad/prompting.hpp"
#include "tagad/rng.hpp"

// Graph and prompts behind the golden files.

inline const tagad::TemplateRegistry& golden_registry() {
  static const tagad::TemplateRegistry reg = tagad::TemplateRegistry::load();
  return reg;
}

// 0 is the target; 1 and 2 are neighbors; 3 hangs off 2.
inline tagad::TagGraph golden_graph() {
  using tagad::TagNode;
  std::vector<TagNode> nodes{
      make_node(0, 0, "Graph neural networks for {citation} analysis."),
      make_node(1, 0, "Message passing on sparse graphs."),
      make_node(2, 1, "Protein folding with   attention."),
      make_node(3, 1, "Molecular dynamics simulation.")};
  auto g = tagad::build_graph(nodes, {{0, 1}, {0, 2}, {2, 3}});
  g.set_label_names({{0, "Graphs"}, {1, "Biology"}});
  return g;
}

inline tagad::PromptBundle golden_prompt(tagad::PromptMode mode, tagad::FrameworkKind kind) {
  using namespace tagad;
  auto g = golden_graph();
  const auto cfg = EncoderConfig::for_mode(mode);
  Rng rng(1);
  NodeInfo info;
  switch (mode) {
    case PromptMode::kContextual:
      info = encode_contextual(g, 0, cfg, rng);
      break;
    case PromptMode::kStructural:
      info = encode_structural(g, 0, cfg);
      break;
    case PromptMode::kMixed:
      info = encode_mixed(g, 0, cfg, rng);
      break;
  }
  return build_detection_prompt(mode, get_framework(kind, mode, golden_registry(), nullptr),
                                info, 0, cfg.m_token, golden_registry());
}

// Golden file name -> prompt text it pins.
inline std::vector<std::pair<std::string, std::string>> golden_prompts() {
  using tagad::FrameworkKind;
  using tagad::PromptMode;
  return {
      {"prompt_contextual_plain.txt", golden_prompt(PromptMode::kContextual, FrameworkKind::kPlain).user},
      {"prompt_structural_manual.txt", golden_prompt(PromptMode::kStructural, FrameworkKind::kManual).user},
      {"prompt_mixed_manual.txt", golden_prompt(PromptMode::kMixed, FrameworkKind::kManual).user},
      {"prompt_system.txt", golden_prompt(PromptMode::kMixed, FrameworkKind::kPlain).system},
  };
}

#endif  // TAGAD_TESTS_PROMPT_FIXTURE_HPP
