#include <gtest/gtest.h>

#include <cstdlib>

#include "prompt_fixture.hpp"
#include "support.hpp"
#include "tagad/encoders.hpp"
#include "tagad/prompting.hpp"
#include "tagad/rng.hpp"

using namespace tagad;

namespace {

const TemplateRegistry& registry() { return golden_registry(); }

// Compares against tests/golden/<name>; TAGAD_UPDATE_GOLDEN=1 rewrites it.
void expect_golden(const std::string& name, const std::string& actual) {
  const auto path = golden(name);
  if (std::getenv("TAGAD_UPDATE_GOLDEN") != nullptr) write_file(path, actual);
  ASSERT_TRUE(fs::exists(path)) << path;
  EXPECT_EQ(read_file(path), actual) << "golden mismatch: " << name;
}

TagGraph small_graph() { return golden_graph(); }

PromptBundle prompt_for(PromptMode mode, FrameworkKind kind) { return golden_prompt(mode, kind); }

const std::string kRubricLine = "**Score 5**: equally likely normal and anomalous";

}  // namespace

TEST(Templates, AllAssetsPresentAndPinned) {
  for (const auto& name : TemplateRegistry::required_names()) {
    EXPECT_FALSE(registry().get(name).empty()) << name;
  }
  expect_golden("templates.fingerprint", registry().fingerprint() + "\n");
}

TEST(Substitute, Rules) {
  EXPECT_EQ(substitute("a {x} b", {{"x", "{y}"}}), "a {y} b");
  EXPECT_EQ(substitute("{ not a placeholder } {}", {}), "{ not a placeholder } {}");
  EXPECT_CODE(substitute("hello {who}", {}), kPlaceholderUnresolved);
}

TEST(DetectionPrompt, GoldenPerMode) {
  for (const auto& [name, text] : golden_prompts()) expect_golden(name, text);
}

TEST(DetectionPrompt, ContextualHasNeighborBlocksAndRubricOnce) {
  const auto b = prompt_for(PromptMode::kContextual, FrameworkKind::kPlain);
  EXPECT_NE(b.user.find("**Neighbor 1**"), std::string::npos);
  EXPECT_NE(b.user.find("**Neighbor 2**"), std::string::npos);
  EXPECT_EQ(b.user.find("**Neighbor 3**"), std::string::npos);
  EXPECT_EQ(count_occurrences(b.user, kRubricLine), 1u);
  // Braces inside node text survive substitution.
  EXPECT_NE(b.user.find("{citation}"), std::string::npos);
}

TEST(DetectionPrompt, EveryModeAndFrameworkWellFormed) {
  for (auto mode : {PromptMode::kContextual, PromptMode::kStructural, PromptMode::kMixed}) {
    for (auto kind : {FrameworkKind::kPlain, FrameworkKind::kManual}) {
      const auto b = prompt_for(mode, kind);
      for (const char* line : {"**Score 0**: definitely normal",
                               "**Score 1-4**: more likely normal (minor issues)",
                               "**Score 5**: equally likely normal and anomalous",
                               "**Score 6-9**: more likely anomalous (increasing evidence)",
                               "**Score 10**: definitely anomalous"}) {
        EXPECT_EQ(count_occurrences(b.user, line), 1u) << line;
      }
      EXPECT_NE(b.user.find("Conclude with \"RESULT:<score>\""), std::string::npos);
      EXPECT_NE(b.user.find("own line"), std::string::npos);
      const auto tail = b.user.substr(b.user.rfind("Output Example:"));
      EXPECT_NE(tail.find("\nRESULT:5"), std::string::npos);
      // Each part appears exactly once and the prompt splits back into them.
      EXPECT_EQ(count_occurrences(b.user, b.parts.framework), 1u);
      EXPECT_EQ(count_occurrences(b.user, b.parts.node_info), 1u);
      EXPECT_EQ(b.parts.rubric, std::string(kRubric));
      EXPECT_EQ(parse_detection_prompt(b.user), b.parts);
      EXPECT_EQ(b.parts.framework,
                get_framework(kind, mode, registry(), nullptr).text);
      // No placeholder is left behind.
      for (const char* p : {"{raw_text}", "{neighbors_description}", "{idx}",
                            "{graph_structure_representation}", "{max_word_num}",
                            "{num_neighbors}", "{analysis_framework}"}) {
        EXPECT_EQ(b.user.find(p), std::string::npos) << p;
      }
    }
  }
}

TEST(DetectionPrompt, StructuralCarriesNoNodeText) {
  const auto b = prompt_for(PromptMode::kStructural, FrameworkKind::kPlain);
  EXPECT_NE(b.user.find("The target node is 0."), std::string::npos);
  EXPECT_EQ(b.user.find("Graph neural networks"), std::string::npos);
  EXPECT_NE(registry().get("rag/meta_structural")
                .find("The text attribute of the target node is not available"),
            std::string::npos);
}

TEST(DetectionPrompt, ModeMismatch) {
  auto g = small_graph();
  Rng rng(1);
  const auto block = encode_contextual(g, 0, EncoderConfig::contextual(), rng);
  const auto fw = get_framework(FrameworkKind::kPlain, PromptMode::kStructural, registry(), nullptr);
  EXPECT_CODE(build_detection_prompt(PromptMode::kStructural, fw, block, 0, 100, registry()),
              kModeMismatch);
  const auto cfw = get_framework(FrameworkKind::kPlain, PromptMode::kContextual, registry(), nullptr);
  EXPECT_CODE(build_detection_prompt(PromptMode::kStructural, cfw, std::string("s"), 0, 100, registry()),
              kModeMismatch);
}

TEST(DetectionPrompt, Pure) {
  const auto a = prompt_for(PromptMode::kMixed, FrameworkKind::kManual);
  const auto b = prompt_for(PromptMode::kMixed, FrameworkKind::kManual);
  EXPECT_EQ(a.user, b.user);
  EXPECT_EQ(a.system, b.system);
}

TEST(TargetTextContains, IgnoresNeighbors) {
  auto g = small_graph();
  Rng rng(1);
  const auto block = encode_contextual(g, 0, EncoderConfig::contextual(), rng);
  const auto fw = get_framework(FrameworkKind::kPlain, PromptMode::kContextual, registry(), nullptr);
  const auto b = build_detection_prompt(PromptMode::kContextual, fw, block, 0, 1000, registry());
  EXPECT_TRUE(target_text_contains("citation")(b.user));
  EXPECT_FALSE(target_text_contains("Protein")(b.user));
}

TEST(Frameworks, PlainManualRag) {
  const auto plain = get_framework(FrameworkKind::kPlain, PromptMode::kContextual, registry(), nullptr);
  EXPECT_EQ(plain.text.rfind("You should design an analysis framework by yourself", 0), 0u);
  EXPECT_EQ(plain.provenance, "placeholder");

  const auto manual = get_framework(FrameworkKind::kManual, PromptMode::kStructural, registry(), nullptr);
  EXPECT_NE(manual.text.find("Clique-like density spike"), std::string::npos);
  EXPECT_EQ(manual.provenance, "human");

  const auto mixed = get_framework(FrameworkKind::kManual, PromptMode::kMixed, registry(), nullptr);
  EXPECT_NE(mixed.text.find("Clique-like density spike"), std::string::npos);
  EXPECT_NE(mixed.text.find(std::string(trim(registry().get("framework/manual_contextual")))),
            std::string::npos);

  FrameworkStore empty;
  EXPECT_CODE(get_framework(FrameworkKind::kRag, PromptMode::kMixed, registry(), &empty),
              kFrameworkMissing);
  EXPECT_CODE(get_framework(FrameworkKind::kRag, PromptMode::kMixed, registry(), nullptr),
              kFrameworkMissing);
}

TEST(FrameworkStore, RoundTripAndValidation) {
  TempDir dir;
  FrameworkStore store;
  store.put({FrameworkKind::kRag, PromptMode::kMixed, "Step 1.\nStep \"2\".", "corpus:abc"});
  store.save(dir / "fw.jsonl");
  const auto back = FrameworkStore::load(dir / "fw.jsonl");
  ASSERT_NE(back.find(PromptMode::kMixed), nullptr);
  EXPECT_EQ(*back.find(PromptMode::kMixed), *store.find(PromptMode::kMixed));
  EXPECT_EQ(back.find(PromptMode::kContextual), nullptr);
  EXPECT_CODE(store.put({FrameworkKind::kRag, PromptMode::kMixed, "x", "human"}), kInvalidArgument);
  EXPECT_CODE(store.put({FrameworkKind::kRag, PromptMode::kMixed, "  ", "corpus:a"}), kInvalidArgument);
}

TEST(GenerationPrompt, CoraListsSevenTopics) {
  const auto node = make_node(4, 0, "We study belief propagation in loopy graphs.");
  const auto p = build_generation_prompt("cora", node, "Probabilistic Methods",
                                         "Machine Learning: Theory", registry());
  EXPECT_EQ(p.system, registry().get("generate/system"));
  EXPECT_NE(p.user.find("seven topics"), std::string::npos);
  for (int i = 1; i <= 7; ++i) {
    EXPECT_NE(p.user.find("\n" + std::to_string(i) + ". "), std::string::npos) << i;
  }
  EXPECT_EQ(count_occurrences(p.user, node.text), 1u);
  EXPECT_NE(p.user.find("Machine Learning: Theory"), std::string::npos);
  EXPECT_EQ(p.user.find("{label_name}"), std::string::npos);
  EXPECT_EQ(p.user.find("{designated_label}"), std::string::npos);
  EXPECT_EQ(p.user.find("{raw_text}"), std::string::npos);
  expect_golden("generation_cora.txt", p.user);
}

TEST(GenerationPrompt, EveryKindAndUnknown) {
  const auto node = make_node(1, 0, "text body");
  for (const char* kind : {"cora", "citeseer", "pubmed", "wikics", "custom"}) {
    const auto p = build_generation_prompt(kind, node, "A", "B", registry(),
                                           {{0, "A"}, {1, "B"}}, "toy");
    EXPECT_EQ(count_occurrences(p.user, "text body"), 1u) << kind;
  }
  EXPECT_CODE(build_generation_prompt("arxiv", node, "A", "B", registry()), kUnknownDatasetKind);
}
