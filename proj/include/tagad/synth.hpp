#ifndef TAGAD_SYNTH_HPP
#define TAGAD_SYNTH_HPP

// Seeded synthetic text-attributed graphs for fixtures and the demo. Each
// label owns a vocabulary; texts mostly draw from their label's words and
// edges mostly join same-label nodes.

#include <cstdint>
#include <cstdio>
#include <iterator>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tagad/graph.hpp"
#include "tagad/ingest.hpp"
#include "tagad/rng.hpp"

namespace tagad {

struct SynthSpec {
  std::size_t nodes = 60;
  int labels = 3;
  std::size_t min_tokens = 20;
  std::size_t max_tokens = 60;
  double avg_degree = 4.0;
  double homophily = 0.8;
  double topical_share = 0.75;  // fraction of tokens from the label's vocab
  std::size_t vocab_per_label = 40;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string synth_word(Rng& rng, std::size_t syllables) {
  static constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "l", "m",
                                            "n", "p", "r", "s", "t", "v", "z",
                                            "br", "st", "tr", "pl"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai",
                                            "ou"};
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kOnsets[rng.uniform_index(std::size(kOnsets))];
    w += kVowels[rng.uniform_index(std::size(kVowels))];
  }
  return w;
}

inline std::vector<std::string> synth_vocab(Rng& rng, std::size_t n) {
  std::vector<std::string> out;
  while (out.size() < n) out.push_back(synth_word(rng, 2 + rng.uniform_index(2)));
  return out;
}

inline std::string synth_text(Rng& rng, const std::vector<std::string>& topical,
                              const std::vector<std::string>& shared,
                              const SynthSpec& spec) {
  const std::size_t len =
      spec.min_tokens + rng.uniform_index(spec.max_tokens - spec.min_tokens + 1);
  std::vector<std::string> words;
  words.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const auto& pool = rng.uniform01() < spec.topical_share ? topical : shared;
    words.push_back(pool[rng.uniform_index(pool.size())]);
  }
  return join(words, " ");
}

}  // namespace detail

struct SynthDataset {
  TagGraph graph;
  std::map<Label, std::vector<std::string>> vocab;
};

inline SynthDataset make_synthetic_tag(const SynthSpec& spec) {
  if (spec.labels < 1 || spec.nodes < 1 || spec.min_tokens < 1 ||
      spec.max_tokens < spec.min_tokens || spec.vocab_per_label < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad synthetic graph settings");
  }
  Rng rng(spec.seed);
  SynthDataset out;
  const auto shared = detail::synth_vocab(rng, spec.vocab_per_label);
  std::map<Label, std::string> names;
  for (Label l = 0; l < spec.labels; ++l) {
    out.vocab[l] = detail::synth_vocab(rng, spec.vocab_per_label);
    names[l] = "topic " + out.vocab[l][0];
  }

  std::vector<TagNode> nodes;
  std::map<Label, std::vector<NodeId>> by_label;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const auto label = static_cast<Label>(i % static_cast<std::size_t>(spec.labels));
    TagNode n;
    n.id = static_cast<NodeId>(i);
    n.label = label;
    n.text = detail::synth_text(rng, out.vocab[label], shared, spec);
    by_label[label].push_back(n.id);
    nodes.push_back(std::move(n));
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  const auto target_edges = static_cast<std::size_t>(
      spec.avg_degree * static_cast<double>(spec.nodes) / 2.0);
  if (spec.nodes > 1) {
    for (std::size_t e = 0; e < target_edges; ++e) {
      const NodeId u = static_cast<NodeId>(rng.uniform_index(spec.nodes));
      NodeId v;
      if (rng.uniform01() < spec.homophily) {
        const auto& same = by_label[nodes[static_cast<std::size_t>(u)].label];
        v = same[rng.uniform_index(same.size())];
      } else {
        v = static_cast<NodeId>(rng.uniform_index(spec.nodes));
      }
      edges.emplace_back(u, v);
    }
  }
  out.graph = build_graph(std::move(nodes), edges);
  out.graph.set_label_names(std::move(names));
  return out;
}

// Outlier texts from a vocabulary unrelated to any label; each text carries
// `marker` as one of its tokens when it is non-empty.
inline OutlierPool make_outlier_pool(std::size_t count, std::uint64_t seed,
                                     const std::string& marker = "",
                                     std::size_t min_tokens = 20,
                                     std::size_t max_tokens = 50) {
  Rng rng(derive_seed(seed, 0x9001));
  const auto topical = detail::synth_vocab(rng, 60);
  SynthSpec spec;
  spec.min_tokens = min_tokens;
  spec.max_tokens = max_tokens;
  spec.topical_share = 1.0;
  OutlierPool pool;
  pool.source_name = "synthetic-outliers";
  for (std::size_t i = 0; i < count; ++i) {
    std::string text = detail::synth_text(rng, topical, topical, spec);
    if (!marker.empty()) {
      auto words = tokenize(text);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(
                                       rng.uniform_index(words.size() + 1)),
                   marker);
      text = join(words, " ");
    }
    pool.texts.push_back(std::move(text));
  }
  return pool;
}

// Plain-text documents about anomaly types for retrieval tests and the demo.
inline std::vector<std::pair<std::string, std::string>> make_mini_corpus(
    std::uint64_t seed, std::size_t docs = 4, std::size_t tokens = 300) {
  static const std::vector<std::string> kTerms = {
      "contextual", "structural", "anomaly",   "node",     "neighbor",
      "text",       "topic",      "community", "clique",   "dense",
      "degree",     "semantic",   "mismatch",  "outlier",  "edge",
      "graph",      "attribute",  "inconsistent", "cluster", "connectivity"};
  Rng rng(derive_seed(seed, 0xc0de));
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::string> words;
    for (std::size_t t = 0; t < tokens; ++t) {
      words.push_back(rng.uniform01() < 0.6
                          ? kTerms[rng.uniform_index(kTerms.size())]
                          : detail::synth_word(rng, 2));
    }
    char name[32];
    std::snprintf(name, sizeof(name), "doc%02zu.txt", d);
    out.emplace_back(name, join(words, " "));
  }
  return out;
}

}  // namespace tagad

#endif  // TAGAD_SYNTH_HPP
