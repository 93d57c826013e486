// Writes the synthetic fixture sets used by the tests and the demo.
//   make_fixture tests <dir>   tiny60/, g1000/, outliers.txt, corpus/
//   make_fixture demo <dir>    dataset/, outliers.txt, corpus/

#include <filesystem>
#include <iostream>
#include <string>

#include "tagad/ingest.hpp"
#include "tagad/synth.hpp"

namespace fs = std::filesystem;

namespace {

void write_corpus(const fs::path& dir, std::uint64_t seed) {
  for (const auto& [name, text] : tagad::make_mini_corpus(seed)) {
    tagad::write_file(dir / name, text + "\n");
  }
}

void write_graph(const tagad::SynthSpec& spec, const fs::path& dir) {
  tagad::save_dataset(tagad::make_synthetic_tag(spec).graph, dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixture tests|demo <dir>\n";
    return 2;
  }
  const std::string which = argv[1];
  const fs::path root = argv[2];
  try {
    if (which == "tests") {
      tagad::SynthSpec tiny;
      tiny.nodes = 60;
      tiny.seed = 60;
      write_graph(tiny, root / "tiny60");

      tagad::SynthSpec big;
      big.nodes = 1000;
      big.labels = 5;
      big.seed = 1000;
      write_graph(big, root / "g1000");

      tagad::write_file(root / "outliers.txt",
                        tagad::outlier_pool_to_string(
                            tagad::make_outlier_pool(120, 11)));
      write_corpus(root / "corpus", 5);
    } else if (which == "demo") {
      tagad::SynthSpec spec;
      spec.nodes = 200;
      spec.labels = 4;
      spec.seed = 200;
      write_graph(spec, root / "dataset");
      tagad::write_file(root / "outliers.txt",
                        tagad::outlier_pool_to_string(
                            tagad::make_outlier_pool(40, 17, "ZXQ_MARKER")));
      write_corpus(root / "corpus", 3);
    } else {
      std::cerr << "unknown fixture set " << which << "\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
