#include <gtest/gtest.h>

#include "support.hpp"
#include "tagad/config.hpp"

using namespace tagad;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST(Config, FlagBeatsEnvBeatsFileBeatsDefault) {
  TempDir dir;
  write_file(dir / "c.ini", "[encoder]\nm_token = 7\nk_neighbors = 3\n[detect]\nlimit = 2\n");
  const auto cfg = parse_config(dir / "c.ini",
                                env_of({{"TAGAD_ENCODER_K_NEIGHBORS", "4"}, {"TAGAD_ENCODER_M_TOKEN", "8"}}),
                                {{"encoder.m_token", "9"}});
  EXPECT_EQ(cfg.integer("encoder.m_token"), 9);
  EXPECT_EQ(cfg.integer("encoder.k_neighbors"), 4);
  EXPECT_EQ(cfg.integer("detect.limit"), 2);
  EXPECT_EQ(cfg.integer("rag.top_k"), 8);
  EXPECT_FALSE(cfg.explicitly_set("rag.top_k"));

  const auto file_only = parse_config(dir / "c.ini", nullptr, {});
  EXPECT_EQ(file_only.integer("encoder.m_token"), 7);
}

TEST(Config, UnknownAndMissing) {
  Config c;
  EXPECT_CODE(c.set("encoder.bogus", "1"), kUnknownKey);
  EXPECT_CODE(c.get("nope"), kUnknownKey);
  EXPECT_CODE(c.str("dataset.dir"), kMissingRequired);
  EXPECT_CODE(c.require("llm.model", "detect"), kMissingRequired);
  EXPECT_CODE(c.seed("inject"), kMissingRequired);
  c.set("run.seed", "x1");
  EXPECT_CODE(c.seed("inject"), kInvalidArgument);
  c.set("detect.limit", "4.5");
  EXPECT_CODE(c.integer("detect.limit"), kInvalidArgument);
  c.set("inject.rate", "abc");
  EXPECT_CODE(c.real("inject.rate"), kInvalidArgument);
  c.set("inject.rate", "0.1");
  EXPECT_DOUBLE_EQ(c.real("inject.rate"), 0.1);

  TempDir dir;
  write_file(dir / "bad.ini", "[llm]\ntemperture = 1\n");
  EXPECT_CODE(parse_config(dir / "bad.ini", nullptr, {}), kUnknownKey);
  EXPECT_CODE(parse_config(std::nullopt, nullptr, {{"x.y", "1"}}), kUnknownKey);
}

TEST(ConfigText, IniRules) {
  const auto kv = parse_config_text(
      "# comment\nrun.seed = 3\n\n[llm]\n; other comment\nmodel = a = b\n[ rag ]\ntop_k=2\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"run.seed", "3"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"llm.model", "a = b"}));
  EXPECT_EQ(kv[2], (std::pair<std::string, std::string>{"rag.top_k", "2"}));
  EXPECT_CODE(parse_config_text("[llm\n"), kParseError);
  EXPECT_CODE(parse_config_text("just words\n"), kParseError);
}

TEST(ConfigText, Helpers) {
  EXPECT_EQ(env_name("encoder.m_token"), "TAGAD_ENCODER_M_TOKEN");
  EXPECT_EQ(split_assignment(" a.b = c=d "), (std::pair<std::string, std::string>{"a.b", "c=d"}));
  EXPECT_CODE(split_assignment("novalue"), kInvalidArgument);
  EXPECT_CODE(split_assignment("=x"), kInvalidArgument);
  EXPECT_EQ(split_list(" a, ,b,c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(split_list("").empty());
}

TEST(ConfigSchema, KeysUniqueAndEnvNamesDistinct) {
  std::set<std::string> keys, envs;
  for (const auto& spec : config_schema()) {
    EXPECT_TRUE(keys.insert(spec.key).second) << spec.key;
    EXPECT_TRUE(envs.insert(env_name(spec.key)).second) << spec.key;
    EXPECT_NE(spec.key.find('.'), std::string::npos);
  }
}
