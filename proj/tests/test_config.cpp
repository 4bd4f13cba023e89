#include <gtest/gtest.h>

#include "shkd/config.hpp"
#include "support/scenarios.hpp"

using namespace shkd;
using nlohmann::json;

namespace {

json worked_json() {
  return json::parse(R"({
    "name": "worked-gf7",
    "field": {"q": 7},
    "structure": {"kind": "threshold", "t": 2},
    "sessions": {"m": 3},
    "users": [{"id": 1, "cycle": [1, 3]}, {"id": 2, "cycle": [1, 1]}, {"id": 3, "cycle": [3, 3]}],
    "dummies": {"count": 1},
    "seeds": {"chain": 0, "beta": 0, "vectors": 0, "loss": 0},
    "hash": {"kind": "table", "values": [1, 2, 5, 3, 3, 5, 2]},
    "material": {"chain_seed": 4, "betas": [2, 0, 5], "vectors": [[3, 2], [1, 5], [6, 4]]}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioInvalid& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, WorkedInstanceParsesToTheSameRun) {
  const Scenario parsed = parse_scenario(worked_json());
  const Scenario built = testing_support::worked_instance();
  EXPECT_EQ(parsed.name, built.name);
  EXPECT_EQ(outcomes_csv(run_scenario(parsed)), outcomes_csv(run_scenario(built)));
  EXPECT_EQ(summary_csv(run_scenario(parsed)), summary_csv(run_scenario(built)));
}

TEST(Config, MultipartiteAndLossModels) {
  json doc = json::parse(R"({
    "field": {"q": 11},
    "structure": {"kind": "multipartite",
                  "parts": [{"x": 0, "users": [1, 2]}, {"x": 1, "users": [3]}, {"x": 2, "users": [], "dummies": 1}]},
    "sessions": {"m": 4},
    "users": [{"id": 1, "cycle": [1, 4]}, {"id": 2, "cycle": [2, 4]}, {"id": 3, "cycle": [1, 4]}],
    "loss": {"model": "burst", "p_enter": 0.2, "p_stay": 0.5},
    "seeds": {"chain": 1, "beta": 2, "vectors": 3, "loss": 4}
  })");
  const Scenario sc = parse_scenario(doc);
  EXPECT_EQ(sc.kind, StructureKind::multipartite);
  ASSERT_EQ(sc.parts.size(), 3U);
  EXPECT_EQ(sc.parts[2].dummies, 1U);
  EXPECT_EQ(sc.loss.kind, LossModel::Kind::burst);
  EXPECT_DOUBLE_EQ(sc.loss.p_stay, 0.5);
  EXPECT_EQ(sc.name, "scenario");
  EXPECT_NO_THROW(run_scenario(sc));

  doc["loss"] = json::parse(R"({"model": "mask", "drops": [{"session": 2, "user": 1}]})");
  EXPECT_EQ(parse_scenario(doc).loss.drops.size(), 1U);
  doc["loss"] = json::parse(R"({"model": "iid", "p": 0.25})");
  EXPECT_DOUBLE_EQ(parse_scenario(doc).loss.p, 0.25);
  doc["loss"] = json::parse(R"({"model": "none"})");
  EXPECT_DOUBLE_EQ(parse_scenario(doc).loss.p, 0.0);
}

TEST(Config, ErrorsCarryTheJsonPath) {
  json doc = worked_json();
  doc["extra"] = 1;
  EXPECT_NE(error_of(doc).find("$: unknown key \"extra\""), std::string::npos);

  doc = worked_json();
  doc["users"][1]["cycle"] = json::array({1});
  EXPECT_NE(error_of(doc).find("$.users[1].cycle"), std::string::npos);

  doc = worked_json();
  doc["field"]["q"] = -7;
  EXPECT_NE(error_of(doc).find("$.field.q"), std::string::npos);

  doc = worked_json();
  doc["structure"]["kind"] = "ramp";
  EXPECT_NE(error_of(doc).find("$.structure.kind"), std::string::npos);

  doc = worked_json();
  doc.erase("seeds");
  EXPECT_NE(error_of(doc).find("missing key \"seeds\""), std::string::npos);

  doc = worked_json();
  doc["seeds"]["salt"] = 3;
  EXPECT_NE(error_of(doc).find("$.seeds: unknown key"), std::string::npos);

  doc = worked_json();
  doc["loss"] = json::parse(R"({"model": "iid", "p": 2})");
  EXPECT_NE(error_of(doc).find("$.loss.p"), std::string::npos);

  doc = worked_json();
  doc["structure"]["parts"] = json::array();
  EXPECT_NE(error_of(doc).find("unknown key \"parts\""), std::string::npos);

  doc = worked_json();
  doc["users"][0]["id"] = 0;
  EXPECT_NE(error_of(doc).find("$.users[0].id"), std::string::npos);

  doc = worked_json();
  doc["hash"]["kind"] = "md5";
  EXPECT_NE(error_of(doc).find("$.hash.kind"), std::string::npos);
}

TEST(Config, SemanticErrorsAreScenarioInvalid) {
  json doc = worked_json();
  doc["field"]["q"] = 8;
  EXPECT_THROW(parse_scenario(doc), ScenarioInvalid);
  doc = worked_json();
  doc["users"][0]["cycle"] = json::array({1, 4});
  EXPECT_THROW(parse_scenario(doc), ScenarioInvalid);
  EXPECT_THROW(parse_scenario_text("{\"field\": "), ScenarioInvalid);
  EXPECT_THROW(parse_scenario_text("[]"), ScenarioInvalid);
}

TEST(Config, UserXsAreApplied) {
  json doc = worked_json();
  doc["structure"]["user_xs"] = json::parse(R"([{"id": 1, "x": 5}])");
  const Scenario sc = parse_scenario(doc);
  EXPECT_EQ(sc.user_xs.at(UserId{1}), 5U);
  doc["structure"]["user_xs"] = json::parse(R"([{"id": 1, "x": 5}, {"id": 1, "x": 6}])");
  EXPECT_THROW(parse_scenario(doc), ScenarioInvalid);
}

TEST(Config, SeedOverrides) {
  Scenario sc = parse_scenario(worked_json());
  apply_override(sc, "seed.chain=42");
  apply_override(sc, "seeds.loss=18446744073709551615");
  EXPECT_EQ(sc.seeds.chain, 42U);
  EXPECT_EQ(sc.seeds.loss, UINT64_MAX);
  EXPECT_THROW(apply_override(sc, "seed.salt=1"), ScenarioInvalid);
  EXPECT_THROW(apply_override(sc, "seed.beta=-1"), ScenarioInvalid);
  EXPECT_THROW(apply_override(sc, "seed.beta=18446744073709551616"), ScenarioInvalid);
  EXPECT_THROW(apply_override(sc, "field.q=11"), ScenarioInvalid);
  EXPECT_THROW(apply_override(sc, "seed.beta"), ScenarioInvalid);
}

TEST(Config, ChangingASeedChangesTheRun) {
  json doc = worked_json();
  doc.erase("material");
  doc.erase("hash");
  doc["field"]["q"] = 65537;
  Scenario a = parse_scenario(doc);
  Scenario b = a;
  apply_override(b, "seed.beta=1");
  const Execution ea = execute(a);
  const Execution eb = execute(b);
  std::vector<std::uint64_t> ka, kb;
  for (Session j = 1; j <= 3; ++j) {
    ka.push_back(ea.trace.truth.session_key(j).value());
    kb.push_back(eb.trace.truth.session_key(j).value());
  }
  EXPECT_NE(ka, kb);
  EXPECT_EQ(ea.trace.truth.chain_key_for(1), eb.trace.truth.chain_key_for(1));
}
