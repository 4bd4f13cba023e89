#pragma once

// JSON scenario documents. The schema is strict: unknown keys, wrong types
// and out-of-range values are rejected with the JSON path of the offender.
// docs/scenario.schema.json describes the same format.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "shkd/error.hpp"
#include "shkd/sim.hpp"

namespace shkd {

namespace detail {

using nlohmann::json;

class SchemaReader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ScenarioInvalid(path + ": " + msg);
  }

  static const json& object(const json& j, const std::string& path, std::initializer_list<std::string_view> required,
                            std::initializer_list<std::string_view> optional) {
    if (!j.is_object()) fail(path, "expected an object");
    std::set<std::string_view> allowed(required);
    allowed.insert(optional.begin(), optional.end());
    for (const auto& [key, _] : j.items()) {
      if (allowed.count(key) == 0) fail(path, "unknown key \"" + key + "\"");
    }
    for (auto key : required) {
      if (!j.contains(key)) fail(path, "missing key \"" + std::string(key) + "\"");
    }
    return j;
  }

  static std::uint64_t uint(const json& j, const std::string& path, std::uint64_t max = UINT64_MAX) {
    if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
      fail(path, "expected a non-negative integer");
    }
    const auto v = j.get<std::uint64_t>();
    if (v > max) fail(path, "value " + std::to_string(v) + " exceeds " + std::to_string(max));
    return v;
  }

  static std::uint32_t u32(const json& j, const std::string& path) {
    return static_cast<std::uint32_t>(uint(j, path, UINT32_MAX));
  }

  static double probability(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double p = j.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) fail(path, "probability outside [0, 1]");
    return p;
  }

  static const std::string& string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get_ref<const std::string&>();
  }

  static const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
  }

  static UserId user(const json& j, const std::string& path) {
    const std::uint32_t id = u32(j, path);
    if (id == 0 || id >= UserId::kDummyBase) fail(path, "user ids are 1.." + std::to_string(UserId::kDummyBase - 1));
    return UserId{id};
  }
};

inline std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& doc) {
  using R = detail::SchemaReader;
  R::object(doc, "$", {"field", "structure", "sessions", "users", "seeds"},
            {"name", "joins", "dummies", "loss", "hash", "material"});
  Scenario sc;
  if (doc.contains("name")) sc.name = R::string(doc["name"], "$.name");

  R::object(doc["field"], "$.field", {"q"}, {});
  sc.q = R::uint(doc["field"]["q"], "$.field.q");

  R::object(doc["sessions"], "$.sessions", {"m"}, {});
  sc.m = R::u32(doc["sessions"]["m"], "$.sessions.m");

  const auto& st = doc["structure"];
  if (!st.is_object() || !st.contains("kind")) R::fail("$.structure", "expected an object with \"kind\"");
  const std::string& kind = R::string(st["kind"], "$.structure.kind");
  if (kind == "threshold") {
    R::object(st, "$.structure", {"kind", "t"}, {"user_xs"});
    sc.kind = StructureKind::threshold;
    sc.t = R::u32(st["t"], "$.structure.t");
    if (st.contains("user_xs")) {
      const auto& xs = R::array(st["user_xs"], "$.structure.user_xs");
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::string p = detail::at("$.structure.user_xs", i);
        R::object(xs[i], p, {"id", "x"}, {});
        const UserId u = R::user(xs[i]["id"], p + ".id");
        if (!sc.user_xs.emplace(u, R::uint(xs[i]["x"], p + ".x")).second) R::fail(p, "duplicate id");
      }
    }
  } else if (kind == "multipartite") {
    R::object(st, "$.structure", {"kind", "parts"}, {});
    sc.kind = StructureKind::multipartite;
    const auto& parts = R::array(st["parts"], "$.structure.parts");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string p = detail::at("$.structure.parts", i);
      R::object(parts[i], p, {"x", "users"}, {"dummies"});
      PartSpec part;
      part.x = R::uint(parts[i]["x"], p + ".x");
      const auto& us = R::array(parts[i]["users"], p + ".users");
      for (std::size_t k = 0; k < us.size(); ++k) part.users.push_back(R::user(us[k], detail::at(p + ".users", k)));
      if (parts[i].contains("dummies")) part.dummies = R::u32(parts[i]["dummies"], p + ".dummies");
      sc.parts.push_back(std::move(part));
    }
  } else {
    R::fail("$.structure.kind", "expected \"threshold\" or \"multipartite\"");
  }

  const auto& users = R::array(doc["users"], "$.users");
  for (std::size_t i = 0; i < users.size(); ++i) {
    const std::string p = detail::at("$.users", i);
    R::object(users[i], p, {"id", "cycle"}, {});
    const auto& c = R::array(users[i]["cycle"], p + ".cycle");
    if (c.size() != 2) R::fail(p + ".cycle", "expected [start, end]");
    sc.users.push_back({R::user(users[i]["id"], p + ".id"),
                        {R::u32(c[0], p + ".cycle[0]"), R::u32(c[1], p + ".cycle[1]")}});
  }

  if (doc.contains("joins")) {
    const auto& joins = R::array(doc["joins"], "$.joins");
    for (std::size_t i = 0; i < joins.size(); ++i) {
      const std::string p = detail::at("$.joins", i);
      R::object(joins[i], p, {"session", "end"}, {});
      sc.joins.push_back({R::u32(joins[i]["session"], p + ".session"), R::u32(joins[i]["end"], p + ".end")});
    }
  }

  if (doc.contains("dummies")) {
    R::object(doc["dummies"], "$.dummies", {"count"}, {});
    sc.dummies = R::u32(doc["dummies"]["count"], "$.dummies.count");
  }

  if (doc.contains("loss")) {
    const auto& loss = doc["loss"];
    if (!loss.is_object() || !loss.contains("model")) R::fail("$.loss", "expected an object with \"model\"");
    const std::string& model = R::string(loss["model"], "$.loss.model");
    if (model == "none") {
      R::object(loss, "$.loss", {"model"}, {});
      sc.loss = LossModel::none();
    } else if (model == "iid") {
      R::object(loss, "$.loss", {"model", "p"}, {});
      sc.loss = LossModel::iid(R::probability(loss["p"], "$.loss.p"));
    } else if (model == "burst") {
      R::object(loss, "$.loss", {"model", "p_enter", "p_stay"}, {});
      sc.loss = LossModel::burst(R::probability(loss["p_enter"], "$.loss.p_enter"),
                                 R::probability(loss["p_stay"], "$.loss.p_stay"));
    } else if (model == "mask") {
      R::object(loss, "$.loss", {"model", "drops"}, {});
      std::set<std::pair<Session, UserId>> drops;
      const auto& d = R::array(loss["drops"], "$.loss.drops");
      for (std::size_t i = 0; i < d.size(); ++i) {
        const std::string p = detail::at("$.loss.drops", i);
        R::object(d[i], p, {"session", "user"}, {});
        drops.emplace(R::u32(d[i]["session"], p + ".session"), R::user(d[i]["user"], p + ".user"));
      }
      sc.loss = LossModel::mask(std::move(drops));
    } else {
      R::fail("$.loss.model", "expected none, iid, burst or mask");
    }
  }

  R::object(doc["seeds"], "$.seeds", {"chain", "beta", "vectors", "loss"}, {});
  sc.seeds.chain = R::uint(doc["seeds"]["chain"], "$.seeds.chain");
  sc.seeds.beta = R::uint(doc["seeds"]["beta"], "$.seeds.beta");
  sc.seeds.vectors = R::uint(doc["seeds"]["vectors"], "$.seeds.vectors");
  sc.seeds.loss = R::uint(doc["seeds"]["loss"], "$.seeds.loss");

  if (doc.contains("hash")) {
    const auto& h = doc["hash"];
    if (!h.is_object() || !h.contains("kind")) R::fail("$.hash", "expected an object with \"kind\"");
    const std::string& hk = R::string(h["kind"], "$.hash.kind");
    if (hk == "sha256") {
      R::object(h, "$.hash", {"kind"}, {});
    } else if (hk == "table") {
      R::object(h, "$.hash", {"kind", "values"}, {});
      std::vector<std::uint64_t> values;
      const auto& v = R::array(h["values"], "$.hash.values");
      for (std::size_t i = 0; i < v.size(); ++i) values.push_back(R::uint(v[i], detail::at("$.hash.values", i)));
      sc.hash_table = std::move(values);
    } else {
      R::fail("$.hash.kind", "expected \"sha256\" or \"table\"");
    }
  }

  if (doc.contains("material")) {
    const auto& mat = R::object(doc["material"], "$.material", {}, {"chain_seed", "betas", "vectors"});
    if (mat.contains("chain_seed")) sc.material.chain_seed = R::uint(mat["chain_seed"], "$.material.chain_seed");
    if (mat.contains("betas")) {
      std::vector<std::uint64_t> betas;
      const auto& b = R::array(mat["betas"], "$.material.betas");
      for (std::size_t i = 0; i < b.size(); ++i) betas.push_back(R::uint(b[i], detail::at("$.material.betas", i)));
      sc.material.betas = std::move(betas);
    }
    if (mat.contains("vectors")) {
      std::vector<std::vector<std::uint64_t>> vectors;
      const auto& vs = R::array(mat["vectors"], "$.material.vectors");
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const std::string p = detail::at("$.material.vectors", i);
        std::vector<std::uint64_t> row;
        const auto& r = R::array(vs[i], p);
        for (std::size_t k = 0; k < r.size(); ++k) row.push_back(R::uint(r[k], detail::at(p, k)));
        vectors.push_back(std::move(row));
      }
      sc.material.vectors = std::move(vectors);
    }
  }

  validate(sc);
  return sc;
}

inline Scenario parse_scenario_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioInvalid(std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

/// Applies "seed.NAME=N" (or "seeds.NAME=N") to a scenario.
inline void apply_override(Scenario& sc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ScenarioInvalid("override must look like seed.NAME=N");
  std::string_view key = assignment.substr(0, eq);
  const std::string value(assignment.substr(eq + 1));
  for (std::string_view prefix : {"seeds.", "seed."}) {
    if (key.substr(0, prefix.size()) == prefix) {
      key.remove_prefix(prefix.size());
      std::uint64_t* target = key == "chain"     ? &sc.seeds.chain
                              : key == "beta"    ? &sc.seeds.beta
                              : key == "vectors" ? &sc.seeds.vectors
                              : key == "loss"    ? &sc.seeds.loss
                                                 : nullptr;
      if (target == nullptr) throw ScenarioInvalid("unknown seed \"" + std::string(key) + "\"");
      if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw ScenarioInvalid("seed value must be a non-negative integer");
      }
      try {
        *target = std::stoull(value);
      } catch (const std::out_of_range&) {
        throw ScenarioInvalid("seed value exceeds 64 bits");
      }
      return;
    }
  }
  throw ScenarioInvalid("only seed.* overrides are supported");
}

}  // namespace shkd
