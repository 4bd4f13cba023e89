#pragma once

// Deterministic session-by-session simulator. Sessions advance, members join
// and expire, each delivery of B_j is dropped or kept by a seeded loss model,
// and every member recovers, self-heals or gives up for every session of its
// life cycle. All recovered keys are checked against the group manager.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shkd/access.hpp"
#include "shkd/chain.hpp"
#include "shkd/core.hpp"
#include "shkd/error.hpp"
#include "shkd/gf.hpp"
#include "shkd/messages.hpp"
#include "shkd/wire.hpp"

namespace shkd {

struct LossModel {
  enum class Kind { iid, burst, mask };
  Kind kind = Kind::iid;
  /// iid: drop probability per delivery.
  double p = 0.0;
  /// burst: two-state channel per user; p_enter moves good -> bad, p_stay
  /// keeps bad -> bad. A delivery is dropped while the channel is bad.
  double p_enter = 0.0;
  double p_stay = 0.0;
  /// mask: exactly these (session, user) deliveries are dropped.
  std::set<std::pair<Session, UserId>> drops;

  static LossModel none() { return {}; }
  static LossModel iid(double p) { return {Kind::iid, p, 0, 0, {}}; }
  static LossModel burst(double enter, double stay) { return {Kind::burst, 0, enter, stay, {}}; }
  static LossModel mask(std::set<std::pair<Session, UserId>> drops) { return {Kind::mask, 0, 0, 0, std::move(drops)}; }
};

struct PartSpec {
  std::uint64_t x = 0;
  std::vector<UserId> users;
  std::uint32_t dummies = 0;
};

struct UserSpec {
  UserId id;
  LifeCycle cycle;
};

struct JoinSpec {
  Session session = 1;
  Session end = 1;
};

struct Seeds {
  std::uint64_t chain = 0;
  std::uint64_t beta = 0;
  std::uint64_t vectors = 0;
  std::uint64_t loss = 0;
};

/// Explicit protocol material; each present entry replaces its seeded draw.
struct Material {
  std::optional<std::uint64_t> chain_seed;
  std::optional<std::vector<std::uint64_t>> betas;
  std::optional<std::vector<std::vector<std::uint64_t>>> vectors;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t q = 0;
  StructureKind kind = StructureKind::threshold;
  std::uint32_t t = 0;
  /// Threshold evaluation points; users without an entry use x = id.
  std::map<UserId, std::uint64_t> user_xs;
  /// Threshold: count of dummies. Multipartite: dummies come from `parts`.
  std::uint32_t dummies = 0;
  std::vector<PartSpec> parts;
  Session m = 0;
  std::vector<UserSpec> users;
  std::vector<JoinSpec> joins;
  LossModel loss;
  Seeds seeds;
  /// Lookup table for the one-way function; SHA-256 when absent.
  std::optional<std::vector<std::uint64_t>> hash_table;
  Material material;
};

enum class Outcome { received, healed, unrecoverable, not_member, aborted };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::received: return "received";
    case Outcome::healed: return "healed";
    case Outcome::unrecoverable: return "unrecoverable";
    case Outcome::not_member: return "not-member";
    case Outcome::aborted: return "aborted";
  }
  return "?";
}

struct OutcomeRecord {
  UserId user;
  Session session = 0;
  Outcome outcome = Outcome::unrecoverable;
  Session healed_from = 0;
  std::uint64_t multiplications = 0;
  std::uint64_t hash_applications = 0;
};

struct SessionStats {
  Session session = 0;
  /// |W_j ∪ R_j|: users whose shares B_j reveals.
  std::uint32_t t_j = 0;
  std::uint64_t field_elements = 0;
  std::uint64_t element_bits = 0;
  std::uint64_t total_bytes = 0;
  /// Largest per-member multiplication count over recoveries that used B_j.
  std::uint64_t max_multiplications = 0;
  std::uint32_t members = 0;
  std::uint32_t delivered = 0;
  /// Members that obtained SK_j by healing.
  std::uint32_t healed = 0;
  UserSet padding;
  UserSet revoked;
};

struct StorageRecord {
  UserId user;
  LifeCycle cycle;
  std::size_t elements = 0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t q = 0;
  unsigned element_bits = 0;
  std::size_t threshold = 0;
  Session m = 0;
  std::vector<OutcomeRecord> outcomes;
  std::vector<SessionStats> sessions;
  std::vector<StorageRecord> storage;
  std::optional<Session> failed_at;
  std::string failure;
  GmCounters counters;
  UserSet final_revoked;
  /// Members whose copy of B_j arrived.
  std::map<Session, UserSet> delivered;

  std::size_t count(Outcome o) const {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [&](const OutcomeRecord& r) { return r.outcome == o; }));
  }
};

struct Execution {
  RunReport report;
  ProtocolTrace trace;
};

namespace detail {

inline double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11U) * 0x1.0p-53; }

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

class LossChannel {
 public:
  LossChannel(const LossModel& model, std::uint64_t seed) : model_(model), rng_(seed) {}

  bool delivered(Session j, UserId u) {
    switch (model_.kind) {
      case LossModel::Kind::iid:
        return !(unit_interval(rng_) < model_.p);
      case LossModel::Kind::burst: {
        bool& bad = bad_[u];
        const double r = unit_interval(rng_);
        bad = bad ? r < model_.p_stay : r < model_.p_enter;
        return !bad;
      }
      case LossModel::Kind::mask:
        return model_.drops.count({j, u}) == 0;
    }
    return true;
  }

 private:
  const LossModel& model_;
  std::mt19937_64 rng_;
  std::map<UserId, bool> bad_;
};

}  // namespace detail

/// Checks everything that can be checked without running the protocol.
/// Throws ScenarioInvalid.
inline void validate(const Scenario& sc) {
  auto fail = [](const std::string& msg) { throw ScenarioInvalid(msg); };
  if (!detail::is_prime(sc.q)) fail("q = " + std::to_string(sc.q) + " is not prime");
  if (sc.q < kMinModulus) fail("q must be at least " + std::to_string(kMinModulus));
  if (sc.m < 1) fail("m must be >= 1");
  UserSet ids;
  for (const auto& u : sc.users) {
    if (u.id.value == 0 || u.id.in_dummy_range()) fail("user id " + std::to_string(u.id.value) + " out of range");
    if (!ids.insert(u.id).second) fail("duplicate user " + to_string(u.id));
    if (u.cycle.start < 1 || u.cycle.start > u.cycle.end || u.cycle.end > sc.m) {
      fail("cycle of " + to_string(u.id) + " outside [1, m]");
    }
  }
  for (const auto& j : sc.joins) {
    if (j.session < 1 || j.session > j.end || j.end > sc.m) fail("join window outside [1, m]");
  }
  switch (sc.loss.kind) {
    case LossModel::Kind::iid:
      if (!detail::is_probability(sc.loss.p)) fail("loss probability outside [0, 1]");
      break;
    case LossModel::Kind::burst:
      if (!detail::is_probability(sc.loss.p_enter) || !detail::is_probability(sc.loss.p_stay)) {
        fail("burst probabilities outside [0, 1]");
      }
      break;
    case LossModel::Kind::mask:
      for (const auto& [j, _] : sc.loss.drops) {
        if (j < 1 || j > sc.m) fail("masked session outside [1, m]");
      }
      break;
  }
  if (sc.kind == StructureKind::threshold) {
    if (sc.t < 1) fail("threshold must be >= 1");
    if (!sc.parts.empty()) fail("parts are only valid for multipartite structures");
    for (const auto& [u, _] : sc.user_xs) {
      if (!ids.count(u)) fail("x-coordinate given for unknown user " + to_string(u));
    }
  } else if (sc.kind == StructureKind::multipartite) {
    if (!sc.user_xs.empty() || sc.dummies != 0) fail("multipartite structures take x and dummies per part");
    UserSet in_parts;
    for (const auto& p : sc.parts) {
      for (UserId u : p.users) {
        if (u.value == 0 || u.in_dummy_range()) fail("user id " + std::to_string(u.value) + " out of range");
        if (!in_parts.insert(u).second) fail(to_string(u) + " appears in two parts");
      }
    }
    for (UserId u : ids) {
      if (!in_parts.count(u)) fail(to_string(u) + " belongs to no part");
    }
  } else {
    fail("scenarios support threshold and multipartite structures");
  }
  if (sc.hash_table && sc.hash_table->size() != sc.q) fail("hash table must have exactly q entries");
  if (sc.material.betas && sc.material.betas->size() != sc.m) fail("material needs exactly m betas");
  if (sc.material.vectors && sc.material.vectors->size() != sc.m) fail("material needs exactly m vectors");
}

namespace detail {

struct BuiltStructure {
  LinearAccessStructure structure;
  UserSet dummies;
};

inline BuiltStructure build_structure(const Scenario& sc, const PrimeField& field) {
  UserSet dummies;
  if (sc.kind == StructureKind::threshold) {
    std::map<UserId, std::uint64_t> xs;
    std::set<std::uint64_t> used;
    for (const auto& u : sc.users) {
      auto it = sc.user_xs.find(u.id);
      xs[u.id] = it != sc.user_xs.end() ? it->second : u.id.value;
      used.insert(xs[u.id]);
    }
    std::uint64_t x = 1;
    for (std::uint32_t k = 1; k <= sc.dummies; ++k) {
      while (used.count(x) != 0) ++x;
      xs[UserId::dummy(k)] = x;
      used.insert(x);
      dummies.insert(UserId::dummy(k));
    }
    return {make_threshold(sc.t, xs, field), dummies};
  }
  std::vector<UserSet> parts;
  std::vector<std::uint64_t> part_xs;
  std::uint32_t next_dummy = 1;
  for (const auto& p : sc.parts) {
    UserSet part(p.users.begin(), p.users.end());
    for (std::uint32_t k = 0; k < p.dummies; ++k) {
      part.insert(UserId::dummy(next_dummy));
      dummies.insert(UserId::dummy(next_dummy++));
    }
    parts.push_back(std::move(part));
    part_xs.push_back(p.x);
  }
  return {make_multipartite(parts, part_xs, field), dummies};
}

inline SetupParams setup_params(const Scenario& sc) {
  const PrimeField field(sc.q);
  BuiltStructure built = build_structure(sc, field);
  OneWayFn fn = sc.hash_table ? OneWayFn::table(field, *sc.hash_table) : OneWayFn::standard(field);
  FieldElement chain_seed = sc.material.chain_seed
                                ? field(*sc.material.chain_seed)
                                : SeededStream("chain", seed_bytes(sc.seeds.chain)).uniform(field);
  SetupParams params{std::move(built.structure), sc.m, std::move(fn), chain_seed, seed_bytes(sc.seeds.beta),
                     seed_bytes(sc.seeds.vectors), {}, std::move(built.dummies), std::nullopt, std::nullopt};
  for (const auto& u : sc.users) params.cycles[u.id] = u.cycle;
  if (sc.material.betas) {
    std::vector<FieldElement> betas;
    for (auto b : *sc.material.betas) {
      if (b >= sc.q) throw ScenarioInvalid("material beta outside GF(q)");
      betas.push_back(field(b));
    }
    params.betas = std::move(betas);
  }
  if (sc.material.vectors) {
    std::vector<FieldVector> vectors;
    for (const auto& v : *sc.material.vectors) {
      if (v.size() != params.structure.dimension()) throw ScenarioInvalid("material vector has the wrong length");
      std::vector<FieldElement> elems;
      for (auto e : v) {
        if (e >= sc.q) throw ScenarioInvalid("material vector entry outside GF(q)");
        elems.push_back(field(e));
      }
      vectors.emplace_back(std::move(elems));
    }
    params.vectors = std::move(vectors);
  }
  return params;
}

inline void check_key(const RecoveryResult& r, const GroundTruth& truth, UserId u) {
  if (r.key.value != truth.session_key(r.key.session)) {
    throw std::logic_error("key mismatch for " + to_string(u) + " at session " + std::to_string(r.key.session));
  }
}

}  // namespace detail

/// Runs the scenario and also returns the full protocol trace for the attack
/// harness. A padding or revocation-capacity failure stops the run and marks
/// every later (user, session) pair as aborted.
inline Execution execute(const Scenario& sc) {
  validate(sc);
  SetupParams params = [&] {
    try {
      return detail::setup_params(sc);
    } catch (const ConfigurationError& e) {
      throw ScenarioInvalid(e.what());
    }
  }();
  auto [gm, issued] = [&] {
    try {
      return GroupManager::setup(std::move(params));
    } catch (const ConfigurationError& e) {
      throw ScenarioInvalid(e.what());
    }
  }();

  ProtocolTrace trace{gm.structure(), gm.fn(), gm.truth(), gm.dummies(), std::move(issued), {}, {}, {}, {}};
  RunReport report;
  report.scenario = sc.name;
  report.q = sc.q;
  report.element_bits = gm.structure().field().element_bits();
  report.threshold = gm.structure().kind() == StructureKind::threshold ? gm.structure().threshold() : 2;
  report.m = sc.m;

  std::vector<JoinSpec> joins = sc.joins;
  std::stable_sort(joins.begin(), joins.end(), [](const JoinSpec& a, const JoinSpec& b) { return a.session < b.session; });
  auto next_join = joins.begin();

  detail::LossChannel channel(sc.loss, sc.seeds.loss);
  std::map<Session, UserSet> delivered;

  for (Session j = 1; j <= sc.m; ++j) {
    if (j > 1) gm.advance_session();
    for (; next_join != joins.end() && next_join->session == j; ++next_join) {
      try {
        auto [u, secret] = gm.add_member(j, next_join->end);
        trace.secrets.emplace(u, std::move(secret));
      } catch (const CapacityError& e) {
        throw ScenarioInvalid(std::string("join at session ") + std::to_string(j) + ": " + e.what());
      }
    }
    const UserSet members = gm.members_at(j);
    BroadcastMessage msg;
    try {
      msg = gm.broadcast(j, members);
    } catch (const SystemFailed& e) {
      report.failed_at = j;
      report.failure = e.what();
      break;
    } catch (const PaddingExhausted& e) {
      report.failed_at = j;
      report.failure = e.what();
      break;
    }
    const WireStats ws = broadcast_wire_stats(msg, gm.structure().field());
    SessionStats stats;
    stats.session = j;
    stats.t_j = static_cast<std::uint32_t>(msg.revealed.size());
    stats.field_elements = ws.field_elements;
    stats.element_bits = ws.element_bits;
    stats.total_bytes = ws.total_bytes;
    stats.members = static_cast<std::uint32_t>(members.size());
    stats.padding = gm.broadcast_log().back().padding;
    stats.revoked = gm.broadcast_log().back().revoked;
    for (UserId u : members) {
      if (channel.delivered(j, u)) delivered[j].insert(u);
    }
    stats.delivered = static_cast<std::uint32_t>(delivered[j].size());
    report.sessions.push_back(std::move(stats));
    trace.broadcasts.emplace(j, std::move(msg));
  }

  trace.structure = gm.structure();
  trace.padding_log = gm.broadcast_log();
  trace.failed_at = report.failed_at;
  trace.failure = report.failure;
  const Session last = report.failed_at ? *report.failed_at - 1 : sc.m;
  auto stats_for = [&](Session j) -> SessionStats& { return report.sessions.at(j - 1); };

  for (const auto& [u, secret] : trace.secrets) {
    report.storage.push_back({u, secret.cycle, secret.element_count()});
    for (Session j = secret.cycle.start; j <= secret.cycle.end; ++j) {
      OutcomeRecord rec{u, j, Outcome::unrecoverable, 0, 0, 0};
      if (j > last) {
        rec.outcome = Outcome::aborted;
      } else if (delivered[j].count(u) != 0) {
        const RecoveryResult r = member_recover(secret, trace.broadcasts.at(j), trace.structure);
        detail::check_key(r, trace.truth, u);
        rec.outcome = Outcome::received;
        rec.multiplications = r.multiplications;
        stats_for(j).max_multiplications = std::max(stats_for(j).max_multiplications, r.multiplications);
      } else {
        for (Session j2 = j + 1; j2 <= std::min(secret.cycle.end, last); ++j2) {
          if (delivered[j2].count(u) == 0) continue;
          const RecoveryResult r = member_self_heal(secret, trace.broadcasts.at(j2), j, trace.structure, trace.fn);
          detail::check_key(r, trace.truth, u);
          rec.outcome = Outcome::healed;
          rec.healed_from = j2;
          rec.multiplications = r.multiplications;
          rec.hash_applications = r.hash_applications;
          stats_for(j2).max_multiplications = std::max(stats_for(j2).max_multiplications, r.multiplications);
          ++stats_for(j).healed;
          break;
        }
      }
      report.outcomes.push_back(rec);
    }
  }
  report.counters = gm.counters();
  report.final_revoked = gm.revoked();
  report.delivered = std::move(delivered);
  return {std::move(report), std::move(trace)};
}

inline RunReport run_scenario(const Scenario& sc) { return execute(sc).report; }

inline std::string outcomes_csv(const RunReport& r) {
  std::ostringstream out;
  out << "user,session,outcome,healed_from,multiplications,hash_applications\n";
  for (const auto& o : r.outcomes) {
    out << to_string(o.user) << ',' << o.session << ',' << to_string(o.outcome) << ',';
    if (o.outcome == Outcome::healed) out << o.healed_from;
    out << ',' << o.multiplications << ',' << o.hash_applications << '\n';
  }
  return out.str();
}

struct SummaryRow {
  Session session = 0;
  std::uint32_t t_j = 0;
  std::uint64_t formula_bits = 0;
  std::uint64_t measured_bits = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t max_multiplications = 0;
  std::uint32_t healed = 0;
};

inline std::vector<SummaryRow> summarize(const RunReport& r) {
  std::vector<SummaryRow> rows;
  for (const auto& s : r.sessions) {
    rows.push_back({s.session, s.t_j, (std::uint64_t{s.t_j} + 1) * r.element_bits, s.element_bits, s.total_bytes,
                    s.max_multiplications, s.healed});
  }
  return rows;
}

inline std::string summary_csv(const RunReport& r) {
  std::ostringstream out;
  out << "session,t_j,formula_bits,measured_element_bits,total_bytes,max_multiplications,healed\n";
  for (const auto& row : summarize(r)) {
    out << row.session << ',' << row.t_j << ',' << row.formula_bits << ',' << row.measured_bits << ','
        << row.total_bytes << ',' << row.max_multiplications << ',' << row.healed << '\n';
  }
  return out.str();
}

inline std::string summary_text(const RunReport& r) {
  std::ostringstream out;
  out << "scenario: " << r.scenario << "\n";
  out << "q = " << r.q << ", m = " << r.m << ", element bits = " << r.element_bits << "\n";
  out << "sessions broadcast: " << r.sessions.size() << "\n";
  out << "outcomes: received " << r.count(Outcome::received) << ", healed " << r.count(Outcome::healed)
      << ", unrecoverable " << r.count(Outcome::unrecoverable) << ", aborted " << r.count(Outcome::aborted) << "\n";
  out << "bytes emitted: " << r.counters.bytes_emitted << " (" << r.counters.element_bits << " element bits)\n";
  out << "revoked at end: " << to_string(r.final_revoked) << "\n";
  if (r.failed_at) out << "system failed at session " << *r.failed_at << ": " << r.failure << "\n";
  return out.str();
}

}  // namespace shkd
