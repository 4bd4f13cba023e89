#pragma once

// Attack experiments against a recorded protocol run.
//
// The computational layer is a rule system: a coalition's knowledge is the
// fixpoint of the derivations it can feasibly perform. There is no rule for
// inverting the one-way function and no rule for predicting one β from
// others. The information-theoretic layer is an exhaustive census over all
// master vectors consistent with what the coalition saw.

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shkd/access.hpp"
#include "shkd/chain.hpp"
#include "shkd/core.hpp"
#include "shkd/error.hpp"
#include "shkd/gf.hpp"

namespace shkd {

enum class AtomKind : std::uint8_t {
  share,        // v_j·Φ(U)[slot]
  gm_share,     // v_j·Φ(GM)
  beta,         // β_j
  chain_key,    // K_i (index is the chain index, not the session)
  session_key,  // SK_j
  masked_key,   // Z_j
};

struct Atom {
  AtomKind kind = AtomKind::share;
  Session index = 0;
  UserId user{};
  std::uint32_t slot = 0;

  static Atom share(Session j, UserId u, std::uint32_t slot) { return {AtomKind::share, j, u, slot}; }
  static Atom gm_share(Session j) { return {AtomKind::gm_share, j, {}, 0}; }
  static Atom beta(Session j) { return {AtomKind::beta, j, {}, 0}; }
  static Atom chain_key(Session i) { return {AtomKind::chain_key, i, {}, 0}; }
  static Atom session_key(Session j) { return {AtomKind::session_key, j, {}, 0}; }
  static Atom masked_key(Session j) { return {AtomKind::masked_key, j, {}, 0}; }

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

inline std::string to_string(const Atom& a) {
  const std::string j = std::to_string(a.index);
  switch (a.kind) {
    case AtomKind::share: return "v" + j + "." + to_string(a.user) + "[" + std::to_string(a.slot) + "]";
    case AtomKind::gm_share: return "v" + j + ".GM";
    case AtomKind::beta: return "beta" + j;
    case AtomKind::chain_key: return "K" + j;
    case AtomKind::session_key: return "SK" + j;
    case AtomKind::masked_key: return "Z" + j;
  }
  return "?";
}

enum class Rule { given, forward_hash, linear, unmask, compose, prng_break };

inline std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::given: return "given";
    case Rule::forward_hash: return "forward-hash";
    case Rule::linear: return "linear";
    case Rule::unmask: return "unmask";
    case Rule::compose: return "compose";
    case Rule::prng_break: return "prng-break";
  }
  return "?";
}

struct Derivation {
  Rule rule = Rule::given;
  std::vector<Atom> premises;
};

struct KnowledgeSet {
  std::map<Atom, FieldElement> values;
  std::map<Atom, Derivation> log;

  bool contains(const Atom& a) const { return values.count(a) != 0; }
  std::size_t size() const { return values.size(); }

  /// Derivation tree of `a`, one step per line.
  std::string explain(const Atom& a, int depth = 0) const {
    auto it = log.find(a);
    if (it == log.end()) return std::string(2 * depth, ' ') + to_string(a) + " (unknown)\n";
    std::string out = std::string(2 * depth, ' ') + to_string(a) + " = " + std::to_string(values.at(a).value()) +
                      " via " + std::string(to_string(it->second.rule)) + "\n";
    for (const auto& p : it->second.premises) out += explain(p, depth + 1);
    return out;
  }

  friend bool operator==(const KnowledgeSet& x, const KnowledgeSet& y) { return x.values == y.values; }
};

struct CoalitionView {
  UserSet members;
  std::vector<PersonalSecret> secrets;
  std::vector<BroadcastMessage> broadcasts;
  std::map<Session, FieldElement> known_session_keys;
  std::map<Session, FieldElement> granted_betas;
  std::vector<std::pair<Atom, FieldElement>> granted_shares;
};

struct ClosureOptions {
  /// Mutation switch: pretend the β generator is predictable, so knowing any
  /// β reveals all of them (values taken from `prng_oracle`).
  bool prng_broken = false;
  const BetaSequence* prng_oracle = nullptr;
  /// Randomizes rule and session order; the fixpoint must not depend on it.
  std::optional<std::uint64_t> order_seed;
};

inline KnowledgeSet knowledge_closure(const CoalitionView& view, const LinearAccessStructure& structure,
                                      const OneWayFn& fn, Session m, const ClosureOptions& options = {}) {
  UserSet holders;
  for (const auto& s : view.secrets) holders.insert(s.user);
  if (holders != view.members) throw ContractViolation("view secrets do not match its members");
  if (options.prng_broken && options.prng_oracle == nullptr) throw ContractViolation("prng_broken needs an oracle");

  KnowledgeSet ks;
  auto learn = [&](const Atom& a, FieldElement v, Rule rule, std::vector<Atom> premises = {}) {
    if (ks.values.emplace(a, v).second) {
      ks.log.emplace(a, Derivation{rule, std::move(premises)});
      return true;
    }
    return false;
  };

  // R1: the view itself.
  for (const auto& s : view.secrets) {
    for (const auto& [j, dots] : s.dots) {
      for (std::uint32_t r = 0; r < dots.size(); ++r) learn(Atom::share(j, s.user, r), dots[r], Rule::given);
    }
    for (const auto& [j, b] : s.betas) learn(Atom::beta(j), b, Rule::given);
  }
  for (const auto& msg : view.broadcasts) {
    for (const auto& entry : msg.revealed) {
      for (std::uint32_t r = 0; r < entry.dots.size(); ++r) {
        learn(Atom::share(msg.session, entry.user, r), entry.dots[r], Rule::given);
      }
    }
    learn(Atom::masked_key(msg.session), msg.z, Rule::given);
  }
  for (const auto& [j, sk] : view.known_session_keys) learn(Atom::session_key(j), sk, Rule::given);
  for (const auto& [j, b] : view.granted_betas) learn(Atom::beta(j), b, Rule::given);
  for (const auto& [a, v] : view.granted_shares) learn(a, v, Rule::given);

  auto known = [&](const Atom& a) -> const FieldElement* {
    auto it = ks.values.find(a);
    return it == ks.values.end() ? nullptr : &it->second;
  };

  std::vector<Session> sessions(m);
  std::iota(sessions.begin(), sessions.end(), Session{1});
  std::optional<std::mt19937_64> rng;
  if (options.order_seed) rng.emplace(*options.order_seed);

  // R2: K_i known => K_{i+1} = H(K_i). Never the reverse direction.
  auto forward_hash = [&] {
    bool changed = false;
    for (Session i : sessions) {
      if (i >= m) continue;
      if (const auto* k = known(Atom::chain_key(i)); k && !known(Atom::chain_key(i + 1))) {
        changed |= learn(Atom::chain_key(i + 1), fn(*k), Rule::forward_hash, {Atom::chain_key(i)});
      }
    }
    return changed;
  };

  // R3: shares of session j spanning Φ(GM) give v_j·Φ(GM).
  auto linear = [&] {
    bool changed = false;
    for (Session j : sessions) {
      if (known(Atom::gm_share(j))) continue;
      std::vector<Atom> atoms;
      std::vector<FieldVector> vectors;
      for (auto it = ks.values.lower_bound(Atom::share(j, UserId{0}, 0));
           it != ks.values.end() && it->first.kind == AtomKind::share && it->first.index == j; ++it) {
        atoms.push_back(it->first);
        vectors.push_back(structure.phi(it->first.user).at(it->first.slot));
      }
      if (atoms.empty()) continue;
      auto lambda = solve_combination(vectors, structure.gm_vector());
      if (!lambda) continue;
      FieldElement g = structure.field().zero();
      std::vector<Atom> used;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        if ((*lambda)[k].is_zero()) continue;
        g += (*lambda)[k] * ks.values.at(atoms[k]);
        used.push_back(atoms[k]);
      }
      changed |= learn(Atom::gm_share(j), g, Rule::linear, std::move(used));
    }
    return changed;
  };

  // R4: Z_j = K_{m-j+1} + v_j·Φ(GM); any two of the three give the third
  // (Z_j itself only ever comes from a broadcast).
  auto unmask = [&] {
    bool changed = false;
    for (Session j : sessions) {
      const Atom z = Atom::masked_key(j), g = Atom::gm_share(j), k = Atom::chain_key(m - j + 1);
      const auto* zv = known(z);
      if (!zv) continue;
      const auto* gv = known(g);
      const auto* kv = known(k);
      if (gv && !kv) changed |= learn(k, *zv - *gv, Rule::unmask, {z, g});
      else if (kv && !gv) changed |= learn(g, *zv - *kv, Rule::unmask, {z, k});
    }
    return changed;
  };

  // R5: SK_j = β_j + K_{m-j+1}; any two give the third.
  auto compose = [&] {
    bool changed = false;
    for (Session j : sessions) {
      const Atom b = Atom::beta(j), k = Atom::chain_key(m - j + 1), sk = Atom::session_key(j);
      const auto* bv = known(b);
      const auto* kv = known(k);
      const auto* skv = known(sk);
      if (bv && kv && !skv) changed |= learn(sk, *bv + *kv, Rule::compose, {b, k});
      else if (skv && bv && !kv) changed |= learn(k, *skv - *bv, Rule::compose, {sk, b});
      else if (skv && kv && !bv) changed |= learn(b, *skv - *kv, Rule::compose, {sk, k});
    }
    return changed;
  };

  auto prng_break = [&] {
    if (!options.prng_broken) return false;
    auto first = std::find_if(ks.values.begin(), ks.values.end(),
                              [](const auto& kv) { return kv.first.kind == AtomKind::beta; });
    if (first == ks.values.end()) return false;
    const Atom seed = first->first;
    bool changed = false;
    for (Session j = 1; j <= m; ++j) {
      changed |= learn(Atom::beta(j), options.prng_oracle->at(j), Rule::prng_break, {seed});
    }
    return changed;
  };

  std::vector<std::function<bool()>> rules{forward_hash, linear, unmask, compose, prng_break};
  for (bool changed = true; changed;) {
    changed = false;
    if (rng) {
      std::shuffle(rules.begin(), rules.end(), *rng);
      std::shuffle(sessions.begin(), sessions.end(), *rng);
    }
    for (auto& rule : rules) changed |= rule();
  }
  return ks;
}

/// Ground-truth value of an atom.
inline FieldElement true_value(const Atom& a, const GroundTruth& truth, const LinearAccessStructure& structure) {
  switch (a.kind) {
    case AtomKind::share: return dot(truth.vector(a.index), structure.phi(a.user).at(a.slot));
    case AtomKind::gm_share: return dot(truth.vector(a.index), structure.gm_vector());
    case AtomKind::beta: return truth.betas.at(a.index);
    case AtomKind::chain_key: return truth.chain.key(a.index);
    case AtomKind::session_key: return truth.session_key(a.index);
    case AtomKind::masked_key: return truth.chain_key_for(a.index) + dot(truth.vector(a.index), structure.gm_vector());
  }
  throw std::logic_error("unhandled atom kind");
}

/// Replays every derivation from its premises and compares every atom with
/// ground truth. Throws std::logic_error on any discrepancy.
inline void verify_closure(const KnowledgeSet& ks, const GroundTruth& truth, const LinearAccessStructure& structure,
                           const OneWayFn& fn) {
  for (const auto& [atom, value] : ks.values) {
    if (value != true_value(atom, truth, structure)) {
      throw std::logic_error("closure atom " + to_string(atom) + " disagrees with ground truth");
    }
    const Derivation& d = ks.log.at(atom);
    auto premise = [&](std::size_t i) { return ks.values.at(d.premises.at(i)); };
    std::optional<FieldElement> replay;
    switch (d.rule) {
      case Rule::given:
      case Rule::prng_break:
        break;
      case Rule::forward_hash:
        replay = fn(premise(0));
        break;
      case Rule::linear: {
        std::vector<FieldVector> vectors;
        for (const auto& p : d.premises) vectors.push_back(structure.phi(p.user).at(p.slot));
        auto lambda = solve_combination(vectors, structure.gm_vector());
        if (!lambda) throw std::logic_error("linear derivation of " + to_string(atom) + " does not span");
        FieldElement g = structure.field().zero();
        for (std::size_t k = 0; k < vectors.size(); ++k) g += (*lambda)[k] * premise(k);
        replay = g;
        break;
      }
      case Rule::unmask:
        replay = premise(0) - premise(1);
        break;
      case Rule::compose:
        if (atom.kind == AtomKind::session_key) replay = premise(0) + premise(1);
        else replay = premise(0) - premise(1);
        break;
    }
    if (replay && *replay != value) throw std::logic_error("replay of " + to_string(atom) + " failed");
  }
}

inline constexpr std::uint64_t kCensusLimit = 10'000'000;

/// One observed linear functional of the master vector: dot(v, vector) = value.
struct Observation {
  FieldVector vector;
  FieldElement value;
};

/// counts[c] = number of v in GF(q)^l consistent with every observation and
/// with dot(v, Φ(GM)) = c. Exhaustive.
inline std::vector<std::uint64_t> secrecy_census(const LinearAccessStructure& structure,
                                                 std::span<const Observation> observations,
                                                 std::uint64_t limit = kCensusLimit) {
  const std::uint64_t q = structure.field().modulus();
  const std::size_t l = structure.dimension();
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < l; ++i) {
    if (space > limit / q) throw CensusInfeasible("q^l exceeds " + std::to_string(limit));
    space *= q;
  }
  std::vector<std::vector<std::uint64_t>> rows;
  std::vector<std::uint64_t> targets;
  for (const auto& o : observations) {
    if (o.vector.size() != l) throw ContractViolation("observation has the wrong length");
    std::vector<std::uint64_t> row;
    for (const auto& e : o.vector) row.push_back(e.value());
    rows.push_back(std::move(row));
    targets.push_back(o.value.value());
  }
  std::vector<std::uint64_t> gm;
  for (const auto& e : structure.gm_vector()) gm.push_back(e.value());

  auto eval = [&](const std::vector<std::uint64_t>& w, const std::vector<std::uint64_t>& v) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < l; ++i) acc = (acc + detail::mul_mod(w[i], v[i], q)) % q;
    return acc;
  };

  std::vector<std::uint64_t> counts(q, 0);
  std::vector<std::uint64_t> v(l, 0);
  for (std::uint64_t n = 0; n < space; ++n) {
    bool consistent = true;
    for (std::size_t k = 0; k < rows.size() && consistent; ++k) consistent = eval(rows[k], v) == targets[k];
    if (consistent) ++counts[eval(gm, v)];
    for (std::size_t i = 0; i < l; ++i) {
      if (++v[i] < q) break;
      v[i] = 0;
    }
  }
  return counts;
}

inline std::vector<std::uint64_t> secrecy_census(const LinearAccessStructure& structure,
                                                 const ShareSet& observed, std::uint64_t limit = kCensusLimit) {
  std::vector<Observation> obs;
  for (const auto& [u, dots] : observed.entries) {
    const auto& vs = structure.phi(u);
    if (vs.size() != dots.size()) throw ContractViolation("observed arity mismatch for " + to_string(u));
    for (std::size_t r = 0; r < dots.size(); ++r) obs.push_back({vs[r], dots[r]});
  }
  return secrecy_census(structure, obs, limit);
}

inline bool census_uniform(const std::vector<std::uint64_t>& counts) {
  return !counts.empty() && std::all_of(counts.begin(), counts.end(), [&](std::uint64_t c) { return c == counts[0]; });
}

enum class Property { forward, backward, collusion, revocation };
enum class ViewMode { proof_faithful, cycle_faithful };

inline std::string_view to_string(Property p) {
  switch (p) {
    case Property::forward: return "forward";
    case Property::backward: return "backward";
    case Property::collusion: return "collusion";
    case Property::revocation: return "revocation";
  }
  return "?";
}

inline std::string_view to_string(ViewMode m) { return m == ViewMode::proof_faithful ? "proof" : "cycle"; }

inline constexpr std::array<Property, 4> kAllProperties{Property::forward, Property::backward, Property::collusion,
                                                        Property::revocation};

struct AttackOptions {
  std::vector<ViewMode> modes{ViewMode::proof_faithful, ViewMode::cycle_faithful};
  bool prng_broken = false;
  /// Censuses run only when q^l is at most this.
  std::uint64_t census_max_space = 200'000;
};

struct Verdict {
  Property property = Property::forward;
  ViewMode mode = ViewMode::proof_faithful;
  UserSet coalition;
  /// Later-joining half of a collusion coalition; empty otherwise.
  UserSet joiners;
  Session session = 0;
  bool key_absent = true;
  /// Users whose session shares the coalition holds after closure.
  UserSet observed;
  /// An authorized observation pins v_j·Φ(GM); the census is then skipped and
  /// only the blinder keeps SK_j hidden.
  bool observed_authorized = false;
  std::optional<bool> census_uniform;
  bool privacy_ok = true;
  std::string derivation;

  bool pass() const { return key_absent && census_uniform.value_or(true) && privacy_ok; }
};

struct AttackReport {
  std::vector<Verdict> verdicts;

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass(); });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass(); }));
  }
};

namespace detail {

class AttackRunner {
 public:
  AttackRunner(const ProtocolTrace& trace, const AttackOptions& options) : trace_(trace), options_(options) {
    closure_options_.prng_broken = options.prng_broken;
    closure_options_.prng_oracle = &trace.truth.betas;
    for (const auto& [_, msg] : trace.broadcasts) all_broadcasts_.push_back(msg);
  }

  void forward(AttackReport& report) {
    for (const auto& [j, _] : trace_.broadcasts) {
      const UserSet coalition = revoked_before(j);
      if (coalition.empty()) continue;
      require_unauthorized(coalition, "revoked coalition");
      for (ViewMode mode : options_.modes) {
        CoalitionView view = mode == ViewMode::proof_faithful ? proof_view(coalition, j) : base_view(coalition);
        if (mode == ViewMode::cycle_faithful) grant_session_keys(view, 1, j - 1);
        report.verdicts.push_back(judge(Property::forward, mode, coalition, {}, j, view));
      }
    }
  }

  void revocation(AttackReport& report) {
    for (const auto& [j, msg] : trace_.broadcasts) {
      const UserSet coalition = revoked_before(j);
      if (coalition.empty()) continue;
      require_unauthorized(coalition, "revoked coalition");
      for (ViewMode mode : options_.modes) {
        CoalitionView view;
        if (mode == ViewMode::proof_faithful) {
          view = proof_view(coalition, j);
        } else {
          view = base_view(coalition);
          view.broadcasts = {msg};
        }
        report.verdicts.push_back(judge(Property::revocation, mode, coalition, {}, j, view));
      }
    }
  }

  // Joiners after j. The proof-faithful view (all shares, later blinders)
  // needs an unauthorized coalition, so it drops the highest ids until it is.
  void backward(AttackReport& report) {
    for (const auto& [j, _] : trace_.broadcasts) {
      UserSet joined;
      for (const auto& [u, s] : trace_.secrets) {
        if (s.cycle.start > j) joined.insert(u);
      }
      for (ViewMode mode : options_.modes) {
        UserSet coalition = joined;
        if (mode == ViewMode::proof_faithful) trim_to_unauthorized(coalition, {});
        if (coalition.empty()) continue;
        CoalitionView view = base_view(coalition);
        grant_session_keys(view, j + 1, trace_.m());
        if (mode == ViewMode::proof_faithful) {
          grant_all_shares(view, coalition);
          grant_betas(view, j + 1, trace_.m());
        }
        report.verdicts.push_back(judge(Property::backward, mode, coalition, {}, j, view));
      }
    }
  }

  // L1 = users removed before j1, L2 = users joining at or after j2. The
  // proof-faithful view grants L1 ∪ L2 every share of every session, so L2 is
  // trimmed until the union is unauthorized; the cycle-faithful view holds
  // only real secrets and keeps L2 whole.
  void collusion(AttackReport& report) {
    std::set<Session> starts_j1, starts_j2;
    for (const auto& [_, s] : trace_.secrets) {
      if (s.cycle.end + 1 <= trace_.m()) starts_j1.insert(s.cycle.end + 1);
      if (s.cycle.start >= 2) starts_j2.insert(s.cycle.start);
    }
    for (Session j1 : starts_j1) {
      if (trace_.broadcasts.count(j1) == 0) continue;
      const UserSet early = revoked_before(j1);
      if (early.empty()) continue;
      require_unauthorized(early, "early coalition");
      for (Session j2 : starts_j2) {
        if (j2 <= j1) continue;
        UserSet joined;
        for (const auto& [u, s] : trace_.secrets) {
          if (s.cycle.start >= j2) joined.insert(u);
        }
        for (ViewMode mode : options_.modes) {
          UserSet late = joined;
          if (mode == ViewMode::proof_faithful) trim_to_unauthorized(late, early);
          if (late.empty()) continue;
          UserSet coalition = early;
          coalition.insert(late.begin(), late.end());
          CoalitionView view = base_view(coalition);
          if (mode == ViewMode::proof_faithful) {
            grant_all_shares(view, coalition);
            grant_betas(view, 1, j1 - 1);
            grant_betas(view, j2, trace_.m());
            grant_session_keys(view, 1, j1 - 1);
            grant_session_keys(view, j2, trace_.m());
          }
          const KnowledgeSet ks = close(view);
          for (Session j = j1; j < j2; ++j) {
            if (trace_.broadcasts.count(j) == 0) continue;
            report.verdicts.push_back(judge_closed(Property::collusion, mode, early, late, j, ks));
          }
        }
      }
    }
  }

 private:
  UserSet revoked_before(Session j) const {
    UserSet out;
    for (const auto& [u, s] : trace_.secrets) {
      if (s.cycle.end < j) out.insert(u);
    }
    return out;
  }

  void require_unauthorized(const UserSet& coalition, const std::string& what) const {
    if (is_authorized(trace_.structure, coalition)) {
      throw ScenarioInvalid(what + " " + to_string(coalition) + " is authorized");
    }
  }

  // Drops the highest ids of `set` until set ∪ fixed is unauthorized.
  void trim_to_unauthorized(UserSet& set, const UserSet& fixed) const {
    for (;;) {
      UserSet all = fixed;
      all.insert(set.begin(), set.end());
      if (set.empty() || !is_authorized(trace_.structure, all)) return;
      set.erase(std::prev(set.end()));
    }
  }

  CoalitionView base_view(const UserSet& coalition) const {
    CoalitionView view;
    view.members = coalition;
    for (UserId u : coalition) view.secrets.push_back(trace_.secrets.at(u));
    view.broadcasts = all_broadcasts_;
    return view;
  }

  void grant_session_keys(CoalitionView& view, Session from, Session to) const {
    for (Session s = from; s <= to && s <= trace_.m(); ++s) view.known_session_keys[s] = trace_.truth.session_key(s);
  }

  void grant_betas(CoalitionView& view, Session from, Session to) const {
    for (Session s = from; s <= to && s <= trace_.m(); ++s) view.granted_betas[s] = trace_.truth.betas.at(s);
  }

  void grant_all_shares(CoalitionView& view, const UserSet& coalition) const {
    for (UserId u : coalition) {
      const auto& vs = trace_.structure.phi(u);
      for (Session s = 1; s <= trace_.m(); ++s) {
        for (std::uint32_t r = 0; r < vs.size(); ++r) {
          view.granted_shares.emplace_back(Atom::share(s, u, r), dot(trace_.truth.vector(s), vs[r]));
        }
      }
    }
  }

  // The adversary's view in the security reduction: every share of the
  // revoked users for all sessions, all broadcasts, β_1..β_{j-1} and
  // SK_1..SK_{j-1}.
  CoalitionView proof_view(const UserSet& coalition, Session j) const {
    CoalitionView view = base_view(coalition);
    grant_all_shares(view, coalition);
    grant_betas(view, 1, j - 1);
    grant_session_keys(view, 1, j - 1);
    return view;
  }

  KnowledgeSet close(const CoalitionView& view) const {
    KnowledgeSet ks = knowledge_closure(view, trace_.structure, trace_.fn, trace_.m(), closure_options_);
    verify_closure(ks, trace_.truth, trace_.structure, trace_.fn);
    return ks;
  }

  Verdict judge(Property p, ViewMode mode, const UserSet& coalition, const UserSet& joiners, Session j,
                const CoalitionView& view) const {
    return judge_closed(p, mode, coalition, joiners, j, close(view));
  }

  Verdict judge_closed(Property p, ViewMode mode, const UserSet& coalition, const UserSet& joiners, Session j,
                       const KnowledgeSet& ks) const {
    Verdict v;
    v.property = p;
    v.mode = mode;
    v.coalition = coalition;
    v.joiners = joiners;
    v.session = j;
    const Atom target = Atom::session_key(j);
    v.key_absent = !ks.contains(target);
    if (!v.key_absent) v.derivation = ks.explain(target);

    UserSet everyone = coalition;
    everyone.insert(joiners.begin(), joiners.end());
    for (const auto& [atom, _] : ks.values) {
      if (atom.kind != AtomKind::share || everyone.count(atom.user) != 0) continue;
      auto owner = trace_.secrets.find(atom.user);
      if (owner != trace_.secrets.end() && owner->second.cycle.contains(atom.index)) {
        v.privacy_ok = false;
        v.derivation += "leaked personal share " + to_string(atom) + "\n";
      }
    }

    std::vector<Observation> obs;
    for (auto it = ks.values.lower_bound(Atom::share(j, UserId{0}, 0));
         it != ks.values.end() && it->first.kind == AtomKind::share && it->first.index == j; ++it) {
      v.observed.insert(it->first.user);
      obs.push_back({trace_.structure.phi(it->first.user).at(it->first.slot), it->second});
    }
    v.observed_authorized = is_authorized(trace_.structure, v.observed);
    std::uint64_t space = 1;
    bool feasible = !v.observed_authorized;
    for (std::size_t i = 0; i < trace_.structure.dimension() && feasible; ++i) {
      space *= trace_.structure.field().modulus();
      feasible = space <= options_.census_max_space;
    }
    if (feasible) {
      v.census_uniform = census_uniform(secrecy_census(trace_.structure, obs, options_.census_max_space));
    }
    return v;
  }

  const ProtocolTrace& trace_;
  const AttackOptions& options_;
  ClosureOptions closure_options_;
  std::vector<BroadcastMessage> all_broadcasts_;
};

}  // namespace detail

/// Builds each property's coalitions from the trace, closes their views and
/// records one verdict per (coalition, target session, view mode).
inline AttackReport run_attack_suite(const ProtocolTrace& trace, std::span<const Property> which,
                                     const AttackOptions& options = {}) {
  detail::AttackRunner runner(trace, options);
  AttackReport report;
  for (Property p : which) {
    switch (p) {
      case Property::forward: runner.forward(report); break;
      case Property::backward: runner.backward(report); break;
      case Property::collusion: runner.collusion(report); break;
      case Property::revocation: runner.revocation(report); break;
    }
  }
  return report;
}

inline std::string verdicts_csv(const AttackReport& report) {
  std::ostringstream out;
  out << "property,mode,coalition,joiners,session,key_absent,census,privacy,verdict\n";
  for (const auto& v : report.verdicts) {
    out << to_string(v.property) << ',' << to_string(v.mode) << ',' << to_string(v.coalition) << ','
        << to_string(v.joiners) << ',' << v.session << ',' << (v.key_absent ? "yes" : "no") << ','
        << (v.observed_authorized ? "n/a" : v.census_uniform ? (*v.census_uniform ? "uniform" : "biased") : "skipped")
        << ','
        << (v.privacy_ok ? "ok" : "leak") << ',' << (v.pass() ? "pass" : "fail") << '\n';
  }
  return out.str();
}

inline std::string verdicts_text(const AttackReport& report) {
  std::map<std::pair<Property, ViewMode>, std::pair<std::size_t, std::size_t>> tally;
  for (const auto& v : report.verdicts) {
    auto& [pass, total] = tally[{v.property, v.mode}];
    ++total;
    pass += v.pass() ? 1 : 0;
  }
  std::ostringstream out;
  for (const auto& [key, counts] : tally) {
    out << to_string(key.first) << " (" << to_string(key.second) << " view): " << counts.first << "/"
        << counts.second << " pass\n";
  }
  for (const auto& v : report.verdicts) {
    if (v.pass()) continue;
    out << "FAIL " << to_string(v.property) << " " << to_string(v.mode) << " coalition " << to_string(v.coalition);
    if (!v.joiners.empty()) out << " + " << to_string(v.joiners);
    out << " session " << v.session << "\n" << v.derivation;
  }
  out << (report.all_pass() ? "all properties hold\n" : "PROPERTY VIOLATION\n");
  return out.str();
}

}  // namespace shkd
