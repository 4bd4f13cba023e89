#pragma once

// Group manager and member protocol engines: set-up, per-session broadcast,
// joining, life-cycle expiry, session key recovery and self-healing.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shkd/access.hpp"
#include "shkd/chain.hpp"
#include "shkd/error.hpp"
#include "shkd/gf.hpp"
#include "shkd/messages.hpp"
#include "shkd/wire.hpp"

namespace shkd {

/// Smallest modulus accepted at set-up; q = 2 and q = 3 leave no room for
/// users and dummies.
inline constexpr std::uint64_t kMinModulus = 5;

struct SetupParams {
  LinearAccessStructure structure;
  Session m = 0;
  OneWayFn fn;
  FieldElement chain_seed;
  Bytes beta_seed;
  Bytes vector_seed;
  std::map<UserId, LifeCycle> cycles;
  UserSet dummies;
  /// Explicit β_1..β_m, replacing the seeded generator.
  std::optional<std::vector<FieldElement>> betas;
  /// Explicit v_1..v_m, replacing the seeded generator.
  std::optional<std::vector<FieldVector>> vectors;
};

/// Secret material a group manager holds. Exposed for tests, ground-truth
/// checks and the attack harness.
struct GroundTruth {
  Session m = 0;
  std::vector<FieldVector> vectors;
  BackwardChain chain;
  BetaSequence betas;

  const FieldVector& vector(Session j) const {
    if (j < 1 || j > vectors.size()) throw ContractViolation("session " + std::to_string(j) + " out of range");
    return vectors[j - 1];
  }
  FieldElement chain_key_for(Session j) const { return chain.key(chain_index(j, m)); }
  FieldElement session_key(Session j) const { return compose_session_key(betas.at(j), chain_key_for(j)); }
};

struct MemberRecord {
  LifeCycle cycle;
  bool issued = false;
};

/// Which revealed users were padding and which were revoked.
struct BroadcastRecord {
  Session session = 0;
  UserSet padding;
  UserSet revoked;
};

struct GmCounters {
  std::uint64_t broadcasts = 0;
  std::uint64_t field_elements = 0;
  std::uint64_t element_bits = 0;
  std::uint64_t id_bytes = 0;
  std::uint64_t bytes_emitted = 0;
};

class GroupManager {
 public:
  using Issued = std::map<UserId, PersonalSecret>;

  static std::pair<GroupManager, Issued> setup(SetupParams params) {
    const PrimeField& field = params.structure.field();
    if (field.modulus() < kMinModulus) {
      throw ConfigurationError("q must be at least " + std::to_string(kMinModulus));
    }
    if (params.m == 0) throw ConfigurationError("m must be >= 1");
    if (params.fn.field() != field) throw ConfigurationError("one-way function uses a different field");
    if (!field.contains(params.chain_seed)) throw ConfigurationError("chain seed outside GF(q)");
    for (UserId d : params.dummies) {
      if (!params.structure.contains(d)) throw ConfigurationError("dummy " + to_string(d) + " not in structure");
    }
    for (const auto& [u, c] : params.cycles) {
      if (!params.structure.contains(u)) throw ConfigurationError(to_string(u) + " not in structure");
      if (params.dummies.count(u) != 0) throw ConfigurationError(to_string(u) + " is a dummy");
      check_cycle(c, params.m);
    }

    GroupManager gm(std::move(params.structure), params.fn);
    gm.dummies_ = std::move(params.dummies);
    gm.truth_.m = params.m;

    const std::size_t l = gm.structure_.dimension();
    if (params.vectors) {
      if (params.vectors->size() != params.m) throw ConfigurationError("need exactly m session vectors");
      for (const auto& v : *params.vectors) {
        if (v.size() != l || v.modulus() != field.modulus()) throw ConfigurationError("session vector shape");
      }
      gm.truth_.vectors = std::move(*params.vectors);
    } else {
      SeededStream stream("vectors", params.vector_seed);
      for (Session j = 0; j < params.m; ++j) gm.truth_.vectors.push_back(stream.uniform_vector(field, l));
    }

    if (params.betas) {
      if (params.betas->size() != params.m) throw ConfigurationError("need exactly m betas");
      for (const auto& b : *params.betas) {
        if (!field.contains(b)) throw ConfigurationError("beta outside GF(q)");
      }
      gm.truth_.betas = BetaSequence{std::move(*params.betas), params.beta_seed};
    } else {
      gm.truth_.betas = generate_betas(params.beta_seed, params.m, field);
    }
    gm.truth_.chain = build_chain(params.chain_seed, params.m, gm.fn_);

    Issued issued;
    for (const auto& [u, c] : params.cycles) issued.emplace(u, gm.issue(u, c));
    return {std::move(gm), std::move(issued)};
  }

  const LinearAccessStructure& structure() const noexcept { return structure_; }
  const OneWayFn& fn() const noexcept { return fn_; }
  Session m() const noexcept { return truth_.m; }
  Session current_session() const noexcept { return current_; }
  const UserSet& revoked() const noexcept { return revoked_; }
  const UserSet& dummies() const noexcept { return dummies_; }
  const std::map<UserId, MemberRecord>& ledger() const noexcept { return ledger_; }
  const GmCounters& counters() const noexcept { return counters_; }
  const std::vector<BroadcastRecord>& broadcast_log() const noexcept { return log_; }
  const GroundTruth& truth() const noexcept { return truth_; }

  FieldElement session_key(Session j) const { return truth_.session_key(j); }

  /// Issued users whose life cycle covers session j.
  UserSet members_at(Session j) const {
    UserSet out;
    for (const auto& [u, rec] : ledger_) {
      if (rec.issued && rec.cycle.contains(j)) out.insert(u);
    }
    return out;
  }

  /// Emits B_j for the current session. Padding never includes a current
  /// member, whether or not it appears in `active`.
  BroadcastMessage broadcast(Session j, const UserSet& active) {
    if (j != current_) {
      throw SequencingError("broadcast for session " + std::to_string(j) + " during session " +
                            std::to_string(current_));
    }
    if (broadcast_done_) throw SequencingError("session " + std::to_string(j) + " already broadcast");
    UserSet members = members_at(j);
    for (UserId u : active) {
      if (members.count(u) == 0) throw ContractViolation(to_string(u) + " is not a member in session " + std::to_string(j));
    }
    if (is_authorized(structure_, revoked_)) {
      throw SystemFailed("revoked set " + to_string(revoked_) + " is authorized at session " + std::to_string(j));
    }
    const UserSet padding = select_padding(structure_, revoked_, members, dummies_);

    UserSet revealed = padding;
    revealed.insert(revoked_.begin(), revoked_.end());
    const FieldVector& v = truth_.vector(j);
    const ShareSet shares = compute_shares(structure_, v, j, revealed);

    BroadcastMessage msg;
    msg.session = j;
    for (const auto& [u, dots] : shares.entries) {
      msg.revealed.push_back({u, dots});
      last_revealed_[u] = j;
    }
    msg.z = truth_.chain_key_for(j) + dot(v, structure_.gm_vector());

    const WireStats stats = broadcast_wire_stats(msg, structure_.field());
    ++counters_.broadcasts;
    counters_.field_elements += stats.field_elements;
    counters_.element_bits += stats.element_bits;
    counters_.id_bytes += stats.id_bytes;
    counters_.bytes_emitted += stats.total_bytes;
    log_.push_back({j, padding, revoked_});
    broadcast_done_ = true;
    return msg;
  }

  /// Registers a new member for [join, end]. Reuses the lowest never-issued
  /// real user whose share was not revealed at or after `join`; threshold
  /// structures otherwise grow by one fresh evaluation point.
  std::pair<UserId, PersonalSecret> add_member(Session join, Session end) {
    if (join < current_) {
      throw SequencingError("join at " + std::to_string(join) + " precedes current session " + std::to_string(current_));
    }
    check_cycle({join, end}, truth_.m);

    std::optional<UserId> chosen;
    for (UserId u : structure_.users()) {
      if (dummies_.count(u) != 0) continue;
      auto rec = ledger_.find(u);
      if (rec != ledger_.end() && rec->second.issued) continue;
      auto rev = last_revealed_.find(u);
      if (rev != last_revealed_.end() && rev->second >= join) continue;
      chosen = u;
      break;
    }
    if (!chosen) {
      if (structure_.kind() != StructureKind::threshold) throw CapacityError("no unused identities remain");
      const std::uint64_t q = structure_.field().modulus();
      if (structure_.users().size() + 1 >= q) throw CapacityError("GF(q) has no unused evaluation points");
      std::set<std::uint64_t> used_x;
      std::uint32_t next_id = 1;
      for (UserId u : structure_.users()) {
        used_x.insert(structure_.x_coordinate(u)->value());
        if (!u.in_dummy_range()) next_id = std::max(next_id, u.value + 1);
      }
      if (next_id >= UserId::kDummyBase) throw CapacityError("real identity range exhausted");
      std::uint64_t x = 1;
      while (used_x.count(x) != 0) ++x;
      structure_ = extend_threshold(structure_, UserId{next_id}, x);
      chosen = UserId{next_id};
    }
    return {*chosen, issue(*chosen, {join, end})};
  }

  /// Moves to the next session; members whose cycle ended become revoked.
  void advance_session() {
    if (current_ >= truth_.m) throw SessionExhausted("all " + std::to_string(truth_.m) + " sessions used");
    ++current_;
    broadcast_done_ = false;
    for (const auto& [u, rec] : ledger_) {
      if (rec.issued && rec.cycle.end < current_) revoked_.insert(u);
    }
  }

 private:
  GroupManager(LinearAccessStructure structure, OneWayFn fn) : structure_(std::move(structure)), fn_(std::move(fn)) {}

  static void check_cycle(const LifeCycle& c, Session m) {
    if (c.start < 1 || c.start > c.end || c.end > m) {
      throw ConfigurationError("life cycle (" + std::to_string(c.start) + ", " + std::to_string(c.end) +
                               ") outside [1, " + std::to_string(m) + "]");
    }
  }

  PersonalSecret issue(UserId u, LifeCycle c) {
    PersonalSecret s{u, c, {}, {}};
    const auto& vs = structure_.phi(u);
    for (Session j = c.start; j <= c.end; ++j) {
      auto& dots = s.dots[j];
      for (const auto& w : vs) dots.push_back(dot(truth_.vector(j), w));
      s.betas.emplace(j, truth_.betas.at(j));
    }
    ledger_[u] = {c, true};
    return s;
  }

  LinearAccessStructure structure_;
  OneWayFn fn_;
  GroundTruth truth_;
  UserSet dummies_;
  std::map<UserId, MemberRecord> ledger_;
  std::map<UserId, Session> last_revealed_;
  UserSet revoked_;
  Session current_ = 1;
  bool broadcast_done_ = false;
  GmCounters counters_;
  std::vector<BroadcastRecord> log_;
};

struct RecoveryResult {
  SessionKey key;
  FieldElement chain_key;
  /// Λ·share products needed to rebuild v_j·Φ(GM). Unit and zero
  /// coefficients cost nothing.
  std::uint64_t multiplications = 0;
  std::uint64_t hash_applications = 0;
};

namespace detail {

struct ChainKeyRecovery {
  FieldElement chain_key;
  std::uint64_t multiplications = 0;
};

inline ChainKeyRecovery recover_chain_key(const PersonalSecret& secret, const BroadcastMessage& msg,
                                          const LinearAccessStructure& structure) {
  const Session j = msg.session;
  const UserSet revealed = msg.revealed_users();
  if (revealed.count(secret.user) != 0) {
    throw RecoveryFailure(to_string(secret.user) + " has its own share in B_" + std::to_string(j) +
                          "; the revealed set alone is unauthorized");
  }
  if (!secret.cycle.contains(j)) {
    throw NotAMember(to_string(secret.user) + " holds no secret for session " + std::to_string(j));
  }
  auto own = secret.dots.find(j);
  if (own == secret.dots.end()) throw NotAMember(to_string(secret.user) + " lacks its share for session " + std::to_string(j));

  std::map<UserId, const std::vector<FieldElement>*> shares{{secret.user, &own->second}};
  for (const auto& entry : msg.revealed) {
    if (!structure.contains(entry.user) || structure.phi(entry.user).size() != entry.dots.size()) {
      throw RecoveryFailure("malformed broadcast entry for " + to_string(entry.user));
    }
    shares.emplace(entry.user, &entry.dots);
  }
  if (structure.phi(secret.user).size() != own->second.size()) throw RecoveryFailure("share arity mismatch");

  UserSet group = revealed;
  group.insert(secret.user);
  Coefficients lambda;
  try {
    lambda = reconstruction_coefficients(structure, group);
  } catch (const NotAuthorized& e) {
    throw RecoveryFailure(e.what());
  }

  const PrimeField field = structure.field();
  FieldElement masked = field.zero();
  std::uint64_t mults = 0;
  for (const auto& [key, coeff] : lambda) {
    if (coeff.is_zero()) continue;
    const FieldElement& share = (*shares.at(key.first))[key.second];
    if (coeff == field.one()) {
      masked += share;
    } else {
      masked += coeff * share;
      ++mults;
    }
  }
  return {msg.z - masked, mults};
}

}  // namespace detail

/// Recovers SK_j from B_j and the member's stored secret.
inline RecoveryResult member_recover(const PersonalSecret& secret, const BroadcastMessage& msg,
                                     const LinearAccessStructure& structure) {
  const auto rec = detail::recover_chain_key(secret, msg, structure);
  const FieldElement sk = compose_session_key(secret.betas.at(msg.session), rec.chain_key);
  return {{msg.session, sk}, rec.chain_key, rec.multiplications, 0};
}

/// Recovers SK_target from a later broadcast: take K_{m-j2+1} from `later`,
/// hash forward (j2 - target) times, add the stored β_target.
inline RecoveryResult member_self_heal(const PersonalSecret& secret, const BroadcastMessage& later, Session target,
                                       const LinearAccessStructure& structure, const OneWayFn& fn) {
  const Session j2 = later.session;
  if (target > j2) {
    throw CannotHealForward("session " + std::to_string(target) + " is after broadcast " + std::to_string(j2));
  }
  if (!secret.cycle.contains(target) || secret.betas.count(target) == 0) {
    throw NotAMember(to_string(secret.user) + " has no beta for session " + std::to_string(target));
  }
  const auto rec = detail::recover_chain_key(secret, later, structure);
  const std::uint64_t steps = j2 - target;
  const FieldElement key = advance(rec.chain_key, steps, fn);
  return {{target, compose_session_key(secret.betas.at(target), key)}, key, rec.multiplications, steps};
}

/// Everything produced by one protocol run: public material, every issued
/// secret, every broadcast and the ground truth. Input to the attack harness.
struct ProtocolTrace {
  LinearAccessStructure structure;
  OneWayFn fn;
  GroundTruth truth;
  UserSet dummies;
  std::map<UserId, PersonalSecret> secrets;
  std::map<Session, BroadcastMessage> broadcasts;
  std::vector<BroadcastRecord> padding_log;
  std::optional<Session> failed_at;
  std::string failure;

  Session m() const noexcept { return truth.m; }
};

}  // namespace shkd
