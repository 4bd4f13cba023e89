#pragma once

// Linear secret-sharing access structures. Each user is mapped to a list of
// public vectors; a set of users is authorized exactly when the group
// manager's vector lies in the span of the union of their vectors.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "shkd/error.hpp"
#include "shkd/gf.hpp"

namespace shkd {

using Session = std::uint32_t;

/// User identity. Dummy users live in a reserved range above every real id.
struct UserId {
  static constexpr std::uint32_t kDummyBase = 0x4000'0000;

  std::uint32_t value = 0;

  static constexpr UserId dummy(std::uint32_t index) { return UserId{kDummyBase + index}; }
  constexpr bool in_dummy_range() const { return value >= kDummyBase; }

  friend constexpr auto operator<=>(const UserId&, const UserId&) = default;
};

inline std::string to_string(UserId id) {
  if (id.in_dummy_range()) return "D" + std::to_string(id.value - UserId::kDummyBase);
  return "U" + std::to_string(id.value);
}

using UserSet = std::set<UserId>;

inline std::string to_string(const UserSet& users) {
  std::string out = "{";
  for (auto it = users.begin(); it != users.end(); ++it) {
    if (it != users.begin()) out += ' ';
    out += to_string(*it);
  }
  return out + "}";
}

enum class StructureKind { threshold, multipartite, generic };

/// Bipartite structure over classes X and Y: A is authorized iff
/// |A∩X| >= t, or |A∩X| + |A∩Y| >= j+1 with |A∩Y| >= 1.
struct BipartiteDescriptor {
  UserSet x_class;
  UserSet y_class;
  std::size_t t = 0;
  std::size_t j = 0;

  bool authorizes(std::size_t x, std::size_t y) const { return x >= t || (x + y >= j + 1 && y >= 1); }

  /// Points (|A∩X|, |A∩Y|) of the maximal unauthorized sets:
  /// (t-1, 0), (j-1, 1), (j-2, 2), ..., (0, j).
  std::vector<std::pair<std::size_t, std::size_t>> maximal_points() const {
    std::vector<std::pair<std::size_t, std::size_t>> points{{t - 1, 0}};
    for (std::size_t y = 1; y <= j; ++y) points.emplace_back(j - y, y);
    return points;
  }

  std::pair<std::size_t, std::size_t> point_of(const UserSet& users) const {
    std::size_t x = 0, y = 0;
    for (UserId u : users) {
      if (x_class.count(u) != 0) ++x;
      if (y_class.count(u) != 0) ++y;
    }
    return {x, y};
  }
};

class LinearAccessStructure {
 public:
  const PrimeField& field() const noexcept { return field_; }
  std::size_t dimension() const noexcept { return gm_vector_.size(); }
  const FieldVector& gm_vector() const noexcept { return gm_vector_; }
  StructureKind kind() const noexcept { return kind_; }

  /// Threshold t; zero unless kind() == threshold.
  std::size_t threshold() const noexcept { return threshold_; }
  const std::vector<UserSet>& parts() const noexcept { return parts_; }
  const std::vector<UserSet>& maximal_unauthorized() const noexcept { return max_unauth_; }
  const std::optional<BipartiteDescriptor>& bipartite() const noexcept { return bipartite_; }

  const std::map<UserId, std::vector<FieldVector>>& phi() const noexcept { return phi_; }

  const std::vector<FieldVector>& phi(UserId u) const {
    auto it = phi_.find(u);
    if (it == phi_.end()) throw ContractViolation("unknown user " + to_string(u));
    return it->second;
  }

  bool contains(UserId u) const { return phi_.count(u) != 0; }

  UserSet users() const {
    UserSet out;
    for (const auto& [u, _] : phi_) out.insert(u);
    return out;
  }

  std::size_t max_vectors_per_user() const {
    std::size_t n = 0;
    for (const auto& [_, vs] : phi_) n = std::max(n, vs.size());
    return n;
  }

  /// Evaluation point of a threshold user.
  std::optional<FieldElement> x_coordinate(UserId u) const {
    if (kind_ != StructureKind::threshold) return std::nullopt;
    phi(u);
    return field_(xs_.at(u));
  }

 private:
  explicit LinearAccessStructure(PrimeField field) : field_(field) {}

  friend LinearAccessStructure make_threshold(std::size_t, const std::map<UserId, std::uint64_t>&,
                                              const PrimeField&);
  friend LinearAccessStructure make_multipartite(const std::vector<UserSet>&, const std::vector<std::uint64_t>&,
                                                 const PrimeField&);
  friend LinearAccessStructure make_generic(std::map<UserId, std::vector<FieldVector>>, FieldVector,
                                            std::vector<UserSet>);
  friend LinearAccessStructure make_generic(std::map<UserId, std::vector<FieldVector>>, FieldVector,
                                            BipartiteDescriptor);
  friend LinearAccessStructure extend_threshold(const LinearAccessStructure&, UserId, std::uint64_t);

  PrimeField field_;
  std::map<UserId, std::vector<FieldVector>> phi_;
  FieldVector gm_vector_;
  StructureKind kind_ = StructureKind::generic;
  std::size_t threshold_ = 0;
  std::map<UserId, std::uint64_t> xs_;
  std::vector<UserSet> parts_;
  std::vector<UserSet> max_unauth_;
  std::optional<BipartiteDescriptor> bipartite_;
};

/// Vectors of all users in `users`, in (user, index) order.
inline std::vector<FieldVector> stacked_vectors(const LinearAccessStructure& s, const UserSet& users) {
  std::vector<FieldVector> out;
  for (UserId u : users) {
    const auto& vs = s.phi(u);
    out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

inline bool is_authorized(const LinearAccessStructure& s, const UserSet& users) {
  if (users.empty()) return false;
  const auto vectors = stacked_vectors(s, users);
  return solve_combination(vectors, s.gm_vector()).has_value();
}

/// Shamir's scheme as a vector space structure: phi(u) = (1, x_u, ..., x_u^{t-1})
/// and the group manager holds (1, 0, ..., 0).
inline LinearAccessStructure make_threshold(std::size_t t, const std::map<UserId, std::uint64_t>& user_xs,
                                            const PrimeField& field) {
  if (t < 1) throw ConfigurationError("threshold must be >= 1");
  if (field.modulus() <= user_xs.size()) {
    throw ConfigurationError("q = " + std::to_string(field.modulus()) + " must exceed the user count " +
                             std::to_string(user_xs.size()));
  }
  std::set<std::uint64_t> seen;
  LinearAccessStructure s(field);
  for (const auto& [user, x] : user_xs) {
    if (x == 0 || x >= field.modulus()) {
      throw ConfigurationError("x-coordinate of " + to_string(user) + " must be a nonzero element of GF(q)");
    }
    if (!seen.insert(x).second) throw ConfigurationError("duplicate x-coordinate " + std::to_string(x));
    std::vector<FieldElement> row;
    FieldElement power = field.one();
    for (std::size_t k = 0; k < t; ++k) {
      row.push_back(power);
      power *= field(x);
    }
    s.phi_[user] = {FieldVector(std::move(row))};
    s.xs_[user] = x;
  }
  s.gm_vector_ = FieldVector::unit(field, t, 0);
  s.kind_ = StructureKind::threshold;
  s.threshold_ = t;
  return s;
}

/// Adds one user with evaluation point `x` to a threshold structure.
inline LinearAccessStructure extend_threshold(const LinearAccessStructure& base, UserId user, std::uint64_t x) {
  if (base.kind() != StructureKind::threshold) throw ConfigurationError("only threshold structures extend");
  if (base.contains(user)) throw ConfigurationError("user " + to_string(user) + " already present");
  std::map<UserId, std::uint64_t> xs;
  for (const auto& [u, _] : base.phi()) xs[u] = base.x_coordinate(u)->value();
  xs[user] = x;
  return make_threshold(base.threshold(), xs, base.field());
}

/// Complete multipartite structure: phi(u) = (x_i, 1) for u in part i and the
/// group manager holds (1, 0). Two users from different parts are authorized.
inline LinearAccessStructure make_multipartite(const std::vector<UserSet>& parts,
                                               const std::vector<std::uint64_t>& part_xs, const PrimeField& field) {
  if (parts.size() < 2) throw ConfigurationError("multipartite structures need at least two parts");
  if (parts.size() != part_xs.size()) throw ConfigurationError("one x-coordinate per part is required");
  if (field.modulus() < parts.size()) throw ConfigurationError("q must be at least the number of parts");
  std::set<std::uint64_t> seen;
  LinearAccessStructure s(field);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigurationError("part " + std::to_string(i) + " is empty");
    if (part_xs[i] >= field.modulus()) throw ConfigurationError("part x-coordinate outside GF(q)");
    if (!seen.insert(part_xs[i]).second) throw ConfigurationError("duplicate part x-coordinate");
    for (UserId u : parts[i]) {
      if (s.phi_.count(u) != 0) throw ConfigurationError("parts overlap at " + to_string(u));
      s.phi_[u] = {FieldVector(field, {part_xs[i], 1})};
    }
  }
  s.gm_vector_ = FieldVector(field, {1, 0});
  s.kind_ = StructureKind::multipartite;
  s.parts_ = parts;
  return s;
}

namespace detail {

inline PrimeField check_phi(const std::map<UserId, std::vector<FieldVector>>& phi, const FieldVector& gm) {
  if (gm.size() == 0) throw ConfigurationError("group manager vector is empty");
  if (gm.is_zero()) throw ConfigurationError("group manager vector must be nonzero");
  if (phi.empty()) throw ConfigurationError("structure has no users");
  for (const auto& [u, vs] : phi) {
    if (vs.empty()) throw ConfigurationError(to_string(u) + " has no vectors");
    for (const auto& v : vs) {
      if (v.size() != gm.size() || v.modulus() != gm.modulus()) {
        throw ConfigurationError(to_string(u) + " has a vector of the wrong shape");
      }
    }
  }
  return PrimeField::of(gm[0]);
}

}  // namespace detail

/// Arbitrary linear scheme with caller-supplied maximal unauthorized sets.
/// Each supplied set must be unauthorized and become authorized when any
/// outside user joins it.
inline LinearAccessStructure make_generic(std::map<UserId, std::vector<FieldVector>> phi, FieldVector gm_vector,
                                          std::vector<UserSet> max_unauth_sets) {
  LinearAccessStructure s(detail::check_phi(phi, gm_vector));
  s.phi_ = std::move(phi);
  s.gm_vector_ = std::move(gm_vector);
  s.kind_ = StructureKind::generic;
  const UserSet all = s.users();
  for (const auto& set : max_unauth_sets) {
    for (UserId u : set) {
      if (!s.contains(u)) throw ConfigurationError("maximal set names unknown user " + to_string(u));
    }
    if (is_authorized(s, set)) throw ConfigurationError("listed maximal set " + to_string(set) + " is authorized");
    for (UserId u : all) {
      if (set.count(u) != 0) continue;
      UserSet grown = set;
      grown.insert(u);
      if (!is_authorized(s, grown)) {
        throw ConfigurationError("listed set " + to_string(set) + " is not maximal: " + to_string(u) +
                                 " can be added");
      }
    }
  }
  s.max_unauth_ = std::move(max_unauth_sets);
  return s;
}

/// Linear scheme whose padding follows a bipartite descriptor. The vectors
/// must realize the descriptor: checked on every subset when there are at
/// most 12 users, otherwise on 4096 seeded random subsets.
inline LinearAccessStructure make_generic(std::map<UserId, std::vector<FieldVector>> phi, FieldVector gm_vector,
                                          BipartiteDescriptor descriptor) {
  LinearAccessStructure s(detail::check_phi(phi, gm_vector));
  s.phi_ = std::move(phi);
  s.gm_vector_ = std::move(gm_vector);
  s.kind_ = StructureKind::generic;

  if (descriptor.t < 2 || descriptor.j < 1 || descriptor.j > descriptor.t - 1) {
    throw ConfigurationError("bipartite descriptor needs 1 <= j <= t-1");
  }
  UserSet classes;
  for (UserId u : descriptor.x_class) classes.insert(u);
  for (UserId u : descriptor.y_class) {
    if (!classes.insert(u).second) throw ConfigurationError("bipartite classes overlap at " + to_string(u));
  }
  if (classes != s.users()) throw ConfigurationError("bipartite classes must partition the users");

  const std::vector<UserId> users(classes.begin(), classes.end());
  auto check = [&](std::uint64_t mask) {
    UserSet subset;
    for (std::size_t i = 0; i < users.size(); ++i) {
      if ((mask >> i) & 1U) subset.insert(users[i]);
    }
    const auto [x, y] = descriptor.point_of(subset);
    if (is_authorized(s, subset) != descriptor.authorizes(x, y)) {
      throw ConfigurationError("vectors disagree with bipartite descriptor on " + to_string(subset));
    }
  };
  if (users.size() <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << users.size()); ++mask) check(mask);
  } else {
    std::mt19937_64 rng(0x5EED);
    const std::uint64_t limit = users.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << users.size()) - 1;
    for (int i = 0; i < 4096; ++i) check(rng() & limit);
  }
  s.bipartite_ = std::move(descriptor);
  return s;
}

/// Shares of the master vector `v` for one session.
struct ShareSet {
  Session session = 0;
  std::map<UserId, std::vector<FieldElement>> entries;
};

inline ShareSet compute_shares(const LinearAccessStructure& s, const FieldVector& v, Session session,
                               const std::optional<UserSet>& only = std::nullopt) {
  if (v.size() != s.dimension()) throw ContractViolation("master vector has the wrong length");
  ShareSet out{session, {}};
  for (const auto& [u, vs] : s.phi()) {
    if (only && only->count(u) == 0) continue;
    auto& entry = out.entries[u];
    for (const auto& w : vs) entry.push_back(dot(v, w));
  }
  return out;
}

/// Key: (user, index into phi(user)).
using Coefficients = std::map<std::pair<UserId, std::size_t>, FieldElement>;

/// Λ with Σ Λ_{k,r}·phi(U_k)[r] = gm_vector.
inline Coefficients reconstruction_coefficients(const LinearAccessStructure& s, const UserSet& users) {
  std::vector<std::pair<UserId, std::size_t>> labels;
  for (UserId u : users) {
    for (std::size_t r = 0; r < s.phi(u).size(); ++r) labels.emplace_back(u, r);
  }
  const auto vectors = stacked_vectors(s, users);
  auto lambda = solve_combination(vectors, s.gm_vector());
  if (!lambda) throw NotAuthorized(to_string(users) + " cannot reconstruct");
  Coefficients out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace(labels[i], (*lambda)[i]);
  return out;
}

namespace detail {

// Orders candidate padding sets: fewest additions, then fewest dummies, then
// lowest ids.
struct PaddingRank {
  std::size_t size;
  std::size_t dummies;
  std::vector<UserId> ids;
  friend auto operator<=>(const PaddingRank&, const PaddingRank&) = default;
};

inline PaddingRank padding_rank(const UserSet& addition, const UserSet& dummies) {
  std::size_t d = 0;
  for (UserId u : addition) d += dummies.count(u);
  return {addition.size(), d, {addition.begin(), addition.end()}};
}

}  // namespace detail

/// Picks W, disjoint from `active`, such that W ∪ revoked is a maximal
/// unauthorized set with |W| minimal. Ties go to real users before dummies
/// and then to ascending ids, so the choice is deterministic.
inline UserSet select_padding(const LinearAccessStructure& s, const UserSet& revoked, const UserSet& active,
                              const UserSet& dummies) {
  for (const UserSet* group : {&revoked, &active, &dummies}) {
    for (UserId u : *group) {
      if (!s.contains(u)) throw ContractViolation("unknown user " + to_string(u));
    }
  }
  for (UserId u : revoked) {
    if (active.count(u) != 0) throw ContractViolation(to_string(u) + " is both revoked and active");
  }
  for (UserId u : dummies) {
    if (active.count(u) != 0) throw ContractViolation("dummy " + to_string(u) + " cannot be active");
  }
  if (is_authorized(s, revoked)) {
    throw RevocationCapacityError("revoked set " + to_string(revoked) + " is authorized");
  }

  // Candidate pool: inactive real users first, then dummies, each ascending.
  std::vector<UserId> pool;
  for (UserId u : s.users()) {
    if (active.count(u) == 0 && revoked.count(u) == 0 && dummies.count(u) == 0) pool.push_back(u);
  }
  for (UserId u : dummies) {
    if (revoked.count(u) == 0) pool.push_back(u);
  }
  const UserSet pool_set(pool.begin(), pool.end());
  auto available = [&](const UserSet& need) {
    return std::all_of(need.begin(), need.end(), [&](UserId u) { return pool_set.count(u) != 0; });
  };

  switch (s.kind()) {
    case StructureKind::threshold: {
      const std::size_t need = s.threshold() - 1 - revoked.size();
      if (pool.size() < need) {
        throw PaddingExhausted("need " + std::to_string(need) + " padding users, have " + std::to_string(pool.size()));
      }
      return UserSet(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(need));
    }
    case StructureKind::multipartite: {
      std::optional<std::pair<detail::PaddingRank, UserSet>> best;
      for (const auto& part : s.parts()) {
        if (!std::includes(part.begin(), part.end(), revoked.begin(), revoked.end())) continue;
        UserSet need;
        std::set_difference(part.begin(), part.end(), revoked.begin(), revoked.end(),
                            std::inserter(need, need.end()));
        if (!available(need)) continue;
        auto rank = detail::padding_rank(need, dummies);
        if (!best || rank < best->first) best.emplace(std::move(rank), std::move(need));
      }
      if (!best) throw PaddingExhausted("no part can be completed from inactive users");
      return best->second;
    }
    case StructureKind::generic: {
      if (s.bipartite()) {
        const auto& bp = *s.bipartite();
        const auto [rx, ry] = bp.point_of(revoked);
        std::vector<UserId> pool_x, pool_y;
        for (UserId u : pool) (bp.x_class.count(u) != 0 ? pool_x : pool_y).push_back(u);
        std::optional<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> best;
        for (const auto& [px, py] : bp.maximal_points()) {
          if (px < rx || py < ry) continue;
          if (px - rx > pool_x.size() || py - ry > pool_y.size()) continue;
          const std::size_t cost = (px - rx) + (py - ry);
          if (!best || cost < best->first) best.emplace(cost, std::make_pair(px - rx, py - ry));
        }
        if (!best) throw PaddingExhausted("no maximal bipartite point reachable from " + to_string(revoked));
        UserSet out(pool_x.begin(), pool_x.begin() + static_cast<std::ptrdiff_t>(best->second.first));
        out.insert(pool_y.begin(), pool_y.begin() + static_cast<std::ptrdiff_t>(best->second.second));
        return out;
      }
      std::optional<std::pair<detail::PaddingRank, UserSet>> best;
      for (const auto& set : s.maximal_unauthorized()) {
        if (!std::includes(set.begin(), set.end(), revoked.begin(), revoked.end())) continue;
        UserSet need;
        std::set_difference(set.begin(), set.end(), revoked.begin(), revoked.end(),
                            std::inserter(need, need.end()));
        if (!available(need)) continue;
        auto rank = detail::padding_rank(need, dummies);
        if (!best || rank < best->first) best.emplace(std::move(rank), std::move(need));
      }
      if (!best) throw PaddingExhausted("no listed maximal set extends " + to_string(revoked));
      return best->second;
    }
  }
  throw std::logic_error("unhandled structure kind");
}

}  // namespace shkd
