#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "shkd/sim.hpp"

namespace testing_support {

using namespace shkd;

/// Three sessions over GF(7): t = 2, H(x) = x^2 + 1, S = 4, beta = (2, 0, 5).
/// U1 holds (1,3) with x = 1, U2 holds (1,1) with x = 2, U3 holds (3,3) with
/// x = 3, and one dummy takes x = 4.
inline Scenario worked_instance() {
  Scenario sc;
  sc.name = "worked-gf7";
  sc.q = 7;
  sc.kind = StructureKind::threshold;
  sc.t = 2;
  sc.m = 3;
  sc.users = {{UserId{1}, {1, 3}}, {UserId{2}, {1, 1}}, {UserId{3}, {3, 3}}};
  sc.dummies = 1;
  sc.hash_table = std::vector<std::uint64_t>{1, 2, 5, 3, 3, 5, 2};
  sc.material.chain_seed = 4;
  sc.material.betas = std::vector<std::uint64_t>{2, 0, 5};
  sc.material.vectors = std::vector<std::vector<std::uint64_t>>{{3, 2}, {1, 5}, {6, 4}};
  return sc;
}

struct RandomOptions {
  std::vector<std::uint64_t> moduli{11, 67};
  std::uint32_t max_users = 20;
  Session max_sessions = 30;
  std::uint32_t max_threshold = 5;
  bool allow_multipartite = true;
  bool allow_joins = true;
};

inline LossModel random_loss(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return LossModel::iid(0.0);
    case 1: return LossModel::iid(0.3);
    case 2: return LossModel::iid(0.7);
    default: return LossModel::burst(0.2, 0.7);
  }
}

/// Random scenario that never exceeds the revocation capacity: fewer than t
/// members ever leave before the last session.
inline Scenario random_threshold(std::mt19937_64& rng, const RandomOptions& o) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };
  Scenario sc;
  sc.q = o.moduli[rng() % o.moduli.size()];
  sc.kind = StructureKind::threshold;
  sc.t = static_cast<std::uint32_t>(pick(1, o.max_threshold));
  sc.dummies = sc.t - 1;
  sc.m = static_cast<Session>(pick(1, o.max_sessions));
  const std::uint64_t room = sc.q - 1 - sc.dummies;  // nonzero x values left
  const std::uint32_t joins = o.allow_joins ? static_cast<std::uint32_t>(pick(0, 2)) : 0;
  const std::uint32_t n =
      static_cast<std::uint32_t>(pick(1, std::min<std::uint64_t>(o.max_users, room > joins ? room - joins : 1)));
  std::uint32_t leavers = static_cast<std::uint32_t>(pick(0, sc.t - 1));
  for (std::uint32_t i = 1; i <= n; ++i) {
    Session start = static_cast<Session>(pick(1, sc.m));
    Session end = sc.m;
    if (leavers > 0 && start < sc.m) {
      end = static_cast<Session>(pick(start, sc.m - 1));
      --leavers;
    }
    sc.users.push_back({UserId{i}, {start, end}});
  }
  for (std::uint32_t k = 0; k < joins; ++k) {
    const Session s = static_cast<Session>(pick(1, sc.m));
    sc.joins.push_back({s, sc.m});
  }
  sc.loss = random_loss(rng);
  sc.seeds = {rng(), rng(), rng(), rng()};
  sc.name = "random-threshold";
  return sc;
}

/// Multipartite scenario with a dummy-only part and nobody leaving early, so
/// padding always exists.
inline Scenario random_multipartite(std::mt19937_64& rng, const RandomOptions& o) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };
  Scenario sc;
  sc.q = o.moduli[rng() % o.moduli.size()];
  sc.kind = StructureKind::multipartite;
  sc.m = static_cast<Session>(pick(1, o.max_sessions));
  const std::uint32_t parts = static_cast<std::uint32_t>(pick(2, 4));
  std::uint32_t next = 1;
  for (std::uint32_t p = 0; p < parts; ++p) {
    PartSpec part;
    part.x = p;
    const std::uint32_t size = static_cast<std::uint32_t>(pick(1, 4));
    for (std::uint32_t i = 0; i < size && next <= o.max_users; ++i) {
      const UserId u{next++};
      part.users.push_back(u);
      const Session start = static_cast<Session>(pick(1, sc.m));
      sc.users.push_back({u, {start, sc.m}});
    }
    if (part.users.empty()) part.dummies = 1;
    sc.parts.push_back(part);
  }
  sc.parts.push_back({parts, {}, 1});
  sc.loss = random_loss(rng);
  sc.seeds = {rng(), rng(), rng(), rng()};
  sc.name = "random-multipartite";
  return sc;
}

inline Scenario random_scenario(std::mt19937_64& rng, const RandomOptions& o = {}) {
  if (o.allow_multipartite && rng() % 4 == 0) return random_multipartite(rng, o);
  return random_threshold(rng, o);
}

}  // namespace testing_support
