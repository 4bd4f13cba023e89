#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shkd/access.hpp"
#include "shkd/error.hpp"
#include "shkd/gf.hpp"

namespace shkd {

/// Membership window [start, end]. Single-session windows are allowed.
struct LifeCycle {
  Session start = 1;
  Session end = 1;

  Session length() const noexcept { return end - start + 1; }
  bool contains(Session j) const noexcept { return start <= j && j <= end; }

  friend bool operator==(const LifeCycle&, const LifeCycle&) = default;
};

/// What one member stores for its whole life cycle: its shares of every
/// session vector in the window and the matching blinders.
struct PersonalSecret {
  UserId user;
  LifeCycle cycle;
  std::map<Session, std::vector<FieldElement>> dots;
  std::map<Session, FieldElement> betas;

  std::size_t element_count() const {
    std::size_t n = betas.size();
    for (const auto& [_, d] : dots) n += d.size();
    return n;
  }

  friend bool operator==(const PersonalSecret&, const PersonalSecret&) = default;
};

struct RevealedShare {
  UserId user;
  std::vector<FieldElement> dots;

  friend bool operator==(const RevealedShare&, const RevealedShare&) = default;
};

/// B_j: shares of the padding and revoked users plus the masked chain key
/// Z_j = K_{m-j+1} + v_j·Φ(GM).
struct BroadcastMessage {
  Session session = 0;
  std::vector<RevealedShare> revealed;
  FieldElement z;

  UserSet revealed_users() const {
    UserSet out;
    for (const auto& r : revealed) out.insert(r.user);
    return out;
  }

  friend bool operator==(const BroadcastMessage&, const BroadcastMessage&) = default;
};

}  // namespace shkd
