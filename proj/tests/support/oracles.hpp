#pragma once

// Independent reference computations for tests. Nothing here calls the
// library's linear algebra; values are plain integers mod q.

#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

using Int = std::int64_t;

inline Int mod(Int a, Int q) { return ((a % q) + q) % q; }

inline Int inv(Int a, Int q) {
  // Fermat, by repeated multiplication (q is small in tests).
  Int r = 1;
  for (Int e = 0; e < q - 2; ++e) r = mod(r * a, q);
  return r;
}

/// Lagrange coefficient of x_i for interpolation at 0 over the points xs.
inline Int lagrange_at_zero(const std::vector<Int>& xs, std::size_t i, Int q) {
  Int num = 1, den = 1;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k == i) continue;
    num = mod(num * xs[k], q);
    den = mod(den * (xs[k] - xs[i]), q);
  }
  return mod(num * inv(den, q), q);
}

/// Is `goal` a linear combination of `rows` over GF(q)? Exhaustive over all
/// q^k coefficient tuples.
inline bool in_span_bruteforce(const std::vector<std::vector<Int>>& rows, const std::vector<Int>& goal, Int q) {
  const std::size_t k = rows.size();
  const std::size_t l = goal.size();
  std::vector<Int> coeff(k, 0);
  for (;;) {
    bool match = true;
    for (std::size_t c = 0; c < l && match; ++c) {
      Int acc = 0;
      for (std::size_t r = 0; r < k; ++r) acc = mod(acc + coeff[r] * rows[r][c], q);
      match = acc == mod(goal[c], q);
    }
    if (match) return true;
    std::size_t i = 0;
    for (; i < k; ++i) {
      if (++coeff[i] < q) break;
      coeff[i] = 0;
    }
    if (i == k) return false;
  }
}

/// Count of v in GF(q)^l with dot(v, rows[r]) = values[r] for all r, split by
/// dot(v, target).
inline std::vector<std::uint64_t> census(const std::vector<std::vector<Int>>& rows, const std::vector<Int>& values,
                                         const std::vector<Int>& target, Int q) {
  const std::size_t l = target.size();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(q), 0);
  std::vector<Int> v(l, 0);
  for (;;) {
    bool ok = true;
    for (std::size_t r = 0; r < rows.size() && ok; ++r) {
      Int acc = 0;
      for (std::size_t c = 0; c < l; ++c) acc = mod(acc + v[c] * rows[r][c], q);
      ok = acc == values[r];
    }
    if (ok) {
      Int t = 0;
      for (std::size_t c = 0; c < l; ++c) t = mod(t + v[c] * target[c], q);
      ++counts[static_cast<std::size_t>(t)];
    }
    std::size_t i = 0;
    for (; i < l; ++i) {
      if (++v[i] < q) break;
      v[i] = 0;
    }
    if (i == l) return counts;
  }
}

/// Reference evaluations of the comparison table, written out longhand.
struct OverheadOracle {
  Int m, q, t, j, k, T;
  Int w() const {
    Int bits = 0;
    while ((Int{1} << bits) < q) ++bits;
    return bits;
  }
};

}  // namespace oracle
