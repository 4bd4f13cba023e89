#pragma once

// Prime-field arithmetic GF(q) and the small amount of linear algebra that
// vector-space secret sharing needs.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shkd/error.hpp"

namespace shkd {

namespace detail {

__extension__ using u128 = unsigned __int128;
__extension__ using i128 = __int128;

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % q);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t q) {
  std::uint64_t result = 1 % q;
  base %= q;
  while (exp != 0) {
    if (exp & 1U) result = mul_mod(result, base, q);
    base = mul_mod(base, base, q);
    exp >>= 1U;
  }
  return result;
}

// Deterministic Miller-Rabin; this base set is exact for all n < 2^64.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  constexpr std::array<std::uint64_t, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (std::uint64_t p : bases) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  for (std::uint64_t a : bases) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace detail

class PrimeField;

/// Canonical representative of a residue class modulo a prime q.
/// Elements are only minted by PrimeField (or by arithmetic on existing
/// elements), so `value() < modulus()` always holds.
class FieldElement {
 public:
  /// Unbound element; any arithmetic with it is a contract violation.
  FieldElement() = default;

  std::uint64_t value() const noexcept { return value_; }
  std::uint64_t modulus() const noexcept { return modulus_; }
  bool is_zero() const noexcept { return value_ == 0; }

  friend bool operator==(const FieldElement&, const FieldElement&) = default;

  friend FieldElement operator+(FieldElement a, FieldElement b) {
    const std::uint64_t q = common_modulus(a, b);
    std::uint64_t s = a.value_ + b.value_;  // q < 2^63, no overflow
    if (s >= q) s -= q;
    return {s, q};
  }
  friend FieldElement operator-(FieldElement a, FieldElement b) {
    const std::uint64_t q = common_modulus(a, b);
    return {a.value_ >= b.value_ ? a.value_ - b.value_ : a.value_ + q - b.value_, q};
  }
  friend FieldElement operator*(FieldElement a, FieldElement b) {
    const std::uint64_t q = common_modulus(a, b);
    return {detail::mul_mod(a.value_, b.value_, q), q};
  }
  FieldElement operator-() const {
    check_bound(*this);
    return {value_ == 0 ? 0 : modulus_ - value_, modulus_};
  }
  FieldElement& operator+=(FieldElement o) { return *this = *this + o; }
  FieldElement& operator-=(FieldElement o) { return *this = *this - o; }
  FieldElement& operator*=(FieldElement o) { return *this = *this * o; }

  /// Multiplicative inverse via the extended Euclidean algorithm.
  FieldElement inverse() const {
    check_bound(*this);
    if (value_ == 0) throw DivisionByZero("inverse of zero in GF(" + std::to_string(modulus_) + ")");
    // Signed 128-bit keeps the Bezout coefficients in range for q < 2^63.
    detail::i128 r0 = modulus_, r1 = value_;
    detail::i128 s0 = 0, s1 = 1;
    while (r1 != 0) {
      const detail::i128 quotient = r0 / r1;
      r0 = std::exchange(r1, r0 - quotient * r1);
      s0 = std::exchange(s1, s0 - quotient * s1);
    }
    detail::i128 inv = s0 % static_cast<detail::i128>(modulus_);
    if (inv < 0) inv += modulus_;
    return {static_cast<std::uint64_t>(inv), modulus_};
  }

  FieldElement pow(std::uint64_t exp) const {
    check_bound(*this);
    return {detail::pow_mod(value_, exp, modulus_), modulus_};
  }

 private:
  friend class PrimeField;
  FieldElement(std::uint64_t value, std::uint64_t modulus) : value_(value), modulus_(modulus) {}

  static void check_bound(const FieldElement& a) {
    if (a.modulus_ == 0) throw ContractViolation("arithmetic on an unbound field element");
  }
  static std::uint64_t common_modulus(const FieldElement& a, const FieldElement& b) {
    check_bound(a);
    check_bound(b);
    if (a.modulus_ != b.modulus_) {
      throw ContractViolation("modulus mismatch: " + std::to_string(a.modulus_) + " vs " +
                              std::to_string(b.modulus_));
    }
    return a.modulus_;
  }

  std::uint64_t value_ = 0;
  std::uint64_t modulus_ = 0;
};

/// The field context GF(q). Construction validates that q is a prime below
/// 2^63 so that sums never overflow and products fit in 128 bits.
class PrimeField {
 public:
  static constexpr std::uint64_t kMaxModulus = std::uint64_t{1} << 63;

  explicit PrimeField(std::uint64_t q) : q_(q) {
    if (q >= kMaxModulus) throw ConfigurationError("modulus " + std::to_string(q) + " exceeds 2^63");
    if (!detail::is_prime(q)) throw ConfigurationError("modulus " + std::to_string(q) + " is not prime");
  }

  /// The field an existing element belongs to. Skips the primality test:
  /// the element's modulus was validated when its field was created.
  static PrimeField of(const FieldElement& e) {
    if (e.modulus() == 0) throw ContractViolation("unbound field element has no field");
    return PrimeField(e.modulus(), Trusted{});
  }

  std::uint64_t modulus() const noexcept { return q_; }

  /// ceil(log2 q): the bit width of one serialized element.
  unsigned element_bits() const noexcept { return static_cast<unsigned>(std::bit_width(q_ - 1)); }
  unsigned element_bytes() const noexcept { return (element_bits() + 7) / 8; }

  /// Reduces `v` modulo q.
  FieldElement operator()(std::uint64_t v) const { return {v % q_, q_}; }
  FieldElement zero() const { return {0, q_}; }
  FieldElement one() const { return {1, q_}; }

  bool contains(const FieldElement& e) const noexcept { return e.modulus() == q_; }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  struct Trusted {};
  PrimeField(std::uint64_t q, Trusted) : q_(q) {}

  std::uint64_t q_;
};

/// Ordered tuple of elements of one field; never empty.
class FieldVector {
 public:
  FieldVector() = default;

  explicit FieldVector(std::vector<FieldElement> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw ContractViolation("field vectors have length >= 1");
    const std::uint64_t q = elements_.front().modulus();
    if (q == 0) throw ContractViolation("unbound element in field vector");
    for (const auto& e : elements_) {
      if (e.modulus() != q) throw ContractViolation("field vector mixes moduli");
    }
  }

  FieldVector(const PrimeField& field, std::initializer_list<std::uint64_t> values)
      : FieldVector(lift(field, std::span<const std::uint64_t>(values.begin(), values.size()))) {}

  FieldVector(const PrimeField& field, std::span<const std::uint64_t> values)
      : FieldVector(lift(field, values)) {}

  static FieldVector zeros(const PrimeField& field, std::size_t length) {
    return FieldVector(std::vector<FieldElement>(length, field.zero()));
  }

  /// e_index: the unit vector with a one at `index`.
  static FieldVector unit(const PrimeField& field, std::size_t length, std::size_t index) {
    std::vector<FieldElement> e(length, field.zero());
    e.at(index) = field.one();
    return FieldVector(std::move(e));
  }

  std::size_t size() const noexcept { return elements_.size(); }
  std::uint64_t modulus() const noexcept { return elements_.empty() ? 0 : elements_.front().modulus(); }
  const FieldElement& operator[](std::size_t i) const { return elements_[i]; }
  const FieldElement& at(std::size_t i) const { return elements_.at(i); }
  auto begin() const noexcept { return elements_.begin(); }
  auto end() const noexcept { return elements_.end(); }
  const std::vector<FieldElement>& elements() const noexcept { return elements_; }

  bool is_zero() const {
    return std::all_of(elements_.begin(), elements_.end(), [](const FieldElement& e) { return e.is_zero(); });
  }

  friend bool operator==(const FieldVector&, const FieldVector&) = default;

  friend FieldVector operator+(const FieldVector& u, const FieldVector& v) {
    check_compatible(u, v);
    std::vector<FieldElement> out;
    out.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out.push_back(u[i] + v[i]);
    return FieldVector(std::move(out));
  }

  friend FieldVector operator*(FieldElement scalar, const FieldVector& v) {
    std::vector<FieldElement> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(scalar * e);
    return FieldVector(std::move(out));
  }

  static void check_compatible(const FieldVector& u, const FieldVector& v) {
    if (u.size() != v.size()) {
      throw ContractViolation("vector length mismatch: " + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()));
    }
    if (u.modulus() != v.modulus()) throw ContractViolation("vector modulus mismatch");
  }

 private:
  static std::vector<FieldElement> lift(const PrimeField& field, std::span<const std::uint64_t> values) {
    std::vector<FieldElement> out;
    out.reserve(values.size());
    for (std::uint64_t v : values) out.push_back(field(v));
    return out;
  }

  std::vector<FieldElement> elements_;
};

/// Inner product modulo q.
inline FieldElement dot(const FieldVector& u, const FieldVector& v) {
  FieldVector::check_compatible(u, v);
  FieldElement acc = u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

namespace detail {

// Row-reduces `rows` in place (each row has `cols` entries) over GF(q) and
// returns the pivot column of each leading row. Pivot choice is the first
// row with a nonzero entry in the column.
inline std::vector<std::size_t> row_reduce(std::vector<std::vector<std::uint64_t>>& rows, std::size_t cols,
                                           std::uint64_t q) {
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t p = rank;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[rank], rows[p]);
    auto& pivot = rows[rank];
    const std::uint64_t inv = pow_mod(pivot[c], q - 2, q);
    for (auto& x : pivot) x = mul_mod(x, inv, q);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][c] == 0) continue;
      const std::uint64_t factor = rows[r][c];
      for (std::size_t k = c; k < pivot.size(); ++k) {
        const std::uint64_t sub = mul_mod(factor, pivot[k], q);
        rows[r][k] = rows[r][k] >= sub ? rows[r][k] - sub : rows[r][k] + q - sub;
      }
    }
    pivots.push_back(c);
    ++rank;
  }
  return pivots;
}

}  // namespace detail

/// Rank of a family of vectors of common length.
inline std::size_t rank(std::span<const FieldVector> vectors) {
  if (vectors.empty()) return 0;
  const std::uint64_t q = vectors.front().modulus();
  const std::size_t len = vectors.front().size();
  std::vector<std::vector<std::uint64_t>> rows;
  for (const auto& v : vectors) {
    FieldVector::check_compatible(vectors.front(), v);
    std::vector<std::uint64_t> row;
    for (const auto& e : v) row.push_back(e.value());
    rows.push_back(std::move(row));
  }
  return detail::row_reduce(rows, len, q).size();
}

/// Finds coefficients Λ with Σ Λ_k·targets_k = goal, or nullopt if goal is
/// outside the span. Free variables are fixed to zero, so the answer is
/// deterministic when the combination is not unique.
inline std::optional<std::vector<FieldElement>> solve_combination(std::span<const FieldVector> targets,
                                                                   const FieldVector& goal) {
  const std::uint64_t q = goal.modulus();
  if (q == 0) throw ContractViolation("goal vector is unbound");
  for (const auto& t : targets) FieldVector::check_compatible(t, goal);
  const PrimeField field = PrimeField::of(goal[0]);

  if (targets.empty()) {
    if (goal.is_zero()) return std::vector<FieldElement>{};
    return std::nullopt;
  }

  // Augmented system: one row per coordinate, one column per target, plus goal.
  const std::size_t k = targets.size();
  std::vector<std::vector<std::uint64_t>> rows(goal.size(), std::vector<std::uint64_t>(k + 1));
  for (std::size_t i = 0; i < goal.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) rows[i][c] = targets[c][i].value();
    rows[i][k] = goal[i].value();
  }
  const auto pivots = detail::row_reduce(rows, k, q);
  for (std::size_t r = pivots.size(); r < rows.size(); ++r) {
    if (rows[r][k] != 0) return std::nullopt;
  }

  std::vector<FieldElement> lambda(k, field.zero());
  for (std::size_t r = 0; r < pivots.size(); ++r) lambda[pivots[r]] = field(rows[r][k]);

  FieldVector recombined = lambda[0] * targets[0];
  for (std::size_t c = 1; c < k; ++c) recombined = recombined + lambda[c] * targets[c];
  if (recombined != goal) throw std::logic_error("solve_combination: recombination check failed");
  return lambda;
}

}  // namespace shkd
