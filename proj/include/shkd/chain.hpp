#pragma once

// Backward one-way key chain, per-session blinders β_j and session-key
// composition.
//
// Standard one-way function: SHA-256 over 0x4B || be64(x). The digest is read
// as four big-endian 64-bit windows; the first window w with w >= 2^64 mod q
// yields w mod q. If all four are rejected the digest is hashed again.
//
// Seeded streams: key = SHA-256("shkd/" || label || 0x00 || seed), then the
// ChaCha20-IETF keystream (zero nonce) is consumed as big-endian 64-bit
// words. Field samples use the same rejection rule as the hash.

#include <sodium.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shkd/access.hpp"
#include "shkd/error.hpp"
#include "shkd/gf.hpp"

namespace shkd {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium failed to initialize");
}

using Digest = std::array<std::uint8_t, crypto_hash_sha256_BYTES>;

inline Digest sha256(std::span<const std::uint8_t> data) {
  ensure_sodium();
  Digest out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

inline std::uint64_t load_be64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8U) | p[i];
  return v;
}

inline void store_be64(std::uint64_t v, std::uint8_t* p) {
  for (int i = 7; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v & 0xFFU);
    v >>= 8U;
  }
}

// 2^64 mod q; 64-bit words below this value are rejected to remove bias.
inline std::uint64_t rejection_floor(std::uint64_t q) { return (0 - q) % q; }

}  // namespace detail

/// Big-endian 8-byte encoding of an integer seed.
inline Bytes seed_bytes(std::uint64_t seed) {
  Bytes out(8);
  detail::store_be64(seed, out.data());
  return out;
}

/// Deterministic cryptographically secure stream, one per (label, seed).
class SeededStream {
 public:
  SeededStream(std::string_view label, std::span<const std::uint8_t> seed) {
    Bytes material;
    const std::string_view prefix = "shkd/";
    material.insert(material.end(), prefix.begin(), prefix.end());
    material.insert(material.end(), label.begin(), label.end());
    material.push_back(0);
    material.insert(material.end(), seed.begin(), seed.end());
    const auto digest = detail::sha256(material);
    std::copy(digest.begin(), digest.end(), key_.begin());
  }

  std::uint64_t next_u64() {
    if (offset_ == buffer_.size()) refill();
    const std::uint64_t v = detail::load_be64(buffer_.data() + offset_);
    offset_ += 8;
    return v;
  }

  FieldElement uniform(const PrimeField& field) {
    const std::uint64_t q = field.modulus();
    const std::uint64_t floor = detail::rejection_floor(q);
    for (;;) {
      const std::uint64_t w = next_u64();
      if (w >= floor) return field(w % q);
    }
  }

  FieldVector uniform_vector(const PrimeField& field, std::size_t length) {
    std::vector<FieldElement> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.push_back(uniform(field));
    return FieldVector(std::move(out));
  }

 private:
  static constexpr std::size_t kBlocks = 16;

  void refill() {
    static constexpr std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
    const std::array<std::uint8_t, 64 * kBlocks> zeros{};
    crypto_stream_chacha20_ietf_xor_ic(buffer_.data(), zeros.data(), zeros.size(), nonce.data(), counter_,
                                       key_.data());
    counter_ += kBlocks;
    offset_ = 0;
  }

  std::array<std::uint8_t, crypto_stream_chacha20_ietf_KEYBYTES> key_{};
  std::array<std::uint8_t, 64 * kBlocks> buffer_{};
  std::size_t offset_ = 64 * kBlocks;
  std::uint32_t counter_ = 0;
};

/// Deterministic map GF(q) -> GF(q) used to build the key chain. Evaluation
/// is const and reentrant.
class OneWayFn {
 public:
  static constexpr std::string_view kStandardName = "standard-hash-mod-q";
  static constexpr std::string_view kTableName = "test-table";

  /// SHA-256 based function (see the header comment for the exact encoding).
  static OneWayFn standard(const PrimeField& field) { return OneWayFn(field, nullptr); }

  /// Lookup table over GF(q): x maps to values[x]. Intended for tiny fields
  /// where tests enumerate everything.
  static OneWayFn table(const PrimeField& field, std::vector<std::uint64_t> values) {
    if (values.size() != field.modulus()) throw ConfigurationError("hash table must have exactly q entries");
    for (auto& v : values) {
      if (v >= field.modulus()) throw ConfigurationError("hash table entry outside GF(q)");
    }
    return OneWayFn(field, std::make_shared<const std::vector<std::uint64_t>>(std::move(values)));
  }

  template <typename F>
  static OneWayFn tabulate(const PrimeField& field, F&& f) {
    std::vector<std::uint64_t> values;
    for (std::uint64_t x = 0; x < field.modulus(); ++x) values.push_back(f(field(x)).value());
    return table(field, std::move(values));
  }

  FieldElement operator()(FieldElement x) const {
    if (!field_.contains(x)) throw ContractViolation("one-way function applied outside its field");
    if (table_) return field_((*table_)[x.value()]);
    return standard_eval(x.value());
  }

  std::string_view name() const noexcept { return table_ ? kTableName : kStandardName; }
  const PrimeField& field() const noexcept { return field_; }
  const std::vector<std::uint64_t>* table_values() const noexcept { return table_.get(); }

 private:
  OneWayFn(PrimeField field, std::shared_ptr<const std::vector<std::uint64_t>> table)
      : field_(field), table_(std::move(table)) {}

  FieldElement standard_eval(std::uint64_t x) const {
    std::array<std::uint8_t, 9> input{0x4B};
    detail::store_be64(x, input.data() + 1);
    auto digest = detail::sha256(input);
    const std::uint64_t q = field_.modulus();
    const std::uint64_t floor = detail::rejection_floor(q);
    for (;;) {
      for (std::size_t w = 0; w < 4; ++w) {
        const std::uint64_t window = detail::load_be64(digest.data() + 8 * w);
        if (window >= floor) return field_(window % q);
      }
      digest = detail::sha256(digest);
    }
  }

  PrimeField field_;
  std::shared_ptr<const std::vector<std::uint64_t>> table_;
};

/// keys()[i-1] is K_i: K_1 is the seed and K_i = H(K_{i-1}).
class BackwardChain {
 public:
  BackwardChain() = default;
  explicit BackwardChain(std::vector<FieldElement> keys) : keys_(std::move(keys)) {}

  Session length() const noexcept { return static_cast<Session>(keys_.size()); }
  const std::vector<FieldElement>& keys() const noexcept { return keys_; }

  /// K_i for 1 <= i <= m.
  const FieldElement& key(Session i) const {
    if (i < 1 || i > keys_.size()) throw ContractViolation("chain index " + std::to_string(i) + " out of range");
    return keys_[i - 1];
  }

 private:
  std::vector<FieldElement> keys_;
};

inline BackwardChain build_chain(FieldElement seed, Session m, const OneWayFn& fn) {
  if (m == 0) throw ConfigurationError("chain length must be >= 1");
  std::vector<FieldElement> keys;
  keys.reserve(m);
  keys.push_back(seed);
  for (Session i = 1; i < m; ++i) keys.push_back(fn(keys.back()));
  return BackwardChain(std::move(keys));
}

/// Session j uses chain key K_{m-j+1}.
inline Session chain_index(Session j, Session m) {
  if (j < 1 || j > m) {
    throw ContractViolation("session " + std::to_string(j) + " outside [1, " + std::to_string(m) + "]");
  }
  return m - j + 1;
}

inline FieldElement advance(FieldElement key, std::uint64_t steps, const OneWayFn& fn) {
  for (std::uint64_t i = 0; i < steps; ++i) key = fn(key);
  return key;
}

struct BetaSequence {
  std::vector<FieldElement> betas;
  Bytes generator_seed;

  /// β_j for 1 <= j <= m.
  const FieldElement& at(Session j) const {
    if (j < 1 || j > betas.size()) throw ContractViolation("beta index " + std::to_string(j) + " out of range");
    return betas[j - 1];
  }
};

inline BetaSequence generate_betas(std::span<const std::uint8_t> seed, Session m, const PrimeField& field) {
  if (m == 0) throw ConfigurationError("beta sequence length must be >= 1");
  SeededStream stream("beta", seed);
  BetaSequence out{{}, Bytes(seed.begin(), seed.end())};
  out.betas.reserve(m);
  for (Session j = 0; j < m; ++j) out.betas.push_back(stream.uniform(field));
  return out;
}

struct SessionKey {
  Session session = 0;
  FieldElement value;

  friend bool operator==(const SessionKey&, const SessionKey&) = default;
};

/// SK_j = β_j + K_{m-j+1}.
inline FieldElement compose_session_key(FieldElement beta, FieldElement chain_key) { return beta + chain_key; }

}  // namespace shkd
