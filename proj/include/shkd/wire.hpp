#pragma once

// Framed binary encodings for broadcasts ("SHKD") and personal secrets
// ("SHKS"). All integers are big-endian; every field element occupies
// ceil(ceil(log2 q) / 8) bytes.
//
//   broadcast: "SHKD" | 0x01 | session u32 | count u16 |
//              count × (user u32 | arity u8 | arity × element) | Z element
//   secret:    "SHKS" | 0x01 | user u32 | start u32 | end u32 | arity u8 |
//              (end-start+1) × arity × element | (end-start+1) × element

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shkd/chain.hpp"
#include "shkd/error.hpp"
#include "shkd/gf.hpp"
#include "shkd/messages.hpp"

namespace shkd {

inline constexpr std::array<std::uint8_t, 4> kBroadcastMagic{'S', 'H', 'K', 'D'};
inline constexpr std::array<std::uint8_t, 4> kSecretMagic{'S', 'H', 'K', 'S'};
inline constexpr std::uint8_t kWireVersion = 0x01;

/// Size accounting for one encoded broadcast. `element_bits` counts field
/// elements at their unaligned width; identities are tracked apart from it.
struct WireStats {
  std::size_t field_elements = 0;
  std::size_t element_bits = 0;
  std::size_t element_bytes = 0;
  std::size_t id_bytes = 0;
  std::size_t framing_bytes = 0;
  std::size_t total_bytes = 0;
};

namespace detail {

class Writer {
 public:
  explicit Writer(const PrimeField& field) : width_(field.element_bytes()) {}

  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { uint(v, 2); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void element(const FieldElement& e) { uint(e.value(), width_); }

  Bytes take() { return std::move(out_); }

 private:
  void uint(std::uint64_t v, unsigned n) {
    for (unsigned i = n; i-- > 0;) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFU));
  }

  unsigned width_;
  Bytes out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, const PrimeField& field)
      : in_(in), field_(field), width_(field.element_bytes()) {}

  void magic(const std::array<std::uint8_t, 4>& expected) {
    need(4);
    for (std::size_t i = 0; i < 4; ++i) {
      if (in_[pos_ + i] != expected[i]) throw DecodeError("bad magic");
    }
    pos_ += 4;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  FieldElement element() {
    const std::uint64_t v = uint(width_);
    if (v >= field_.modulus()) throw DecodeError("element " + std::to_string(v) + " outside GF(q)");
    return field_(v);
  }
  void finish() const {
    if (pos_ != in_.size()) throw DecodeError(std::to_string(in_.size() - pos_) + " trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("truncated input");
  }
  std::uint64_t uint(unsigned n) {
    need(n);
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n; ++i) v = (v << 8U) | in_[pos_ + i];
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> in_;
  PrimeField field_;
  unsigned width_;
  std::size_t pos_ = 0;
};

inline void check_element(const PrimeField& field, const FieldElement& e) {
  if (!field.contains(e)) throw ContractViolation("element does not belong to GF(" + std::to_string(field.modulus()) + ")");
}

}  // namespace detail

inline Bytes encode_broadcast(const BroadcastMessage& msg, const PrimeField& field) {
  if (msg.revealed.size() > 0xFFFF) throw ContractViolation("too many revealed entries for the wire format");
  detail::Writer w(field);
  w.bytes(kBroadcastMagic);
  w.u8(kWireVersion);
  w.u32(msg.session);
  w.u16(static_cast<std::uint16_t>(msg.revealed.size()));
  for (const auto& entry : msg.revealed) {
    if (entry.dots.empty() || entry.dots.size() > 0xFF) throw ContractViolation("entry arity must be 1..255");
    w.u32(entry.user.value);
    w.u8(static_cast<std::uint8_t>(entry.dots.size()));
    for (const auto& d : entry.dots) {
      detail::check_element(field, d);
      w.element(d);
    }
  }
  detail::check_element(field, msg.z);
  w.element(msg.z);
  return w.take();
}

inline BroadcastMessage decode_broadcast(std::span<const std::uint8_t> bytes, const PrimeField& field) {
  detail::Reader r(bytes, field);
  r.magic(kBroadcastMagic);
  if (r.u8() != kWireVersion) throw DecodeError("unsupported version");
  BroadcastMessage msg;
  msg.session = r.u32();
  const std::uint16_t count = r.u16();
  UserSet seen;
  for (std::uint16_t i = 0; i < count; ++i) {
    RevealedShare entry{UserId{r.u32()}, {}};
    if (!seen.insert(entry.user).second) throw DecodeError("duplicate entry for " + to_string(entry.user));
    const std::uint8_t arity = r.u8();
    if (arity == 0) throw DecodeError("zero-arity entry");
    for (std::uint8_t k = 0; k < arity; ++k) entry.dots.push_back(r.element());
    msg.revealed.push_back(std::move(entry));
  }
  msg.z = r.element();
  r.finish();
  return msg;
}

inline WireStats broadcast_wire_stats(const BroadcastMessage& msg, const PrimeField& field) {
  WireStats s;
  s.field_elements = 1;
  for (const auto& entry : msg.revealed) s.field_elements += entry.dots.size();
  s.element_bits = s.field_elements * field.element_bits();
  s.element_bytes = s.field_elements * field.element_bytes();
  s.id_bytes = 4 * msg.revealed.size();
  s.framing_bytes = 4 + 1 + 4 + 2 + msg.revealed.size();
  s.total_bytes = s.element_bytes + s.id_bytes + s.framing_bytes;
  return s;
}

inline Bytes encode_secret(const PersonalSecret& secret, const PrimeField& field) {
  const LifeCycle& c = secret.cycle;
  if (c.start < 1 || c.start > c.end) throw ContractViolation("malformed life cycle");
  std::size_t arity = 0;
  for (Session j = c.start; j <= c.end; ++j) {
    auto d = secret.dots.find(j);
    if (d == secret.dots.end() || secret.betas.count(j) == 0) {
      throw ContractViolation("secret misses session " + std::to_string(j));
    }
    if (j == c.start) arity = d->second.size();
    if (d->second.size() != arity || arity == 0 || arity > 0xFF) throw ContractViolation("inconsistent arity");
  }
  if (secret.dots.size() != c.length() || secret.betas.size() != c.length()) {
    throw ContractViolation("secret holds sessions outside its life cycle");
  }
  detail::Writer w(field);
  w.bytes(kSecretMagic);
  w.u8(kWireVersion);
  w.u32(secret.user.value);
  w.u32(c.start);
  w.u32(c.end);
  w.u8(static_cast<std::uint8_t>(arity));
  for (const auto& [_, dots] : secret.dots) {
    for (const auto& d : dots) {
      detail::check_element(field, d);
      w.element(d);
    }
  }
  for (const auto& [_, beta] : secret.betas) {
    detail::check_element(field, beta);
    w.element(beta);
  }
  return w.take();
}

inline PersonalSecret decode_secret(std::span<const std::uint8_t> bytes, const PrimeField& field) {
  detail::Reader r(bytes, field);
  r.magic(kSecretMagic);
  if (r.u8() != kWireVersion) throw DecodeError("unsupported version");
  PersonalSecret s;
  s.user = UserId{r.u32()};
  s.cycle.start = r.u32();
  s.cycle.end = r.u32();
  if (s.cycle.start < 1 || s.cycle.start > s.cycle.end) throw DecodeError("malformed life cycle");
  if (s.cycle.length() > (bytes.size() / std::max(1U, field.element_bytes()))) throw DecodeError("truncated input");
  const std::uint8_t arity = r.u8();
  if (arity == 0) throw DecodeError("zero arity");
  for (Session j = s.cycle.start; j <= s.cycle.end; ++j) {
    auto& dots = s.dots[j];
    for (std::uint8_t k = 0; k < arity; ++k) dots.push_back(r.element());
  }
  for (Session j = s.cycle.start; j <= s.cycle.end; ++j) s.betas.emplace(j, r.element());
  r.finish();
  return s;
}

}  // namespace shkd
