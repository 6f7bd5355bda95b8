#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rbgka/bigint.hpp"

namespace rbgka {

// Cyclic-group parameters (generator g, odd prime modulus p) shared by every
// protocol participant. Construction validates; defaults are the demo pair.
class GroupParams {
 public:
  GroupParams(Bigint g, Bigint p);
  static GroupParams demo_default() { return GroupParams(5, 32713); }

  const Bigint& g() const { return g_; }
  const Bigint& p() const { return p_; }

  friend bool operator==(const GroupParams& a, const GroupParams& b) {
    return a.g_ == b.g_ && a.p_ == b.p_;
  }

 private:
  Bigint g_;
  Bigint p_;
};

// A member's secret exponent. Exponents act mod p-1, so construction reduces
// to the canonical representative, which must land in [2, p-2].
class PrivateShare {
 public:
  PrivateShare(Bigint value, const GroupParams& params);
  const Bigint& value() const { return v_; }

 private:
  Bigint v_;
};

// Group element in [1, p-1]: public keys, intermediate values, agreed keys.
class KeyValue {
 public:
  KeyValue(Bigint value, const GroupParams& params);
  const Bigint& value() const { return v_; }

  friend bool operator==(const KeyValue& a, const KeyValue& b) { return a.v_ == b.v_; }
  friend bool operator!=(const KeyValue& a, const KeyValue& b) { return a.v_ != b.v_; }
  friend bool operator<(const KeyValue& a, const KeyValue& b) { return a.v_ < b.v_; }

 private:
  Bigint v_;
};

struct SymmetricKey {
  std::array<std::uint8_t, 32> bytes{};
  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
};

struct Ciphertext {
  std::array<std::uint8_t, 24> nonce{};
  std::vector<std::uint8_t> body;  // auth tag + encrypted payload
};

KeyValue mod_exp(const KeyValue& base, const Bigint& exp, const GroupParams& params);
KeyValue mod_exp(const KeyValue& base, const PrivateShare& exp, const GroupParams& params);
// g^share mod p
KeyValue blind(const PrivateShare& share, const GroupParams& params);

// 32-byte key = SHA-256 of the minimal big-endian encoding of the group element.
SymmetricKey derive_symmetric_key(const KeyValue& key);

std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& data);
// short hex digest of a group element, used in traces
std::string key_digest(const KeyValue& key);

// Authenticated encryption. seal is deterministic for a given (key, plaintext):
// the nonce is derived from both, so equal-seed simulation runs emit identical
// bytes. open throws AuthenticationError on a wrong key or tampered ciphertext.
Ciphertext seal(const SymmetricKey& key, const std::vector<std::uint8_t>& plaintext);
std::vector<std::uint8_t> open(const SymmetricKey& key, const Ciphertext& ct);

// Deterministic random source; one instance drives a whole scenario.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // uniform in [0, bound), bound >= 1, by rejection on fixed-width draws
  Bigint uniform_below(const Bigint& bound);
  // uniform share in [2, p-2]
  PrivateShare sample_share(const GroupParams& params);

 private:
  std::uint64_t state_;  // splitmix64; stable across platforms
};

}  // namespace rbgka
