#include "rbgka/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "rbgka/errors.hpp"

namespace rbgka {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

}  // namespace

GroupParams::GroupParams(Bigint g, Bigint p) : g_(std::move(g)), p_(std::move(p)) {
  if (p_ < 5) throw std::invalid_argument("group modulus too small");
  if (!p_.probably_prime()) throw std::invalid_argument("group modulus is not prime");
  if (g_ < 2 || g_ >= p_) throw std::invalid_argument("generator out of range (1, p)");
}

PrivateShare::PrivateShare(Bigint value, const GroupParams& params)
    // Exponents act mod p-1 (the group exponent), so oversized inputs reduce
    // to the same key material; keep the canonical representative.
    : v_(std::move(value) % (params.p() - 1)) {
  if (v_ < 2 || v_ > params.p() - 2) throw std::invalid_argument("private share out of range [2, p-2]");
}

KeyValue::KeyValue(Bigint value, const GroupParams& params) : v_(std::move(value)) {
  if (v_ < 1 || v_ >= params.p()) throw std::invalid_argument("group element out of range [1, p-1]");
}

KeyValue mod_exp(const KeyValue& base, const Bigint& exp, const GroupParams& params) {
  return KeyValue(Bigint::pow_mod(base.value(), exp, params.p()), params);
}

KeyValue mod_exp(const KeyValue& base, const PrivateShare& exp, const GroupParams& params) {
  return mod_exp(base, exp.value(), params);
}

KeyValue blind(const PrivateShare& share, const GroupParams& params) {
  return mod_exp(KeyValue(params.g(), params), share.value(), params);
}

std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& data) {
  ensure_sodium();
  std::array<std::uint8_t, 32> out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

SymmetricKey derive_symmetric_key(const KeyValue& key) {
  SymmetricKey out;
  out.bytes = sha256(key.value().to_bytes());
  return out;
}

std::string key_digest(const KeyValue& key) {
  const auto h = sha256(key.value().to_bytes());
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 8; ++i) {
    s.push_back(hex[h[i] >> 4]);
    s.push_back(hex[h[i] & 0xf]);
  }
  return s;
}

Ciphertext seal(const SymmetricKey& key, const std::vector<std::uint8_t>& plaintext) {
  ensure_sodium();
  // Synthetic nonce from key and plaintext keeps sealing deterministic while
  // separating (key, message) pairs.
  std::vector<std::uint8_t> nb;
  nb.reserve(key.bytes.size() + plaintext.size() + 1);
  nb.insert(nb.end(), key.bytes.begin(), key.bytes.end());
  nb.push_back(0x5e);
  nb.insert(nb.end(), plaintext.begin(), plaintext.end());
  const auto nh = sha256(nb);

  Ciphertext ct;
  std::memcpy(ct.nonce.data(), nh.data(), ct.nonce.size());
  ct.body.resize(plaintext.size() + crypto_secretbox_MACBYTES);
  crypto_secretbox_easy(ct.body.data(), plaintext.data(), plaintext.size(),
                        ct.nonce.data(), key.bytes.data());
  return ct;
}

std::vector<std::uint8_t> open(const SymmetricKey& key, const Ciphertext& ct) {
  ensure_sodium();
  if (ct.body.size() < crypto_secretbox_MACBYTES)
    throw AuthenticationError("ciphertext shorter than its authentication tag");
  std::vector<std::uint8_t> out(ct.body.size() - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(out.data(), ct.body.data(), ct.body.size(),
                                 ct.nonce.data(), key.bytes.data()) != 0)
    throw AuthenticationError("authentication failed: wrong key or tampered ciphertext");
  return out;
}

std::uint64_t DeterministicRng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Bigint DeterministicRng::uniform_below(const Bigint& bound) {
  if (bound < 1) throw std::invalid_argument("uniform_below: bound must be >= 1");
  const std::size_t bits = bound.bit_length();
  const std::size_t nbytes = (bits + 7) / 8;
  const unsigned top_mask = bits % 8 ? (1u << (bits % 8)) - 1 : 0xffu;
  for (;;) {
    std::vector<std::uint8_t> buf(nbytes);
    std::uint64_t word = 0;
    int have = 0;
    for (std::size_t i = 0; i < nbytes; ++i) {
      if (have == 0) {
        word = next_u64();
        have = 8;
      }
      buf[i] = static_cast<std::uint8_t>(word & 0xff);
      word >>= 8;
      --have;
    }
    if (!buf.empty()) buf[0] &= static_cast<std::uint8_t>(top_mask);
    Bigint candidate = Bigint::from_bytes(buf);
    if (candidate < bound) return candidate;
  }
}

PrivateShare DeterministicRng::sample_share(const GroupParams& params) {
  // uniform in [2, p-2]
  const Bigint width = params.p() - 3;  // |{2..p-2}|
  return PrivateShare(uniform_below(width) + 2, params);
}

}  // namespace rbgka
