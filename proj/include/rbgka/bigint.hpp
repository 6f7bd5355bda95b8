#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace rbgka {

// Arbitrary-precision unsigned integer. Thin value wrapper over GMP so the
// rest of the code sees exactly the operations the protocol needs and the
// canonical wire encoding lives in one place.
class Bigint {
 public:
  Bigint() : v_(0) {}
  Bigint(unsigned long v) : v_(v) {}  // NOLINT: implicit by design for literals
  explicit Bigint(const std::string& decimal) : v_(decimal, 10) {}

  static Bigint from_bytes(const std::vector<std::uint8_t>& be);

  // Minimal big-endian encoding: no leading zero octet, zero encodes empty.
  std::vector<std::uint8_t> to_bytes() const;
  std::string to_string() const { return v_.get_str(10); }

  std::size_t bit_length() const { return mpz_sizeinbase(v_.get_mpz_t(), 2); }
  bool fits_u64() const;
  std::uint64_t to_u64() const;  // valid only when fits_u64()

  bool probably_prime() const {
    return mpz_probab_prime_p(v_.get_mpz_t(), 32) != 0;
  }

  friend Bigint operator+(const Bigint& a, const Bigint& b) { return Bigint(a.v_ + b.v_); }
  friend Bigint operator-(const Bigint& a, const Bigint& b) { return Bigint(a.v_ - b.v_); }
  friend Bigint operator*(const Bigint& a, const Bigint& b) { return Bigint(a.v_ * b.v_); }
  friend Bigint operator%(const Bigint& a, const Bigint& b) { return Bigint(a.v_ % b.v_); }
  friend bool operator==(const Bigint& a, const Bigint& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Bigint& a, const Bigint& b) { return a.v_ != b.v_; }
  friend bool operator<(const Bigint& a, const Bigint& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Bigint& a, const Bigint& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Bigint& a, const Bigint& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Bigint& a, const Bigint& b) { return a.v_ >= b.v_; }

  // a^e mod m. m must be > 1.
  static Bigint pow_mod(const Bigint& a, const Bigint& e, const Bigint& m);

 private:
  explicit Bigint(mpz_class v) : v_(std::move(v)) {}
  mpz_class v_;
};

}  // namespace rbgka
