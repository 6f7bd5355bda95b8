#include "rbgka/bigint.hpp"

#include <stdexcept>

namespace rbgka {

Bigint Bigint::from_bytes(const std::vector<std::uint8_t>& be) {
  Bigint r;
  if (!be.empty()) {
    mpz_import(r.v_.get_mpz_t(), be.size(), 1 /*msb first*/, 1, 1, 0, be.data());
  }
  return r;
}

std::vector<std::uint8_t> Bigint::to_bytes() const {
  if (v_ == 0) return {};
  std::size_t count = 0;
  std::vector<std::uint8_t> out((mpz_sizeinbase(v_.get_mpz_t(), 2) + 7) / 8);
  mpz_export(out.data(), &count, 1, 1, 1, 0, v_.get_mpz_t());
  out.resize(count);
  return out;
}

bool Bigint::fits_u64() const {
  return v_ >= 0 && mpz_sizeinbase(v_.get_mpz_t(), 2) <= 64;
}

std::uint64_t Bigint::to_u64() const {
  std::uint64_t r = 0;
  for (std::uint8_t b : to_bytes()) r = (r << 8) | b;
  return r;
}

Bigint Bigint::pow_mod(const Bigint& a, const Bigint& e, const Bigint& m) {
  if (m.v_ <= 1) throw std::invalid_argument("pow_mod: modulus must be > 1");
  Bigint r;
  mpz_powm(r.v_.get_mpz_t(), a.v_.get_mpz_t(), e.v_.get_mpz_t(), m.v_.get_mpz_t());
  return r;
}

}  // namespace rbgka
