#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbgka/bigint.hpp"

namespace rbgka::wire {

// Big-endian, length-prefixed primitives shared by every serialized record.

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_blob(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& b) {
  put_u32(out, static_cast<std::uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

inline void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

// canonical integer: length prefix + minimal big-endian bytes
inline void put_bigint(std::vector<std::uint8_t>& out, const Bigint& v) {
  put_blob(out, v.to_bytes());
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }

  std::vector<std::uint8_t> blob() {
    const std::uint32_t n = u32();
    need(n);
    std::vector<std::uint8_t> b(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return b;
  }

  std::string string() {
    const auto b = blob();
    return std::string(b.begin(), b.end());
  }

  Bigint bigint() { return Bigint::from_bytes(blob()); }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw std::runtime_error("wire record truncated");
  }
  const std::vector<std::uint8_t>& data_;
  std::size_t pos_ = 0;
};

}  // namespace rbgka::wire
