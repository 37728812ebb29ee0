#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snngx/errors.hpp"

namespace snngx {

/// Unsigned arbitrary-precision integer with just the operations the
/// combinatorics here need: add, multiply/divide by a machine word, compare,
/// decimal printing. Limbs are 64-bit, little-endian, no trailing zeros.
class BigUint {
public:
  BigUint() = default;
  BigUint(std::uint64_t v) {  // NOLINT: implicit by design
    if (v != 0) limbs_.push_back(v);
  }

  bool is_zero() const noexcept { return limbs_.empty(); }

  BigUint& operator+=(const BigUint& rhs) {
    if (limbs_.size() < rhs.limbs_.size()) limbs_.resize(rhs.limbs_.size(), 0);
    unsigned __int128 carry = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      unsigned __int128 sum = carry + limbs_[i];
      if (i < rhs.limbs_.size()) sum += rhs.limbs_[i];
      limbs_[i] = static_cast<std::uint64_t>(sum);
      carry = sum >> 64;
    }
    if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
  }

  friend BigUint operator+(BigUint lhs, const BigUint& rhs) {
    lhs += rhs;
    return lhs;
  }

  BigUint& operator*=(std::uint64_t m) {
    if (m == 0) {
      limbs_.clear();
      return *this;
    }
    unsigned __int128 carry = 0;
    for (auto& limb : limbs_) {
      unsigned __int128 prod = static_cast<unsigned __int128>(limb) * m + carry;
      limb = static_cast<std::uint64_t>(prod);
      carry = prod >> 64;
    }
    if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
  }

  friend BigUint operator*(BigUint lhs, std::uint64_t m) {
    lhs *= m;
    return lhs;
  }

  /// Floor division in place; returns the remainder.
  std::uint64_t divmod(std::uint64_t d) {
    if (d == 0) throw validation_error("BigUint: division by zero");
    unsigned __int128 rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      unsigned __int128 cur = (rem << 64) | limbs_[i];
      limbs_[i] = static_cast<std::uint64_t>(cur / d);
      rem = cur % d;
    }
    trim();
    return static_cast<std::uint64_t>(rem);
  }

  int compare(const BigUint& rhs) const noexcept {
    if (limbs_.size() != rhs.limbs_.size())
      return limbs_.size() < rhs.limbs_.size() ? -1 : 1;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      if (limbs_[i] != rhs.limbs_[i]) return limbs_[i] < rhs.limbs_[i] ? -1 : 1;
    }
    return 0;
  }

  bool operator==(const BigUint& rhs) const noexcept { return compare(rhs) == 0; }
  bool operator<(const BigUint& rhs) const noexcept { return compare(rhs) < 0; }
  bool operator<=(const BigUint& rhs) const noexcept { return compare(rhs) <= 0; }
  bool operator>(const BigUint& rhs) const noexcept { return compare(rhs) > 0; }
  bool operator>=(const BigUint& rhs) const noexcept { return compare(rhs) >= 0; }

  double to_double() const noexcept {
    double v = 0.0;
    for (std::size_t i = limbs_.size(); i-- > 0;) v = v * 18446744073709551616.0 + limbs_[i];
    return v;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    BigUint tmp = *this;
    std::string out;
    while (!tmp.is_zero()) {
      std::uint64_t chunk = tmp.divmod(1000000000000000000ULL);  // 10^18
      std::string part = std::to_string(chunk);
      if (!tmp.is_zero()) part = std::string(18 - part.size(), '0') + part;
      out = part + out;
    }
    return out;
  }

  static BigUint from_decimal(std::string_view text) {
    if (text.empty()) throw validation_error("BigUint: empty decimal string");
    BigUint v;
    for (char c : text) {
      if (c < '0' || c > '9')
        throw validation_error("BigUint: invalid decimal digit");
      v *= 10;
      v += BigUint(static_cast<std::uint64_t>(c - '0'));
    }
    return v;
  }

  static BigUint pow2(unsigned n) {
    BigUint v;
    v.limbs_.assign(n / 64 + 1, 0);
    v.limbs_[n / 64] = 1ULL << (n % 64);
    return v;
  }

  /// Exact binomial coefficient C(n, k).
  static BigUint binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return BigUint();
    if (k > n - k) k = n - k;
    BigUint r(1);
    for (std::uint64_t i = 1; i <= k; ++i) {
      r *= (n - k + i);
      r.divmod(i);  // exact at every step
    }
    return r;
  }

private:
  void trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }

  std::vector<std::uint64_t> limbs_;
};

}  // namespace snngx
