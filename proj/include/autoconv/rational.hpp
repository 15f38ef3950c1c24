#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "autoconv/errors.hpp"

namespace autoconv {

namespace detail {

inline unsigned __int128 uabs128(__int128 v) {
  return v < 0 ? -(unsigned __int128)v : (unsigned __int128)v;
}

inline unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
  while (b != 0) {
    unsigned __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline int bit_width128(unsigned __int128 v) {
  int w = 0;
  while (v != 0) {
    ++w;
    v >>= 1;
  }
  return w;
}

inline std::int64_t narrow_i64(__int128 v, const char* what) {
  if (v > (__int128)std::numeric_limits<std::int64_t>::max() ||
      v < (__int128)std::numeric_limits<std::int64_t>::min())
    throw OverflowError(std::string(what) + ": value exceeds 64-bit range");
  return (std::int64_t)v;
}

}  // namespace detail

// Exact fraction num/den, den > 0, always reduced. All intermediates use
// 128-bit integers; a result whose reduced numerator or denominator does not
// fit in 64 bits throws OverflowError instead of silently wrapping.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat() = default;
  Rat(std::int64_t n, std::int64_t d) { *this = make(n, d); }
  static Rat from_int(std::int64_t n) {
    Rat r;
    r.num = n;
    r.den = 1;
    return r;
  }

  static Rat make(__int128 n, __int128 d) {
    if (d == 0) throw DomainError("rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    unsigned __int128 g = detail::gcd128(detail::uabs128(n), (unsigned __int128)d);
    if (g > 1) {
      n /= (__int128)g;
      d /= (__int128)g;
    }
    Rat r;
    r.num = detail::narrow_i64(n, "rational numerator");
    r.den = detail::narrow_i64(d, "rational denominator");
    return r;
  }

  friend Rat operator+(const Rat& a, const Rat& b) {
    return make((__int128)a.num * b.den + (__int128)b.num * a.den,
                (__int128)a.den * b.den);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    return make((__int128)a.num * b.den - (__int128)b.num * a.den,
                (__int128)a.den * b.den);
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    return make((__int128)a.num * b.num, (__int128)a.den * b.den);
  }
  Rat operator-() const {
    Rat r;
    r.num = -num;
    r.den = den;
    return r;
  }

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return (__int128)a.num * b.den < (__int128)b.num * a.den;
  }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
  friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

  // Exact three-way comparison against a double: -1, 0, +1 as *this <,=,> d.
  int cmp(double d) const {
    if (std::isnan(d)) throw DomainError("rational: comparison with NaN");
    if (std::isinf(d)) return d > 0 ? -1 : 1;
    if (d == 0.0) return (num > 0) - (num < 0);
    int e2 = 0;
    double frac = std::frexp(d, &e2);
    auto mant = (std::int64_t)std::ldexp(frac, 53);
    e2 -= 53;  // d == mant * 2^e2 exactly
    __int128 lhs, rhs;
    if (e2 >= 0) {
      unsigned __int128 mag = detail::uabs128(mant) * (unsigned __int128)den;
      if (detail::bit_width128(mag) + e2 > 126) return mant > 0 ? -1 : 1;
      lhs = (__int128)num;
      rhs = ((__int128)mant * den) << e2;
    } else {
      int sh = -e2;
      unsigned __int128 mag = detail::uabs128(num);
      if (detail::bit_width128(mag) + sh > 126) {
        if (num != 0) return num > 0 ? 1 : -1;
        return mant > 0 ? -1 : 1;
      }
      lhs = ((__int128)num) << sh;
      rhs = (__int128)mant * den;
    }
    return (lhs > rhs) - (lhs < rhs);
  }

  // Nearest double; used only for display, not for certified exports.
  double to_double() const { return (double)((long double)num / (long double)den); }

  // Largest double <= exact value.
  double to_double_floor() const {
    double d = to_double();
    while (cmp(d) < 0) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
    for (;;) {
      double up = std::nextafter(d, std::numeric_limits<double>::infinity());
      if (cmp(up) < 0) break;
      d = up;
    }
    return d;
  }

  // Smallest double >= exact value.
  double to_double_ceil() const {
    double d = to_double();
    while (cmp(d) > 0) d = std::nextafter(d, std::numeric_limits<double>::infinity());
    for (;;) {
      double down = std::nextafter(d, -std::numeric_limits<double>::infinity());
      if (cmp(down) > 0) break;
      d = down;
    }
    return d;
  }

  // Decimal rendering rounded toward minus infinity at `digits` places, so a
  // printed lower bound is never above the exact value.
  std::string to_decimal_floor(int digits) const {
    __int128 scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    __int128 t = (__int128)num * scale;
    __int128 q = t / den;
    if (t % den != 0 && t < 0) --q;  // floor division
    bool neg = q < 0;
    unsigned __int128 mag = detail::uabs128(q);
    std::string s;
    if (mag == 0) s = "0";
    while (mag != 0) {
      s.insert(s.begin(), (char)('0' + (int)(mag % 10)));
      mag /= 10;
    }
    while ((int)s.size() < digits + 1) s.insert(s.begin(), '0');
    s.insert(s.size() - digits, ".");
    if (neg) s.insert(s.begin(), '-');
    return s;
  }

  // ceil(x) = -floor(-x), reusing the exact floor division above.
  std::string to_decimal_ceil(int digits) const {
    Rat m = Rat::make(-(__int128)num, (__int128)den);
    std::string s = m.to_decimal_floor(digits);
    bool zero = true;
    for (char c : s)
      if (c >= '1' && c <= '9') zero = false;
    if (zero) return s[0] == '-' ? s.substr(1) : s;
    if (s[0] == '-') return s.substr(1);
    return "-" + s;
  }
};

}  // namespace autoconv
