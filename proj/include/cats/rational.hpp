#pragma once

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cats {

/// Exact signed rational on 64-bit numerator/denominator.
///
/// Ledger arithmetic runs on this type so that fine splits (f / |Psi|)
/// and the system-wide resource balance conserve exactly, including
/// splits by 3. Intermediates widen to 128 bits; a result that does not
/// fit back into 64 bits after reduction throws std::overflow_error.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  /// Parses "12", "-3.25", "0.1" into the exact rational they denote.
  static Rational from_decimal(std::string_view text);
  /// Parses either decimal form or the canonical "n/d" form.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Canonical text: "n" when integral, exact decimal when the denominator
  /// is of the form 2^a*5^b, otherwise "n/d". parse() round-trips all forms.
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

 private:
  using i128 = __int128;

  static i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational make(i128 num, i128 den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr i128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr i128 hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi) throw std::overflow_error("Rational: 64-bit overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) { *this = make(num, den); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational Rational::from_decimal(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("Rational: empty decimal");
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    i = 1;
  }
  i128 num = 0;
  i128 den = 1;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_point) throw std::invalid_argument("Rational: malformed decimal");
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("Rational: malformed decimal");
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (seen_point) den *= 10;
    if (num > i128(std::numeric_limits<std::int64_t>::max()) * 1000)
      throw std::overflow_error("Rational: decimal too large");
  }
  if (!seen_digit) throw std::invalid_argument("Rational: malformed decimal");
  return make(negative ? -num : num, den);
}

inline Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return from_decimal(text);
  Rational n = from_decimal(text.substr(0, slash));
  Rational d = from_decimal(text.substr(slash + 1));
  if (!n.is_integer() || !d.is_integer())
    throw std::invalid_argument("Rational: malformed fraction");
  return n / d;
}

inline std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  // Exact decimal when den = 2^a * 5^b.
  std::int64_t d = den_;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
  int k = twos > fives ? twos : fives;
  i128 scaled = i128(num_ < 0 ? -num_ : num_);
  for (int i = 0; i < k - twos; ++i) scaled *= 2;
  for (int i = 0; i < k - fives; ++i) scaled *= 5;
  // scaled / 10^k is the value's magnitude.
  std::string digits;
  i128 s = scaled;
  while (s > 0) {
    digits.insert(digits.begin(), static_cast<char>('0' + int(s % 10)));
    s /= 10;
  }
  while (static_cast<int>(digits.size()) <= k) digits.insert(digits.begin(), '0');
  digits.insert(digits.size() - k, ".");
  while (digits.back() == '0') digits.pop_back();
  if (digits.back() == '.') digits.pop_back();
  return (num_ < 0 ? "-" : "") + digits;
}

}  // namespace cats
