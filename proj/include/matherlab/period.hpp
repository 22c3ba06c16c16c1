#pragma once

// Exact period-group arithmetic. Values are q * sqrt(m) * pi^a with q
// rational, m squarefree and a >= 0. Two values with different units have
// an irrational ratio.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "matherlab/error.hpp"

namespace matherlab {

namespace detail {
__extension__ using wide_int = __int128;
}  // namespace detail

class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw ConfigError("Rational: zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  Rational abs() const { return {num_ < 0 ? -num_ : num_, den_}; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<detail::wide_int>(a.num_) * b.den_ + static_cast<detail::wide_int>(b.num_) * a.den_,
                     static_cast<detail::wide_int>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<detail::wide_int>(a.num_) * b.num_, static_cast<detail::wide_int>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw ConfigError("Rational: division by zero");
    return from_wide(static_cast<detail::wide_int>(a.num_) * b.den_, static_cast<detail::wide_int>(a.den_) * b.num_);
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<detail::wide_int>(a.num_) * b.den_ < static_cast<detail::wide_int>(b.num_) * a.den_;
  }

  /// Largest r with a/r and b/r both integers (a, b taken by absolute value).
  static Rational gcd(const Rational& a, const Rational& b) {
    if (a.is_zero()) return b.abs();
    if (b.is_zero()) return a.abs();
    const std::int64_t n = std::gcd(a.num_, b.num_);
    const std::int64_t d = std::lcm(a.den_, b.den_);
    return {n, d};
  }

  std::string to_string() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  static Rational from_wide(detail::wide_int n, detail::wide_int d) {
    if (d == 0) throw ConfigError("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    detail::wide_int a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      const detail::wide_int t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr detail::wide_int lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim) throw ConfigError("Rational: overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct SymbolicUnit {
  std::int64_t radicand = 1;  // squarefree
  int pi_power = 0;

  friend bool operator==(const SymbolicUnit&, const SymbolicUnit&) = default;

  double value() const { return std::sqrt(static_cast<double>(radicand)) * std::pow(3.14159265358979323846, pi_power); }

  std::string to_string() const {
    std::string s;
    if (radicand != 1) s += "sqrt" + std::to_string(radicand);
    if (pi_power >= 1) s += "pi";
    if (pi_power > 1) s += "^" + std::to_string(pi_power);
    return s;
  }
};

struct PeriodValue {
  Rational coefficient;
  SymbolicUnit unit;

  double value() const { return coefficient.value() * unit.value(); }

  std::string to_string() const {
    const std::string u = unit.to_string();
    if (u.empty()) return coefficient.to_string();
    if (coefficient == Rational(1)) return u;
    if (coefficient == Rational(-1)) return "-" + u;
    return coefficient.to_string() + u;
  }
};

/// Parses values such as "4pi", "2sqrt2pi", "9/4pi", "0.5*pi", "pi^2", "3".
inline PeriodValue parse_period_value(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch)) && ch != '*') s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s.empty()) throw ConfigError("period value: empty");
  std::size_t pos = 0;
  auto fail = [&]() -> PeriodValue { throw ConfigError("period value: cannot parse '" + text + "'"); };

  bool negative = false;
  if (s[pos] == '-' || s[pos] == '+') negative = s[pos++] == '-';
  auto read_int = [&](std::int64_t& out) {
    const std::size_t start = pos;
    out = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (out > (INT64_MAX - 9) / 10) throw ConfigError("period value: number too large in '" + text + "'");
      out = out * 10 + (s[pos++] - '0');
    }
    return pos > start;
  };

  Rational coef(1);
  std::int64_t whole = 0;
  if (read_int(whole)) {
    coef = Rational(whole);
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      std::int64_t scale = 1, frac = 0;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        if (scale > INT64_MAX / 100) throw ConfigError("period value: too many decimals in '" + text + "'");
        frac = frac * 10 + (s[pos++] - '0');
        scale *= 10;
      }
      coef = coef + Rational(frac, scale);
    }
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      std::int64_t den = 0;
      if (!read_int(den) || den == 0) return fail();
      coef = coef / Rational(den);
    }
  }

  SymbolicUnit unit;
  while (pos < s.size()) {
    if (s.compare(pos, 4, "sqrt") == 0) {
      pos += 4;
      bool paren = pos < s.size() && s[pos] == '(';
      if (paren) ++pos;
      std::int64_t m = 0;
      if (!read_int(m) || m == 0) return fail();
      if (paren) {
        if (pos >= s.size() || s[pos] != ')') return fail();
        ++pos;
      }
      // pull square factors out of m, combine with the current radicand
      std::int64_t r = unit.radicand * m;
      std::int64_t outside = 1;
      for (std::int64_t p = 2; p * p <= r; ++p) {
        while (r % (p * p) == 0) {
          r /= p * p;
          outside *= p;
        }
      }
      unit.radicand = r;
      coef = coef * Rational(outside);
    } else if (s.compare(pos, 2, "pi") == 0 || s.compare(pos, 2, "\xcf\x80") == 0) {
      pos += 2;
      int power = 1;
      if (pos < s.size() && s[pos] == '^') {
        ++pos;
        std::int64_t pw = 0;
        if (!read_int(pw) || pw > 16) return fail();
        power = static_cast<int>(pw);
      }
      unit.pi_power += power;
    } else {
      throw ConfigError("period value: unknown symbol in '" + text + "'");
    }
  }
  if (negative) coef = Rational(0) - coef;
  return {coef, unit};
}

struct GammaValue {
  enum class Kind { Zero, Finite, Infinite };
  Kind kind = Kind::Infinite;
  PeriodValue value;

  double numeric() const {
    if (kind == Kind::Zero) return 0.0;
    if (kind == Kind::Infinite) return std::numeric_limits<double>::infinity();
    return value.value();
  }

  std::string to_string() const {
    if (kind == Kind::Zero) return "0";
    if (kind == Kind::Infinite) return "inf";
    return value.to_string();
  }
};

/// Positive generator of the subgroup of R generated by the values: 0 when it
/// is dense (two nonzero values with irrational ratio), infinity when it is
/// trivial.
inline GammaValue gamma_generator(const std::vector<PeriodValue>& generators) {
  GammaValue g;
  bool have = false;
  for (const auto& v : generators) {
    if (v.coefficient.is_zero()) continue;
    if (!have) {
      g.kind = GammaValue::Kind::Finite;
      g.value = {v.coefficient.abs(), v.unit};
      have = true;
      continue;
    }
    if (!(v.unit == g.value.unit)) {
      g.kind = GammaValue::Kind::Zero;
      g.value = {};
      return g;
    }
    g.value.coefficient = Rational::gcd(g.value.coefficient, v.coefficient);
  }
  return g;
}

inline GammaValue gamma_generator(const std::vector<std::string>& generators) {
  std::vector<PeriodValue> values;
  values.reserve(generators.size());
  for (const auto& s : generators) values.push_back(parse_period_value(s));
  return gamma_generator(values);
}

}  // namespace matherlab
