#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "peakon/errors.hpp"

namespace peakon {

using Rational = mpq_class;

/// Working precision for the floating-mode inverse maps.
using Extended = boost::multiprecision::cpp_bin_float_50;

// Scalar backends. Floating mode decides "zero" against a relative threshold,
// exact mode decides it by equality.
template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double to_double(double v) { return v; }
  static double abs(double v) { return std::abs(v); }
};

template <>
struct scalar_traits<long double> {
  static constexpr bool exact = false;
  static double to_double(long double v) { return static_cast<double>(v); }
  static long double abs(long double v) { return std::fabs(v); }
};

template <>
struct scalar_traits<Extended> {
  static constexpr bool exact = false;
  static double to_double(const Extended& v) { return static_cast<double>(v); }
  static Extended abs(const Extended& v) { return boost::multiprecision::abs(v); }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static double to_double(const Rational& v) { return v.get_d(); }
  static Rational abs(const Rational& v) { return ::abs(v); }
};

template <class T>
concept Scalar = requires { scalar_traits<T>::exact; };

template <Scalar T>
inline constexpr bool is_exact_v = scalar_traits<T>::exact;

template <Scalar T>
double to_double(const T& v) {
  return scalar_traits<T>::to_double(v);
}

template <Scalar T>
T abs_value(const T& v) {
  return scalar_traits<T>::abs(v);
}

/// True when `v` counts as zero next to a quantity of magnitude `scale`.
template <Scalar T>
bool negligible(const T& v, double scale, double rel) {
  if constexpr (is_exact_v<T>) {
    return sgn(v) == 0;
  } else {
    return std::abs(scalar_traits<T>::to_double(v)) <= rel * scale;
  }
}

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Exact binary value of a double.
inline Rational rationalize(double v) { return Rational(v); }

/// Square root of a rational, if it is a rational square.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  const mpz_class& n = q.get_num();
  const mpz_class& d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) {
    return std::nullopt;
  }
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  Rational r(rn, rd);
  r.canonicalize();
  return r;
}

/// Continued-fraction convergent of `x` with the smallest denominator that
/// reproduces `x` to `rel` relative accuracy, or nullopt if none exists below
/// `max_den`.
inline std::optional<Rational> nearby_rational(double x, double rel, double max_den = 1e9) {
  if (!std::isfinite(x)) return std::nullopt;
  if (x == 0.0) return Rational(0);
  double rest = x;
  // h/k walks the convergents a0, a0 + 1/a1, ...
  mpz_class h(1), h_prev(0), k(0), k_prev(1);
  for (int iter = 0; iter < 64; ++iter) {
    double a = std::floor(rest);
    mpz_class ai(a);
    mpz_class h_next = ai * h + h_prev;
    mpz_class k_next = ai * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    if (k.get_d() > max_den) return std::nullopt;
    Rational candidate(h, k);
    candidate.canonicalize();
    if (std::abs(candidate.get_d() - x) <= rel * std::abs(x)) return candidate;
    double frac = rest - a;
    if (frac == 0.0) return std::nullopt;
    rest = 1.0 / frac;
  }
  return std::nullopt;
}

/// Parses "p/q", an integer, or a decimal literal (decimals are read exactly,
/// e.g. "0.1" is 1/10).
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&]() -> Rational { throw std::invalid_argument("not a rational literal: '" + s + "'"); };
  if (s.empty()) return bad();
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational q(mpz_class(s.substr(0, slash), 10), mpz_class(s.substr(slash + 1), 10));
      if (q.get_den() == 0) return bad();
      q.canonicalize();
      return q;
    }
    auto exp_pos = s.find_first_of("eE");
    std::string mantissa = s.substr(0, exp_pos);
    long exponent = exp_pos == std::string::npos ? 0 : std::stol(s.substr(exp_pos + 1));
    bool negative = !mantissa.empty() && mantissa[0] == '-';
    if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) mantissa.erase(0, 1);
    std::string digits;
    long decimals = 0;
    bool seen_point = false;
    for (char ch : mantissa) {
      if (ch == '.') {
        if (seen_point) return bad();
        seen_point = true;
      } else if (ch >= '0' && ch <= '9') {
        digits.push_back(ch);
        if (seen_point) ++decimals;
      } else {
        return bad();
      }
    }
    if (digits.empty()) return bad();
    mpz_class num(digits, 10);
    if (negative) num = -num;
    long shift = exponent - decimals;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    Rational q = shift < 0 ? Rational(num, pow10) : Rational(num * pow10);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    return bad();
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Real number extended by the two infinities. Used for Dirichlet eigenvalues
/// that sit at the end of an outermost gap.
template <Scalar T>
struct ExtendedReal {
  enum class Kind { finite, pos_inf, neg_inf };

  Kind kind = Kind::finite;
  T value{};

  static ExtendedReal finite(T v) { return {Kind::finite, std::move(v)}; }
  static ExtendedReal pos_inf() { return {Kind::pos_inf, T{}}; }
  static ExtendedReal neg_inf() { return {Kind::neg_inf, T{}}; }

  bool is_finite() const { return kind == Kind::finite; }

  double to_double() const {
    switch (kind) {
      case Kind::pos_inf: return std::numeric_limits<double>::infinity();
      case Kind::neg_inf: return -std::numeric_limits<double>::infinity();
      default: return peakon::to_double(value);
    }
  }

  friend bool operator==(const ExtendedReal& x, const ExtendedReal& y) {
    return x.kind == y.kind && (x.kind != Kind::finite || x.value == y.value);
  }
};

/// Period length together with the hyperbolic values of its half. In exact
/// mode the period is specified through tanh(l/2), which must make
/// cosh(l/2) = 1/sqrt(1 - tanh^2(l/2)) rational.
template <Scalar T>
class Period {
 public:
  static Period from_length(double ell) requires(!is_exact_v<T>) {
    if (!(ell > 0.0) || !std::isfinite(ell)) fail(ErrorCode::InvalidPair, "period length must be positive");
    Period p;
    p.length_ = ell;
    p.tanh_ = std::tanh(ell / 2);
    p.cosh_ = std::cosh(ell / 2);
    p.sinh_ = std::sinh(ell / 2);
    return p;
  }

  static Period from_tanh_half(const T& t) {
    if (!(t > 0) || !(t < 1)) fail(ErrorCode::InvalidPair, "tanh(l/2) must lie in (0, 1)");
    if constexpr (is_exact_v<T>) {
      auto root = exact_sqrt(Rational(1 - t * t));
      if (!root) {
        fail(ErrorCode::NonPythagoreanPeriod,
             "1 - tanh(l/2)^2 = " + to_string(Rational(1 - t * t)) + " is not a rational square");
      }
      Period p;
      p.tanh_ = t;
      p.cosh_ = 1 / *root;
      p.sinh_ = t / *root;
      p.length_ = 2 * std::atanh(t.get_d());
      return p;
    } else {
      return from_length(2 * std::atanh(t));
    }
  }

  double length() const { return length_; }
  const T& tanh_half() const { return tanh_; }
  const T& cosh_half() const { return cosh_; }
  const T& sinh_half() const { return sinh_; }
  T coth_half() const { return T(1) / tanh_; }

 private:
  double length_ = 0;
  T tanh_{}, cosh_{}, sinh_{};
};

}  // namespace peakon
