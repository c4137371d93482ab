#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "peakon/errors.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

/// Coefficients at or below this fraction of the cancellation scale are
/// treated as zero when deciding degrees in floating mode.
inline constexpr double kTrimRelative = 1e-12;

/// Radius (relative to 1 + |root|) within which numerical roots are merged
/// into one root of higher multiplicity.
inline constexpr double kClusterRelative = 1e-7;

/// Dense polynomial in the spectral parameter z, ascending coefficients.
/// The zero polynomial has no coefficients and degree -1.
template <Scalar T>
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<T> coeffs) : c_(std::move(coeffs)) { strip_zeros(); }
  Poly(std::initializer_list<T> coeffs) : Poly(std::vector<T>(coeffs)) {}

  static Poly constant(T v) { return Poly(std::vector<T>{std::move(v)}); }
  static Poly identity() { return Poly(std::vector<T>{T(0), T(1)}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<T>& coeffs() const { return c_; }
  T coeff(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : T(0); }
  T leading() const { return c_.empty() ? T(0) : c_.back(); }

  double max_abs() const {
    double m = 0;
    for (const auto& v : c_) m = std::max(m, std::abs(peakon::to_double(v)));
    return m;
  }

  /// Horner evaluation in the coefficient type or in any type constructible
  /// from double (double, long double, std::complex<...>).
  template <class U>
  U operator()(const U& z) const {
    U acc = U(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      if constexpr (std::is_same_v<U, T>) {
        acc = acc * z + *it;
      } else {
        using Real = decltype(std::abs(std::declval<U>()));
        acc = acc * z + U(static_cast<Real>(peakon::to_double(*it)));
      }
    }
    return acc;
  }

  Poly derivative() const {
    std::vector<T> d;
    for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(c_[k] * T(static_cast<long>(k)));
    return Poly(std::move(d));
  }

  /// Drops leading coefficients that are negligible next to `scale`.
  Poly trimmed(double scale, double rel = kTrimRelative) const {
    Poly out = *this;
    while (!out.c_.empty() && negligible(out.c_.back(), scale, rel)) out.c_.pop_back();
    return out;
  }

  Poly<double> to_double() const {
    std::vector<double> d;
    d.reserve(c_.size());
    for (const auto& v : c_) d.push_back(peakon::to_double(v));
    return Poly<double>(std::move(d));
  }

  friend Poly operator+(const Poly& a, const Poly& b) { return combine(a, b, T(1)); }
  friend Poly operator-(const Poly& a, const Poly& b) { return combine(a, b, T(-1)); }
  friend Poly operator-(const Poly& a) { return a * T(-1); }

  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> out(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(out));
  }

  friend Poly operator*(const Poly& a, const T& s) {
    std::vector<T> out = a.c_;
    for (auto& v : out) v *= s;
    return Poly(std::move(out));
  }
  friend Poly operator*(const T& s, const Poly& a) { return a * s; }

  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  static Poly combine(const Poly& a, const Poly& b, const T& sign) {
    std::vector<T> out(std::max(a.c_.size(), b.c_.size()), T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += sign * b.c_[i];
    return Poly(std::move(out)).trimmed(std::max(a.max_abs(), b.max_abs()));
  }

  void strip_zeros() {
    while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
  }

  std::vector<T> c_;
};

/// Coefficientwise conversion between floating backends (or from exact to floating).
template <Scalar W, Scalar T>
Poly<W> poly_cast(const Poly<T>& p) {
  if constexpr (std::is_same_v<W, T>) {
    return p;
  } else {
    std::vector<W> c;
    for (const auto& v : p.coeffs()) {
      if constexpr (is_exact_v<T>) {
        c.push_back(static_cast<W>(peakon::to_double(v)));
      } else {
        c.push_back(static_cast<W>(v));
      }
    }
    return Poly<W>(std::move(c));
  }
}

template <Scalar T>
struct QuotientRemainder {
  Poly<T> quotient;
  Poly<T> remainder;
};

/// Long division num = quotient * den + remainder with deg remainder < deg den.
template <Scalar T>
QuotientRemainder<T> poly_quotient(const Poly<T>& num, const Poly<T>& den) {
  if (den.is_zero()) throw std::invalid_argument("poly_quotient: zero divisor");
  const int n = num.degree();
  const int d = den.degree();
  if (n < d) return {Poly<T>{}, num};
  std::vector<T> rem = num.coeffs();
  std::vector<T> q(static_cast<std::size_t>(n - d + 1), T(0));
  const T lead = den.leading();
  for (int k = n - d; k >= 0; --k) {
    q[k] = rem[k + d] / lead;
    for (int j = 0; j < d; ++j) rem[k + j] -= q[k] * den.coeffs()[j];
    rem[k + d] = T(0);
  }
  rem.resize(static_cast<std::size_t>(d));
  Poly<T> quotient(std::move(q));
  const double scale = std::max(num.max_abs(), quotient.max_abs() * den.max_abs());
  return {quotient, Poly<T>(std::move(rem)).trimmed(scale)};
}

/// Monic greatest common divisor (exact mode only).
inline Poly<Rational> poly_gcd(Poly<Rational> a, Poly<Rational> b) {
  while (!b.is_zero()) {
    auto r = poly_quotient(a, b).remainder;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a * Rational(1 / a.leading());
}

/// Division known to be exact; the remainder is discarded.
template <Scalar T>
Poly<T> exact_divide(const Poly<T>& a, const Poly<T>& b) {
  return poly_quotient(a, b).quotient;
}

template <Scalar T>
struct RealRoot {
  T value;
  int multiplicity = 1;
  /// Exact mode only: the value is the root itself rather than an approximation.
  bool exact = false;
};

namespace detail {

using cplx = std::complex<long double>;

template <class C>
cplx horner(const std::vector<long double>& c, const C& z) {
  cplx acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * cplx(z) + *it;
  return acc;
}

/// All complex roots of a polynomial with nonzero constant term: scaled
/// companion eigenvalues, then simultaneous Aberth correction in long double.
inline std::vector<cplx> complex_roots(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  std::vector<double> monic(c.size());
  for (int k = 0; k <= n; ++k) monic[k] = c[k] / c[n];
  double rho = 0;
  for (int k = 0; k < n; ++k) {
    if (monic[k] != 0) rho = std::max(rho, std::pow(std::abs(monic[k]), 1.0 / (n - k)));
  }
  if (rho == 0) rho = 1;

  std::vector<cplx> z(static_cast<std::size_t>(n));
  if (n == 1) {
    z[0] = -monic[0];
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -monic[i] / std::pow(rho, n - i);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    auto ev = solver.eigenvalues();
    for (int i = 0; i < n; ++i) z[i] = cplx(ev[i].real(), ev[i].imag()) * static_cast<long double>(rho);
  }

  std::vector<long double> cl(c.begin(), c.end());
  std::vector<long double> dl;
  for (int k = 1; k <= n; ++k) dl.push_back(static_cast<long double>(k) * cl[k]);
  for (int iter = 0; iter < 80; ++iter) {
    long double worst = 0;
    for (int k = 0; k < n; ++k) {
      cplx p = horner(cl, z[k]);
      if (p == cplx(0)) continue;
      cplx dp = horner(dl, z[k]);
      cplx ratio = p / dp;
      cplx repel = 0;
      for (int j = 0; j < n; ++j) {
        if (j != k && z[j] != z[k]) repel += cplx(1) / (z[k] - z[j]);
      }
      cplx step = ratio / (cplx(1) - ratio * repel);
      if (!std::isfinite(std::abs(step))) continue;
      z[k] -= step;
      worst = std::max(worst, std::abs(step) / (1 + std::abs(z[k])));
    }
    if (worst < 1e-18L) break;
  }
  return z;
}

struct Cluster {
  cplx center;
  int count;
};

inline std::vector<Cluster> cluster(std::vector<cplx> z) {
  std::sort(z.begin(), z.end(), [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
  std::vector<int> owner(z.size());
  std::iota(owner.begin(), owner.end(), 0);
  auto find = [&](int i) {
    while (owner[i] != i) i = owner[i] = owner[owner[i]];
    return i;
  };
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      long double radius = kClusterRelative * (1 + std::max(std::abs(z[i]), std::abs(z[j])));
      if (std::abs(z[i] - z[j]) <= radius) owner[find(static_cast<int>(j))] = find(static_cast<int>(i));
    }
  }
  std::vector<Cluster> out;
  std::vector<int> slot(z.size(), -1);
  for (std::size_t i = 0; i < z.size(); ++i) {
    int r = find(static_cast<int>(i));
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.push_back({0, 0});
    }
    out[slot[r]].center += z[i];
    out[slot[r]].count += 1;
  }
  for (auto& c : out) c.center /= static_cast<long double>(c.count);
  return out;
}

/// Real roots with multiplicities of a double-coefficient polynomial.
/// Returns false through `all_real` when a nonreal cluster was found.
inline std::vector<std::pair<long double, int>> numeric_real_roots(const Poly<double>& p, bool& all_real) {
  all_real = true;
  std::vector<std::pair<long double, int>> out;
  const auto& c = p.coeffs();
  std::size_t zeros = 0;
  while (zeros < c.size() && c[zeros] == 0.0) ++zeros;
  if (zeros > 0) out.emplace_back(0.0L, static_cast<int>(zeros));
  std::vector<double> rest(c.begin() + static_cast<long>(zeros), c.end());
  if (rest.size() < 2) return out;

  std::vector<long double> cl(rest.begin(), rest.end());
  std::vector<long double> dl;
  for (std::size_t k = 1; k < cl.size(); ++k) dl.push_back(static_cast<long double>(k) * cl[k]);
  for (const auto& cl_ : cluster(complex_roots(rest))) {
    long double radius = kClusterRelative * (1 + std::abs(cl_.center));
    if (std::abs(cl_.center.imag()) > radius) {
      all_real = false;
      continue;
    }
    long double x = cl_.center.real();
    if (cl_.count == 1) {
      // Newton on the real axis; keeps the step only while it helps.
      for (int it = 0; it < 8; ++it) {
        long double px = horner(cl, x).real();
        long double dx = horner(dl, x).real();
        if (dx == 0) break;
        long double next = x - px / dx;
        if (std::abs(horner(cl, next).real()) >= std::abs(px)) break;
        x = next;
      }
    }
    out.emplace_back(x, cl_.count);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Poly<Rational>> square_free_factors(const Poly<Rational>& p) {
  // Yun: p = lead * prod factors[i]^(i+1).
  std::vector<Poly<Rational>> factors;
  Poly<Rational> dp = p.derivative();
  Poly<Rational> g = poly_gcd(p, dp);
  Poly<Rational> w = exact_divide(p, g);
  Poly<Rational> y = exact_divide(dp, g);
  Poly<Rational> z = y - w.derivative();
  while (w.degree() > 0) {
    Poly<Rational> h = poly_gcd(w, z);
    factors.push_back(h);
    w = exact_divide(w, h);
    y = exact_divide(z, h);
    z = y - w.derivative();
  }
  return factors;
}

inline int sign_at_infinity(const Poly<Rational>& p, bool positive) {
  int s = sgn(p.leading());
  return (positive || p.degree() % 2 == 0) ? s : -s;
}

/// Number of distinct real roots (Sturm sequence).
inline int sturm_count(const Poly<Rational>& p) {
  if (p.degree() < 1) return 0;
  std::vector<Poly<Rational>> seq{p, p.derivative()};
  while (!seq.back().is_zero()) {
    auto r = poly_quotient(seq[seq.size() - 2], seq.back()).remainder;
    if (r.is_zero()) break;
    seq.push_back(-r);
  }
  auto changes = [&](bool positive) {
    int count = 0, prev = 0;
    for (const auto& q : seq) {
      int s = sign_at_infinity(q, positive);
      if (s == 0) continue;
      if (prev != 0 && s != prev) ++count;
      prev = s;
    }
    return count;
  };
  return changes(false) - changes(true);
}

}  // namespace detail

/// Real roots sorted ascending with multiplicities. With `expect_real_rooted`
/// a nonreal factor raises NotRealRooted; otherwise nonreal roots are skipped.
template <Scalar T>
std::vector<RealRoot<T>> real_roots(const Poly<T>& p, bool expect_real_rooted) {
  if (p.is_zero()) throw std::invalid_argument("real_roots: zero polynomial");
  std::vector<RealRoot<T>> out;
  if constexpr (!is_exact_v<T>) {
    bool all_real = true;
    for (auto [x, mult] : detail::numeric_real_roots(p, all_real)) {
      out.push_back({static_cast<double>(x), mult, false});
    }
    if (expect_real_rooted && !all_real) fail(ErrorCode::NotRealRooted, "polynomial has nonreal roots");
  } else {
    const auto factors = detail::square_free_factors(p);
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const Poly<Rational>& f = factors[i];
      if (f.degree() < 1) continue;
      const int real_count = detail::sturm_count(f);
      if (expect_real_rooted && real_count < f.degree()) {
        fail(ErrorCode::NotRealRooted, "polynomial has nonreal roots");
      }
      bool all_real = true;
      auto approx = detail::numeric_real_roots(f.to_double(), all_real);
      if (static_cast<int>(approx.size()) != real_count) {
        fail(ErrorCode::NotRealRooted, "numeric root count disagrees with Sturm count");
      }
      for (auto [x, mult] : approx) {
        (void)mult;
        RealRoot<Rational> root{Rational(static_cast<double>(x)), static_cast<int>(i + 1), false};
        if (auto q = nearby_rational(static_cast<double>(x), 1e-9); q && sgn(f(*q)) == 0) {
          root.value = *q;
          root.exact = true;
        } else if (sgn(f(root.value)) == 0) {
          root.exact = true;
        }
        out.push_back(std::move(root));
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  }
  return out;
}

/// Ratio of two polynomials, normalized to a monic denominator.
template <Scalar T>
class RatFunc {
 public:
  RatFunc(Poly<T> num, Poly<T> den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::invalid_argument("RatFunc: zero denominator");
    T lead = den_.leading();
    if (lead != T(1)) {
      T inv = T(1) / lead;
      num_ = num_ * inv;
      den_ = den_ * inv;
    }
  }

  const Poly<T>& num() const { return num_; }
  const Poly<T>& den() const { return den_; }

  template <class U>
  U operator()(const U& z) const {
    return num_(z) / den_(z);
  }

  /// Cancels common roots: exactly via gcd in rational mode, and common real
  /// roots of the denominator (up to tolerance) in floating mode.
  RatFunc reduced() const {
    if constexpr (is_exact_v<T>) {
      if (num_.is_zero()) return RatFunc(num_, Poly<T>::constant(T(1)));
      auto g = poly_gcd(num_, den_);
      return RatFunc(exact_divide(num_, g), exact_divide(den_, g));
    } else {
      Poly<T> num = num_, den = den_;
      bool changed = true;
      while (changed && den.degree() > 0 && !num.is_zero()) {
        changed = false;
        for (const auto& r : real_roots(den, false)) {
          double scale = 0, pow = 1;
          for (double c : num.coeffs()) {
            scale += std::abs(c) * pow;
            pow *= std::abs(r.value);
          }
          if (std::abs(num(r.value)) <= 1e-9 * scale) {
            Poly<T> factor{-r.value, 1.0};
            num = exact_divide(num, factor);
            den = exact_divide(den, factor);
            changed = true;
            break;
          }
        }
      }
      return RatFunc(num, den);
    }
  }

 private:
  Poly<T> num_;
  Poly<T> den_;
};

template <Scalar T>
struct Pole {
  T location;
  /// Coefficient g of the term g / (location - z), i.e. minus the classical residue.
  T residue;
};

/// linear * z + constant + sum residue / (location - z)
template <Scalar T>
struct PartialFraction {
  T linear{};
  T constant{};
  std::vector<Pole<T>> poles;

  template <class U>
  U operator()(const U& z) const {
    auto cv = [](const T& v) {
      if constexpr (std::is_same_v<U, T>) {
        return v;
      } else {
        using Real = decltype(std::abs(std::declval<U>()));
        return U(static_cast<Real>(peakon::to_double(v)));
      }
    };
    U acc = cv(linear) * z + cv(constant);
    for (const auto& p : poles) acc += cv(p.residue) / (cv(p.location) - z);
    return acc;
  }
};

template <Scalar T>
PartialFraction<T> partial_fractions(const RatFunc<T>& f) {
  if (f.num().degree() > f.den().degree() + 1) {
    fail(ErrorCode::PoleStructure, "numerator degree exceeds denominator degree + 1");
  }
  auto [quotient, remainder] = poly_quotient(f.num(), f.den());
  PartialFraction<T> out;
  out.linear = quotient.coeff(1);
  out.constant = quotient.coeff(0);
  if (f.den().degree() < 1) return out;

  std::vector<RealRoot<T>> poles;
  try {
    poles = real_roots(f.den(), true);
  } catch (const SpectralError&) {
    fail(ErrorCode::PoleStructure, "nonreal pole");
  }
  const Poly<T> dden = f.den().derivative();
  for (const auto& p : poles) {
    if (p.multiplicity != 1) fail(ErrorCode::PoleStructure, "multiple pole");
    out.poles.push_back({p.value, -(remainder(p.value) / dden(p.value))});
  }
  return out;
}

}  // namespace peakon
