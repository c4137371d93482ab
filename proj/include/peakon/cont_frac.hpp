#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "peakon/errors.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/poly.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

/// q(z) = q0 + q1 z
template <Scalar T>
struct LinearBlock {
  T q0{};
  T q1{};
};

/// Coefficients of the finite continued fraction
///   m(z) = 1/(-l_1 z + 1/(q_1(z) + 1/(-l_2 z + ... + 1/(q_N(z) + 1/(-l_{N+1} z)))))
template <Scalar T>
struct CFData {
  std::vector<T> ls;               // l_1 .. l_{N+1}
  std::vector<LinearBlock<T>> qs;  // q_1 .. q_N

  T total_length() const {
    T sum = T(0);
    for (const auto& l : ls) sum += l;
    return sum;
  }
};

/// l_n are differences of 2 tanh((x_n - a)/2); q_n = (omega_n + z upsilon_n) cosh^2((x_n - a)/2).
template <Scalar T>
CFData<T> cf_from_pair(const PeakonPair<T>& pair) {
  CFData<T> cf;
  T t_prev = T(0);
  for (const auto& n : pair.nodes()) {
    cf.ls.push_back(T(2 * (n.tanh_half - t_prev)));
    const T cosh_sq = T(1) / (1 - n.tanh_half * n.tanh_half);
    cf.qs.push_back({T(n.omega * cosh_sq), T(n.upsilon * cosh_sq)});
    t_prev = n.tanh_half;
  }
  cf.ls.push_back(T(2 * (pair.period().tanh_half() - t_prev)));
  return cf;
}

/// Bottom-up evaluation of the continued fraction.
template <Scalar T>
std::complex<double> cf_evaluate(const CFData<T>& cf, std::complex<double> z) {
  using C = std::complex<double>;
  if (cf.ls.size() != cf.qs.size() + 1) throw std::invalid_argument("cf_evaluate: malformed CFData");
  auto check = [](const C& v, double scale) {
    if (!std::isfinite(std::abs(v)) || std::abs(v) <= 1e-14 * scale) fail(ErrorCode::PoleHit, "denominator vanishes");
  };
  const double zn = std::abs(z);
  C acc = -to_double(cf.ls.back()) * z;
  check(acc, 1 + std::abs(to_double(cf.ls.back())) * zn);
  for (std::size_t n = cf.qs.size(); n-- > 0;) {
    const double q0 = to_double(cf.qs[n].q0), q1 = to_double(cf.qs[n].q1);
    C block = q0 + q1 * z + C(1) / acc;
    check(block, std::abs(q0) + std::abs(q1) * zn + 1 / std::abs(acc));
    const double l = to_double(cf.ls[n]);
    acc = -l * z + C(1) / block;
    check(acc, l * zn + 1 / std::abs(block));
  }
  return C(1) / acc;
}

namespace detail {

/// Keeps coefficients of degree <= max_degree.
template <Scalar T>
Poly<T> truncate(const Poly<T>& p, int max_degree) {
  if (p.degree() <= max_degree) return p;
  std::vector<T> c(p.coeffs().begin(), p.coeffs().begin() + (max_degree + 1));
  return Poly<T>(std::move(c));
}

}  // namespace detail

/// Relative level below which an intermediate coefficient is zero outright.
inline constexpr double kExtractZero = 1e-10;

/// Relative level below which a coefficient that should cancel may be
/// rounding noise carried in from the data. Both readings are tried, the
/// simpler structure first.
inline constexpr double kExtractAmbiguous = 1e-4;

namespace detail {

template <Scalar T>
class Extraction {
 public:
  Extraction(double l_tol, std::size_t max_results) : l_tol_(l_tol), max_results_(max_results) {}

  std::vector<CFData<T>> results;
  std::optional<SpectralError> first_error;

  void run(Poly<T> num, Poly<T> den, int budget) {
    if (budget < 0) fail(ErrorCode::NotAdmissible, "continued fraction exceeds the degree bound");
    if constexpr (!is_exact_v<T>) {
      const double s = den.max_abs();
      num = num * T(1 / s);
      den = den * T(1 / s);
    }
    const std::size_t k = cf_.ls.size() + 1;
    // den/num = -l z + g
    T l = T(0);
    if (den.degree() > num.degree() + 1) {
      fail(ErrorCode::NotAdmissible, "1/m grows faster than linearly");
    } else if (den.degree() == num.degree() + 1) {
      l = -den.leading() / num.leading();
    }
    if (k == 1) {
      if (l < T(-l_tol_)) fail(ErrorCode::NotAdmissible, "l_1 = " + std::to_string(to_double(l)) + " is negative");
      if (abs_value(l) <= T(l_tol_)) l = T(0);
    } else if (!(l > T(l_tol_))) {
      fail(ErrorCode::NotAdmissible, "l_" + std::to_string(k) + " is not positive");
    }

    const double cancel_scale = std::max(den.max_abs(), std::abs(to_double(l)) * num.max_abs());
    const Poly<T> g_full =
        truncate(den + Poly<T>(std::vector<T>{T(0), l}) * num, num.degree()).trimmed(cancel_scale, kExtractZero);
    std::vector<Poly<T>> options;
    if (g_full.is_zero()) {
      options.push_back({});
    } else {
      if (!is_exact_v<T> && g_full.max_abs() <= kExtractAmbiguous * cancel_scale) options.push_back({});
      if (!is_exact_v<T> && g_full.degree() == num.degree() && g_full.degree() > 0 &&
          std::abs(to_double(g_full.leading())) <= kExtractAmbiguous * g_full.max_abs()) {
        options.push_back(truncate(g_full, g_full.degree() - 1));
      }
      options.push_back(g_full);
    }

    for (const auto& g_num : options) {
      if (results.size() >= max_results_) return;
      const std::size_t ls_size = cf_.ls.size(), qs_size = cf_.qs.size();
      try {
        cf_.ls.push_back(l);
        if (g_num.is_zero()) {
          results.push_back(cf_);
        } else {
          step(num, g_num, k, budget);
        }
      } catch (const SpectralError& e) {
        if (e.code() != ErrorCode::NotAdmissible) throw;
        if (!first_error) first_error = e;
      }
      cf_.ls.resize(ls_size);
      cf_.qs.resize(qs_size);
    }
  }

 private:
  // 1/g = num / g_num = q_k(z) + rem / g_num
  void step(const Poly<T>& num, const Poly<T>& g_num, std::size_t k, int budget) {
    auto [q, rem] = poly_quotient(num, g_num);
    if (q.degree() > 1) fail(ErrorCode::NotAdmissible, "q_" + std::to_string(k) + " has degree above one");
    T q0 = q.coeff(0), q1 = q.coeff(1);
    const double q_scale = std::max(std::abs(to_double(q0)), std::abs(to_double(q1)));
    if (q.is_zero() || q_scale <= kExtractZero * num.max_abs() / g_num.max_abs()) {
      fail(ErrorCode::NotAdmissible, "q_" + std::to_string(k) + " vanishes");
    }
    if (negligible(q1, q_scale, kExtractZero)) q1 = T(0);
    const bool ambiguous = !is_exact_v<T> && q1 != T(0) && negligible(q1, q_scale, kExtractAmbiguous);
    if (q1 < T(0) && !ambiguous) fail(ErrorCode::NotAdmissible, "q_" + std::to_string(k) + " has negative z-coefficient");
    if (rem.is_zero() || rem.max_abs() <= kExtractZero * num.max_abs()) {
      fail(ErrorCode::NotAdmissible, "continued fraction does not end with a linear term");
    }
    std::vector<T> q1_options{T(0)};
    if (q1 > T(0)) q1_options = ambiguous ? std::vector<T>{T(0), q1} : std::vector<T>{q1};
    const std::size_t qs_size = cf_.qs.size();
    std::optional<SpectralError> error;
    for (const auto& v : q1_options) {
      try {
        cf_.qs.push_back({q0, v});
        run(rem, g_num, budget - 1);
      } catch (const SpectralError& e) {
        if (e.code() != ErrorCode::NotAdmissible) throw;
        if (!error) error = e;
      }
      cf_.qs.resize(qs_size);
    }
    if (error) throw *error;
  }

  double l_tol_;
  std::size_t max_results_;
  CFData<T> cf_;
};

}  // namespace detail

/// All admissible continued fractions of a rational Weyl function (at most
/// `max_results`), most structured reading first. Each one comes from
/// repeated extraction of the linear term at infinity (giving -l_k z) and of
/// the polynomial part of the reciprocal remainder (giving q_k). Exact mode
/// has no ambiguity and yields at most one.
template <Scalar T>
std::vector<CFData<T>> stieltjes_candidates(const RatFunc<T>& m, std::size_t max_results = 16) {
  const Poly<T>& num = m.num();
  const Poly<T>& den = m.den();
  if (num.is_zero()) fail(ErrorCode::NotAdmissible, "m vanishes identically");
  if (!negligible(den.coeff(0), den.max_abs(), kTrimRelative) || negligible(num.coeff(0), num.max_abs(), kTrimRelative)) {
    fail(ErrorCode::NotAdmissible, "m has no pole at zero");
  }
  // -lim_{z->0} 1/(z m(z)) = sum l_n
  const T total = -den.coeff(1) / num.coeff(0);
  if (!(total > T(0))) fail(ErrorCode::NotAdmissible, "residue of m at zero has the wrong sign");

  detail::Extraction<T> ex(1e-10 * to_double(total) / 2, max_results);
  ex.run(num, den, num.degree() + den.degree() + 2);
  if (ex.results.empty()) throw *ex.first_error;
  return std::move(ex.results);
}

template <Scalar T>
CFData<T> stieltjes_extract(const RatFunc<T>& m) {
  return stieltjes_candidates(m, 1).front();
}

}  // namespace peakon
