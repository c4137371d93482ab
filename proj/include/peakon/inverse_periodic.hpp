#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "peakon/errors.hpp"
#include "peakon/forward_spectral.hpp"
#include "peakon/inverse_dirichlet.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/poly.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

/// Tolerance for accepting a divisor component as a point of the torus.
inline constexpr double kTorusTolerance = 1e-8;

/// Checks that `delta` is the discriminant of some pair with period `period`
/// (normalization at zero, real zeros, no critical value inside (-1, 1)) and
/// returns its gap structure.
template <Scalar T>
GapStructure<T> validate_discriminant(const Poly<T>& delta, const Period<T>& period) {
  const T d0 = delta.coeff(0);
  const T& ch = period.cosh_half();
  if constexpr (is_exact_v<T>) {
    if (d0 != ch) fail(ErrorCode::BadNormalization, "Delta(0) differs from cosh(l/2)");
  } else {
    if (std::abs(d0 - ch) > 1e-10 * ch) fail(ErrorCode::BadNormalization, "Delta(0) differs from cosh(l/2)");
  }
  if (delta.degree() >= 1) {
    for (const auto& r : real_roots(delta, true)) {
      if (r.multiplicity > 1) fail(ErrorCode::CriticalValueInsideBand, "Delta has a multiple zero");
    }
  }
  if (delta.degree() >= 2) {
    for (const auto& r : real_roots(delta.derivative(), false)) {
      const double v = to_double(delta(r.value));
      if (std::abs(v) < 1 - 1e-10) {
        fail(ErrorCode::CriticalValueInsideBand, "critical value " + std::to_string(v) + " inside (-1, 1)");
      }
    }
  }
  return gap_structure(delta);
}

/// A point of the Dirichlet divisor: one component per gap, in gap order.
template <Scalar T>
using DivisorPoint = std::vector<DivisorComponent<T>>;

template <Scalar T>
struct PeriodicData {
  Poly<T> delta;
  DivisorPoint<T> divisor;
};

template <Scalar T>
PeriodicData<T> periodic_data(const PeakonPair<T>& pair) {
  auto fw = analyze(pair);
  return {std::move(fw.delta), std::move(fw.dirichlet.divisor)};
}

/// varsigma(z) = 2 sinh(l/2) prod over finite kappa of (1 - z/kappa)
template <Scalar T>
Poly<T> varsigma(const DivisorPoint<T>& divisor, const Period<T>& period) {
  Poly<T> out = Poly<T>::constant(T(2 * period.sinh_half()));
  for (const auto& c : divisor) {
    if (c.kappa.is_finite()) out = out * Poly<T>{T(1), T(-1 / c.kappa.value)};
  }
  return out;
}

namespace detail {

template <Scalar T>
double periodic_mismatch(const PeriodicData<T>& got, const Poly<T>& delta, const DivisorPoint<T>& divisor) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, delta.max_abs());
  double r = 0;
  for (int k = 0; k <= std::max(delta.degree(), got.delta.degree()); ++k) {
    r = std::max(r, std::abs(to_double(T(delta.coeff(k) - got.delta.coeff(k)))) / scale);
  }
  if (got.divisor.size() != divisor.size()) return inf;
  for (std::size_t i = 0; i < divisor.size(); ++i) {
    const auto& want = divisor[i];
    const auto& have = got.divisor[i];
    if (want.kappa.is_finite() != have.kappa.is_finite()) return inf;
    if (want.kappa.is_finite()) {
      r = std::max(r, rel_diff(to_double(want.kappa.value), to_double(have.kappa.value)));
    } else if (want.kappa.kind != have.kappa.kind) {
      return inf;
    }
    r = std::max(r, std::abs(to_double(want.zeta) - to_double(have.zeta)) / (1 + std::abs(to_double(want.zeta))));
  }
  return r;
}

/// Misfit of the periodic data of `pair` against (delta, divisor), one entry
/// per coefficient of Delta and two per divisor component.
inline std::optional<Eigen::VectorXd> periodic_misfit(const PeakonPair<double>& pair, const Poly<double>& delta,
                                                      const DivisorPoint<double>& divisor) {
  const auto got = periodic_data(pair);
  if (got.divisor.size() != divisor.size() || got.delta.degree() != delta.degree()) return std::nullopt;
  const double scale = std::max(1.0, delta.max_abs());
  Eigen::VectorXd r(delta.degree() + 1 + 2 * static_cast<Eigen::Index>(divisor.size()));
  Eigen::Index k = 0;
  for (int j = 0; j <= delta.degree(); ++j) r[k++] = (got.delta.coeff(j) - delta.coeff(j)) / scale;
  for (std::size_t i = 0; i < divisor.size(); ++i) {
    const auto &want = divisor[i], &have = got.divisor[i];
    if (want.kappa.is_finite() != have.kappa.is_finite()) return std::nullopt;
    r[k++] = want.kappa.is_finite()
                 ? (have.kappa.value - want.kappa.value) / std::max(1.0, std::abs(want.kappa.value))
                 : 0.0;
    r[k++] = (have.zeta - want.zeta) / (1 + std::abs(want.zeta));
  }
  return r;
}

}  // namespace detail

/// Pair from its discriminant and a divisor point on the torus. The base-point
/// masses come from the polynomial part of -(2 Delta - 2)/(z varsigma), the
/// norming constants from 1/(kappa varsigma'(kappa) (Delta(kappa) - zeta)).
template <Scalar T>
Reconstruction<T> solve_periodic(const Poly<T>& delta, const DivisorPoint<T>& divisor, const Period<T>& period,
                                 double a = 0) {
  const auto gs = validate_discriminant(delta, period);
  if (divisor.size() != gs.gaps.size()) {
    fail(ErrorCode::DivisorOffTorus, "divisor has " + std::to_string(divisor.size()) + " components, torus has " +
                                         std::to_string(gs.gaps.size()));
  }
  for (std::size_t i = 0; i < divisor.size(); ++i) {
    const int index = gs.gaps[i].index;
    if (divisor[i].gap != 0 && divisor[i].gap != index) {
      fail(ErrorCode::DivisorOffTorus, "component " + std::to_string(i + 1) + " is labelled with the wrong gap");
    }
    if (!gs.on_torus(index, divisor[i].kappa, divisor[i].zeta, kTorusTolerance)) {
      fail(ErrorCode::DivisorOffTorus, "component " + std::to_string(i + 1) + " is not on the torus over gap " +
                                           std::to_string(index));
    }
  }

  const Poly<T> sigma = varsigma(divisor, period);
  const Poly<T> two_delta_minus_two = delta * T(2) - Poly<T>::constant(T(2));
  auto [q, rem] = poly_quotient(-two_delta_minus_two, Poly<T>::identity() * sigma);
  if (q.degree() > 1) fail(ErrorCode::InternalInconsistency, "base-point quotient has degree above one");

  DirichletSpectralInput<T> in{{}, q.coeff(0), q.coeff(1), period, a};
  if (in.upsilon_a < T(0)) fail(ErrorCode::NegativeUpsilonA, "upsilon_a = " + std::to_string(to_double(in.upsilon_a)));

  const Poly<T> sigma_dot = sigma.derivative();
  for (const auto& c : divisor) {
    if (!c.kappa.is_finite()) continue;
    const T& kappa = c.kappa.value;
    T gamma;
    if constexpr (is_exact_v<T>) {
      gamma = T(1) / (kappa * sigma_dot(kappa) * T(delta(kappa) - c.zeta));
    } else {
      // Delta^2 - zeta^2 = 1 on the torus: take Delta - zeta from whichever
      // of the two factors does not cancel.
      const long double k = kappa, d = delta(k), z = c.zeta;
      const long double sp = (d > 0) == (z > 0) && z != 0 ? 1 / (d + z) : d - z;
      gamma = static_cast<T>(1 / (k * sigma_dot(k) * sp));
    }
    if (!(gamma > T(0))) {
      fail(ErrorCode::NonpositiveGamma, "norming constant at kappa = " + std::to_string(to_double(kappa)) + " is not positive");
    }
    in.spectrum.push_back({kappa, gamma});
  }

  auto rec = solve_dirichlet(in);
  auto mismatch = [&](const PeakonPair<T>& p) {
    try {
      return detail::periodic_mismatch(periodic_data(p), delta, divisor);
    } catch (const SpectralError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double residual = mismatch(rec.pair);
  if constexpr (!is_exact_v<T>) {
    auto misfit = [&](const PeakonPair<double>& p) { return detail::periodic_misfit(p, delta, divisor); };
    if (residual > 1e-12) {
      auto polished = detail::refine(rec.pair, misfit);
      if (double r = mismatch(polished); r < residual) {
        rec.pair = std::move(polished);
        residual = r;
      }
    }
    for (auto merged = detail::merge_dipole(rec.pair); merged && residual > 1e-10; merged = detail::merge_dipole(*merged)) {
      auto polished = detail::refine(*merged, misfit, 30);
      if (double r = mismatch(polished); r < residual) {
        rec.pair = std::move(polished);
        residual = r;
      }
    }
  }
  rec.residual = residual;
  return rec;
}

/// Angle chart of the torus component over a gap: theta in (-pi, pi],
/// zeta = -sign(sin theta) sqrt(Delta^2 - 1). Outermost gaps map theta = pi to
/// the point at infinity.
inline DivisorComponent<double> torus_point(const GapStructure<double>& gs, const Gap<double>& g, double theta) {
  using X = ExtendedReal<double>;
  if (g.closed()) return {g.index, X::finite(g.lower.value), 0.0};
  double kappa;
  if (!g.outermost) {
    const double lo = g.lower.value, hi = g.upper.value;
    kappa = (lo + hi) / 2 + (hi - lo) / 2 * std::cos(theta);
  } else {
    if (std::abs(std::cos(theta) + 1) <= 1e-15) return {g.index, g.index > 0 ? X::pos_inf() : X::neg_inf(), 0.0};
    const double edge = g.index > 0 ? g.lower.value : g.upper.value;
    const double w = std::max(1.0, std::abs(edge));
    const double stretch = w * (1 - std::cos(theta)) / (1 + std::cos(theta));
    kappa = g.index > 0 ? edge + stretch : edge - stretch;
  }
  const double d = gs.delta(kappa);
  const double s = std::sin(theta);
  const double sign = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
  return {g.index, X::finite(kappa), -sign * std::sqrt(std::max(d * d - 1, 0.0))};
}

/// Pairs on a grid of the isospectral torus of `delta`: `samples` angles per
/// open gap, a single point on closed gaps. The first gap varies slowest.
inline std::vector<PeakonPair<double>> isospectral_sample(const Poly<double>& delta, const Period<double>& period,
                                                          int samples, double a = 0) {
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  const auto gs = validate_discriminant(delta, period);
  std::vector<std::vector<DivisorComponent<double>>> choices;
  for (const auto& g : gs.gaps) {
    std::vector<DivisorComponent<double>> opts;
    if (g.closed()) {
      opts.push_back(torus_point(gs, g, 0.0));
    } else {
      for (int j = 0; j < samples; ++j) {
        opts.push_back(torus_point(gs, g, -std::numbers::pi + 2 * std::numbers::pi * (j + 1) / samples));
      }
    }
    choices.push_back(std::move(opts));
  }

  std::vector<PeakonPair<double>> out;
  std::vector<std::size_t> pick(choices.size(), 0);
  while (true) {
    DivisorPoint<double> point;
    for (std::size_t i = 0; i < choices.size(); ++i) point.push_back(choices[i][pick[i]]);
    out.push_back(solve_periodic(delta, point, period, a).pair);
    std::size_t i = choices.size();
    while (i > 0) {
      --i;
      if (++pick[i] < choices[i].size()) break;
      pick[i] = 0;
      if (i == 0) return out;
    }
    if (choices.empty()) return out;
  }
}

/// (cosh(l/2) -+ 1)/sinh(l/2) * prod kappa / prod lambda over the periodic
/// (`periodic` true) or antiperiodic spectrum. This is -upsilon_a when both
/// outermost gaps lack a Dirichlet eigenvalue, omega_a when upsilon_a = 0 and
/// one of them does, and coth((x_1 - a)/2)/2 + coth((a + l - x_N)/2)/2 when
/// every gap holds one.
template <Scalar T>
double base_mass_product(const FloquetSpectra<T>& spectra, const DirichletData<T>& dir, const Period<T>& period,
                         bool periodic) {
  const double ch = to_double(period.cosh_half()), sh = to_double(period.sinh_half());
  double value = (periodic ? ch - 1 : ch + 1) / sh;
  for (const auto& e : dir.spectrum) value *= to_double(e.kappa);
  for (const auto& r : periodic ? spectra.periodic : spectra.antiperiodic) {
    value /= std::pow(to_double(r.value), r.multiplicity);
  }
  return value;
}

/// Node distances after pair -> Dirichlet data -> pair and after
/// pair -> (Delta, divisor) -> pair.
struct RoundtripResult {
  double dirichlet = 0;
  double periodic = 0;
  double max() const { return std::max(dirichlet, periodic); }
};

/// True when every Dirichlet eigenvalue is rational, so that the spectral data
/// of an exact pair are themselves exact.
template <Scalar T>
bool has_exact_dirichlet_spectrum(const Monodromy<T>& mono) {
  if constexpr (is_exact_v<T>) {
    if (mono.s.degree() < 1) return true;
    const auto roots = real_roots(mono.s, true);
    return std::all_of(roots.begin(), roots.end(), [](const auto& r) { return r.exact; });
  } else {
    return false;
  }
}

/// Exact pairs with irrational eigenvalues are run through the floating path.
template <Scalar T>
RoundtripResult roundtrip(const PeakonPair<T>& pair) {
  if constexpr (is_exact_v<T>) {
    if (!has_exact_dirichlet_spectrum(monodromy(pair))) return roundtrip(pair.to_double());
  }
  const auto fw = analyze(pair);
  RoundtripResult out;
  out.dirichlet = node_distance(pair, solve_dirichlet(spectral_input(pair, fw.dirichlet)).pair);
  out.periodic = node_distance(pair, solve_periodic(fw.delta, fw.dirichlet.divisor, pair.period(), pair.a()).pair);
  return out;
}

}  // namespace peakon
