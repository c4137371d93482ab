#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "peakon/forward_spectral.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/poly.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

struct IdentityCheck {
  std::string_view name;
  double lhs = 0;
  double rhs = 0;
  double residual = 0;
};

inline constexpr std::array<std::string_view, 8> kIdentityNames{
    "trace1", "trace2", "tid1", "tid2", "delta_dot0", "delta_ddot0", "s_dot0", "s_ddot0"};

struct TraceReport {
  std::array<IdentityCheck, 8> items;

  double max_residual() const {
    double m = 0;
    for (const auto& it : items) m = std::max(m, it.residual);
    return m;
  }

  const IdentityCheck& at(std::string_view name) const {
    for (const auto& it : items)
      if (it.name == name) return it;
    throw std::out_of_range("no identity named " + std::string(name));
  }
};

/// Reciprocal power sums of the spectra: band sums run over all zeros of
/// Delta^2 - 1 with multiplicity, Dirichlet sums over the finite kappa.
struct SpectralSums {
  double band1 = 0, band2 = 0;
  double dir1 = 0, dir2 = 0;
};

namespace detail {

/// sum 1/r and sum 1/r^2 over the zeros of p (p(0) != 0), from the three
/// lowest coefficients.
template <Scalar T>
std::pair<T, T> reciprocal_power_sums(const Poly<T>& p) {
  const T r1 = p.coeff(1) / p.coeff(0);
  const T r2 = p.coeff(2) / p.coeff(0);
  return {T(-r1), T(r1 * r1 - 2 * r2)};
}

}  // namespace detail

/// Exact mode works from the coefficients (Newton identities), floating mode
/// from the computed zeros.
template <Scalar T>
SpectralSums spectral_sums(const ForwardAnalysis<T>& fw) {
  SpectralSums out;
  if constexpr (is_exact_v<T>) {
    const Poly<T> band = fw.delta * fw.delta - Poly<T>::constant(T(1));
    auto [b1, b2] = detail::reciprocal_power_sums(band);
    auto [d1, d2] = detail::reciprocal_power_sums(fw.mono.s);
    out = {to_double(b1), to_double(b2), to_double(d1), to_double(d2)};
  } else {
    for (const auto* list : {&fw.spectra.periodic, &fw.spectra.antiperiodic}) {
      for (const auto& r : *list) {
        out.band1 += r.multiplicity / r.value;
        out.band2 += r.multiplicity / (r.value * r.value);
      }
    }
    for (const auto& e : fw.dirichlet.spectrum) {
      out.dir1 += 1 / e.kappa;
      out.dir2 += 1 / (e.kappa * e.kappa);
    }
  }
  return out;
}

/// Trace formulas and the low-order Taylor coefficients of Delta and s at
/// z = 0, each as lhs (spectral side) against rhs (pair side).
template <Scalar T>
TraceReport trace_report(const PeakonPair<T>& pair) {
  const auto fw = analyze(pair);
  const auto sums = spectral_sums(fw);
  const double sh = std::sinh(pair.ell() / 2), ch = std::cosh(pair.ell() / 2);
  const auto cq = conserved_quantities(pair);
  const double U = cq.int_u, M = cq.int_mu;
  const double ua = eval_state(pair, pair.a()).u;
  const double Pa = eval_P(pair, pair.a());
  const double d1 = to_double(fw.delta.coeff(1)), d2 = 2 * to_double(fw.delta.coeff(2));
  const double s1 = to_double(fw.mono.s.coeff(1)), s2 = 2 * to_double(fw.mono.s.coeff(2));

  const std::array<std::pair<double, double>, 8> sides{{
      {sums.band1, 2 * ch / sh * U},
      {sums.band2, 2 / (sh * sh) * U * U + 4 * ch / sh * M},
      {(sums.band1 - 2 * sums.dir1) / 4, ua},
      {(sums.band2 - 2 * sums.dir2) / 16, Pa},
      {d1, -sh * U},
      {d2, ch * U * U - 2 * sh * M},
      {s1, 4 * sh * ua - 2 * ch * U},
      {s2, 2 * sh * U * U - 8 * ch * ua * U - 4 * ch * M + 8 * sh * ua * ua + 16 * sh * Pa},
  }};
  TraceReport report;
  for (std::size_t k = 0; k < sides.size(); ++k) {
    auto [lhs, rhs] = sides[k];
    report.items[k] = {kIdentityNames[k], lhs, rhs, std::abs(lhs - rhs) / (1 + std::abs(lhs))};
  }
  return report;
}

}  // namespace peakon
