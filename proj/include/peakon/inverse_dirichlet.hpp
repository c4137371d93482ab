#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "peakon/cont_frac.hpp"
#include "peakon/errors.hpp"
#include "peakon/forward_spectral.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/poly.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

/// Dirichlet spectral data of a pair: eigenvalues with norming constants and
/// the masses sitting at the base point.
template <Scalar T>
struct DirichletSpectralInput {
  std::vector<NormedEigenvalue<T>> spectrum;
  T omega_a{};
  T upsilon_a{};
  Period<T> period;
  double a = 0;
};

template <Scalar T>
DirichletSpectralInput<T> spectral_input(const PeakonPair<T>& pair, const DirichletData<T>& dir) {
  return {dir.spectrum, dir.omega_a, dir.upsilon_a, pair.period(), pair.a()};
}

template <Scalar T>
void check_spectral_input(const DirichletSpectralInput<T>& in) {
  if (in.upsilon_a < T(0)) fail(ErrorCode::NotAdmissible, "upsilon_a is negative");
  for (std::size_t i = 0; i < in.spectrum.size(); ++i) {
    const auto& e = in.spectrum[i];
    if (e.kappa == T(0)) fail(ErrorCode::NotAdmissible, "zero Dirichlet eigenvalue");
    if (!(e.gamma > T(0))) fail(ErrorCode::NotAdmissible, "norming constant must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (in.spectrum[j].kappa == e.kappa) fail(ErrorCode::NotAdmissible, "repeated Dirichlet eigenvalue");
    }
  }
}

/// m(z) = upsilon_a z + omega_a - coth(l/2)/(2z) + sum gamma_j/(kappa_j - z)
/// as one fraction over z prod (z - kappa_j), computed in the working type W.
template <Scalar W, Scalar T>
RatFunc<W> assemble_m_in(const DirichletSpectralInput<T>& in) {
  check_spectral_input(in);
  using P = Poly<W>;
  auto w = [](const T& v) {
    if constexpr (std::is_same_v<W, T>) {
      return v;
    } else {
      return static_cast<W>(v);
    }
  };
  P prod = P::constant(W(1));
  for (const auto& e : in.spectrum) prod = prod * P{W(-w(e.kappa)), W(1)};
  const P z = P::identity();
  const P den = z * prod;
  P num = P{w(in.omega_a), w(in.upsilon_a)} * den - prod * W(W(1) / w(in.period.tanh_half()) / 2);
  for (std::size_t j = 0; j < in.spectrum.size(); ++j) {
    P others = z;
    for (std::size_t i = 0; i < in.spectrum.size(); ++i) {
      if (i != j) others = others * P{W(-w(in.spectrum[i].kappa)), W(1)};
    }
    num = num - others * w(in.spectrum[j].gamma);
  }
  return RatFunc<W>(std::move(num), den);
}

template <Scalar T>
RatFunc<T> assemble_m(const DirichletSpectralInput<T>& in) {
  return assemble_m_in<T>(in);
}

/// Floating inputs are processed in extended precision; the extraction is a
/// polynomial Euclid algorithm and loses digits at every step.
template <Scalar T>
using work_t = std::conditional_t<is_exact_v<T>, T, Extended>;

/// Result of an inverse map, with the forward-map mismatch of the result
/// against the data it was built from.
template <Scalar T>
struct Reconstruction {
  PeakonPair<T> pair;
  double residual = 0;
};

namespace detail {

inline double rel_diff(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(x)); }

template <Scalar T>
double dirichlet_mismatch(const DirichletData<T>& got, const DirichletSpectralInput<T>& want) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (got.spectrum.size() != want.spectrum.size()) return inf;
  auto sorted = want.spectrum;
  std::sort(sorted.begin(), sorted.end(), [](const auto& p, const auto& q) { return p.kappa < q.kappa; });
  double r = std::max(rel_diff(to_double(want.omega_a), to_double(got.omega_a)),
                      rel_diff(to_double(want.upsilon_a), to_double(got.upsilon_a)));
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    r = std::max(r, rel_diff(to_double(sorted[j].kappa), to_double(got.spectrum[j].kappa)));
    const double g = to_double(sorted[j].gamma);
    r = std::max(r, std::abs(to_double(got.spectrum[j].gamma) - g) / g);
  }
  return r;
}

/// Gauss-Newton polish of a floating-mode reconstruction. The continued
/// fraction fixes the structure (which nodes carry upsilon); the free
/// parameters are then fitted to the spectral data through the forward map,
/// which is much better conditioned than the extraction itself. `residual`
/// returns nullopt when the forward map fails.
template <class Residual>
PeakonPair<double> refine(const PeakonPair<double>& start, Residual&& residual, int max_iter = 10) {
  struct Slot {
    std::size_t node;
    int field;  // 0: tanh_half, 1: omega, 2: upsilon
  };
  std::vector<Slot> slots;
  for (std::size_t n = 0; n < start.size(); ++n) {
    if (start.nodes()[n].tanh_half == 0) continue;
    slots.push_back({n, 0});
    slots.push_back({n, 1});
    if (start.nodes()[n].upsilon != 0) slots.push_back({n, 2});
  }
  if (slots.empty()) return start;

  auto get = [&](const PeakonPair<double>& p) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(slots.size()));
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const auto& nd = p.nodes()[slots[k].node];
      v[static_cast<Eigen::Index>(k)] = slots[k].field == 0 ? nd.tanh_half : (slots[k].field == 1 ? nd.omega : nd.upsilon);
    }
    return v;
  };
  auto make = [&](const Eigen::VectorXd& v) -> std::optional<PeakonPair<double>> {
    std::vector<TanhNode<double>> nodes;
    for (const auto& nd : start.nodes()) nodes.push_back({nd.tanh_half, nd.omega, nd.upsilon});
    for (std::size_t k = 0; k < slots.size(); ++k) {
      auto& nd = nodes[slots[k].node];
      const double x = v[static_cast<Eigen::Index>(k)];
      (slots[k].field == 0 ? nd.tanh_half : (slots[k].field == 1 ? nd.omega : nd.upsilon)) = x;
    }
    try {
      return PeakonPair<double>::from_tanh(start.period(), start.a(), nodes);
    } catch (const SpectralError&) {
      return std::nullopt;
    }
  };
  auto eval = [&](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    auto p = make(v);
    if (!p) return std::nullopt;
    try {
      return residual(*p);
    } catch (const SpectralError&) {
      return std::nullopt;
    }
  };

  Eigen::VectorXd x = get(start);
  auto r = eval(x);
  if (!r) return start;
  for (int iter = 0; iter < max_iter && r->norm() > 0; ++iter) {
    Eigen::MatrixXd J(r->size(), x.size());
    bool ok = true;
    for (Eigen::Index j = 0; j < x.size() && ok; ++j) {
      const double h = 1e-7 * std::max(1e-3, std::abs(x[j]));
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      auto rp = eval(xp), rm = eval(xm);
      if (!rp || !rm || rp->size() != r->size() || rm->size() != r->size()) {
        ok = false;
        break;
      }
      J.col(j) = (*rp - *rm) / (2 * h);
    }
    if (!ok) break;
    const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-*r);
    bool improved = false;
    for (double damp = 1; damp >= 1.0 / 64; damp /= 2) {
      Eigen::VectorXd trial = x + damp * step;
      auto rt = eval(trial);
      if (rt && rt->size() == r->size() && rt->norm() < r->norm()) {
        x = trial;
        r = rt;
        improved = true;
        break;
      }
    }
    if (!improved || step.norm() <= 1e-15 * (1 + x.norm())) break;
  }
  return *make(x);
}

/// Relative misfit of the Dirichlet data of `pair` against `want`.
inline std::optional<Eigen::VectorXd> dirichlet_misfit(const PeakonPair<double>& pair,
                                                       const DirichletSpectralInput<double>& want) {
  const auto got = dirichlet_data(pair);
  if (got.spectrum.size() != want.spectrum.size()) return std::nullopt;
  auto sorted = want.spectrum;
  std::sort(sorted.begin(), sorted.end(), [](const auto& p, const auto& q) { return p.kappa < q.kappa; });
  Eigen::VectorXd r(static_cast<Eigen::Index>(2 * sorted.size()));
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    r[static_cast<Eigen::Index>(2 * j)] = (got.spectrum[j].kappa - sorted[j].kappa) / std::max(1.0, std::abs(sorted[j].kappa));
    r[static_cast<Eigen::Index>(2 * j + 1)] = (got.spectrum[j].gamma - sorted[j].gamma) / sorted[j].gamma;
  }
  return r;
}

/// Two close nodes with large opposite omega act like one node carrying
/// upsilon = -omega_1 omega_2 (x_2 - x_1). Returns the pair with the strongest
/// such couple merged, or nullopt if there is none.
inline std::optional<PeakonPair<double>> merge_dipole(const PeakonPair<double>& pair) {
  const auto& nodes = pair.nodes();
  std::optional<std::size_t> pick;
  double strength = 0;
  for (std::size_t n = 0; n + 1 < nodes.size(); ++n) {
    const auto &p = nodes[n], &q = nodes[n + 1];
    if (p.upsilon != 0 || q.upsilon != 0 || p.omega * q.omega >= 0) continue;
    const double st = std::min(std::abs(p.omega), std::abs(q.omega));
    if (st > strength) {
      strength = st;
      pick = n;
    }
  }
  if (!pick) return std::nullopt;
  std::vector<TanhNode<double>> out;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const auto& p = nodes[n];
    if (n != *pick) {
      out.push_back({p.tanh_half, p.omega, p.upsilon});
      continue;
    }
    const auto& q = nodes[n + 1];
    const double t = p.tanh_half == 0 ? 0.0 : (p.tanh_half + q.tanh_half) / 2;
    out.push_back({t, p.omega + q.omega, -p.omega * q.omega * (q.x - p.x)});
    ++n;
  }
  try {
    return PeakonPair<double>::from_tanh(pair.period(), pair.a(), out);
  } catch (const SpectralError&) {
    return std::nullopt;
  }
}

}  // namespace detail

namespace detail {

template <Scalar T, Scalar W>
PeakonPair<T> pair_from_cf(const CFData<W>& cf_work, const DirichletSpectralInput<T>& in) {
  CFData<T> cf;
  for (const auto& l : cf_work.ls) cf.ls.push_back(static_cast<T>(l));
  for (const auto& b : cf_work.qs) cf.qs.push_back({static_cast<T>(b.q0), static_cast<T>(b.q1)});
  const T& t_end = in.period.tanh_half();

  std::vector<TanhNode<T>> nodes;
  T t = T(0);
  for (std::size_t n = 0; n < cf.qs.size(); ++n) {
    t += cf.ls[n] / 2;
    if (!(t < t_end)) fail(ErrorCode::NotAdmissible, "node " + std::to_string(n + 1) + " falls outside the period");
    const T w = 1 - t * t;
    nodes.push_back({t, T(cf.qs[n].q0 * w), T(cf.qs[n].q1 * w)});
  }

  const bool base_mass = !negligible(in.omega_a, 1.0, 0.0) || !negligible(in.upsilon_a, 1.0, 0.0);
  const bool node_at_base = !cf.ls.empty() && cf.ls.front() == T(0);
  if (node_at_base != base_mass) {
    fail(ErrorCode::InconsistentBaseMass, base_mass ? "base-point mass given but no node at the base point"
                                                    : "node at the base point without base-point mass");
  }
  if (node_at_base) {
    auto& first = nodes.front();
    bool agree;
    if constexpr (is_exact_v<T>) {
      agree = first.omega == in.omega_a && first.upsilon == in.upsilon_a;
    } else {
      const double tol = 1e-8 * (1 + std::abs(in.omega_a) + std::abs(in.upsilon_a));
      agree = std::abs(first.omega - in.omega_a) <= tol && std::abs(first.upsilon - in.upsilon_a) <= tol;
      first.omega = in.omega_a;
      first.upsilon = in.upsilon_a;
    }
    if (!agree) fail(ErrorCode::InconsistentBaseMass, "base-point mass disagrees with the first continued-fraction block");
  }
  return PeakonPair<T>::from_tanh(in.period, in.a, nodes);
}

}  // namespace detail

/// Pair from its Dirichlet data: continued fraction of the Weyl function,
/// then t_n = (l_1 + ... + l_n)/2, omega_n = q_n0 (1 - t_n^2),
/// upsilon_n = q_n1 (1 - t_n^2). In floating mode every admissible reading of
/// the continued fraction is polished against the data and the best fit kept.
template <Scalar T>
Reconstruction<T> solve_dirichlet(const DirichletSpectralInput<T>& in) {
  auto mismatch = [&](const PeakonPair<T>& p) {
    try {
      return detail::dirichlet_mismatch(dirichlet_data(p), in);
    } catch (const SpectralError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  if constexpr (is_exact_v<T>) {
    PeakonPair<T> pair = detail::pair_from_cf(stieltjes_extract(assemble_m(in)), in);
    const double residual = mismatch(pair);
    return {std::move(pair), residual};
  } else {
    const auto candidates = stieltjes_candidates(assemble_m_in<work_t<T>>(in));
    std::optional<Reconstruction<T>> best;
    std::optional<SpectralError> first_error;
    for (const auto& cf : candidates) {
      try {
        PeakonPair<T> pair = detail::pair_from_cf(cf, in);
        double residual = mismatch(pair);
        auto misfit = [&](const PeakonPair<double>& p) { return detail::dirichlet_misfit(p, in); };
        if (residual > 1e-14) {
          auto polished = detail::refine(pair, misfit);
          if (double r = mismatch(polished); r < residual) {
            pair = std::move(polished);
            residual = r;
          }
        }
        for (auto merged = detail::merge_dipole(pair); merged && residual > 1e-10; merged = detail::merge_dipole(*merged)) {
          auto polished = detail::refine(*merged, misfit, 30);
          if (double r = mismatch(polished); r < residual) {
            pair = std::move(polished);
            residual = r;
          }
        }
        if (!best || residual < best->residual) best = Reconstruction<T>{std::move(pair), residual};
        if (best->residual <= 1e-12) break;
      } catch (const SpectralError& e) {
        if (!first_error) first_error = e;
      }
    }
    if (!best) throw *first_error;
    return std::move(*best);
  }
}

}  // namespace peakon
