#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "peakon/peakon.hpp"

namespace fixtures {

using peakon::NodeSpec;
using peakon::PeakonPair;
using peakon::Period;
using peakon::Rational;
using peakon::TanhNode;

inline const double kLn3 = std::log(3.0);
inline const double kLn4 = std::log(4.0);

/// One node of omega-mass 1 at the base point, period ln 4.
inline PeakonPair<double> s1() { return PeakonPair<double>::from_positions(kLn4, 0, {{0, 1, 0}}); }

/// omega = delta_0 - delta_{ln 3}, period ln 4.
inline PeakonPair<double> t2() { return PeakonPair<double>::from_positions(kLn4, 0, {{0, 1, 0}, {kLn3, -1, 0}}); }

inline Rational q(long n, long d = 1) { return peakon::make_rational(n, d); }

/// tanh(ln 2) = 3/5, tanh(ln 3 / 2) = 1/2
inline PeakonPair<Rational> t2_exact() {
  auto period = Period<Rational>::from_tanh_half(q(3, 5));
  return PeakonPair<Rational>::from_tanh(period, 0, {{q(0), q(1), q(0)}, {q(1, 2), q(-1), q(0)}});
}

inline PeakonPair<Rational> s1_exact() {
  auto period = Period<Rational>::from_tanh_half(q(3, 5));
  return PeakonPair<Rational>::from_tanh(period, 0, {{q(0), q(1), q(0)}});
}

struct PairOptions {
  int max_nodes = 6;
  bool allow_base_node = true;
  bool allow_upsilon = true;
  bool nonnegative_omega = false;
};

/// Random pairs with well separated nodes and moderate masses.
class PairGenerator {
 public:
  explicit PairGenerator(unsigned long seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return uniform(0, 1) < p; }

  PeakonPair<double> pair(const PairOptions& opt = {}) {
    const double ell = uniform(0.5, 4.0);
    const double a = uniform(-2.0, 2.0);
    const int n = integer(0, opt.max_nodes);
    std::vector<double> offsets;
    const bool base = opt.allow_base_node && n > 0 && coin(0.3);
    if (base) offsets.push_back(0.0);
    const double gap = 0.25 * ell / (n + 1);
    while (static_cast<int>(offsets.size()) < n) {
      double o = uniform(gap, ell - gap);
      bool ok = std::all_of(offsets.begin(), offsets.end(), [&](double p) { return std::abs(p - o) >= gap; });
      if (ok) offsets.push_back(o);
    }
    std::sort(offsets.begin(), offsets.end());
    std::vector<NodeSpec> specs;
    for (double o : offsets) {
      double w = uniform(0.3, 2.0);
      if (!opt.nonnegative_omega && coin(0.4)) w = -w;
      double v = opt.allow_upsilon && coin(0.4) ? uniform(0.1, 1.5) : 0.0;
      specs.push_back({a + o, w, v});
    }
    return PeakonPair<double>::from_positions(ell, a, specs);
  }

  /// Exact pair: Pythagorean period, rational tanh coordinates and masses.
  PeakonPair<Rational> exact_pair(int max_nodes = 4) {
    static const std::vector<std::pair<long, long>> periods{{3, 5}, {5, 13}, {8, 17}, {7, 25}, {12, 13}, {4, 5}};
    auto [pn, pd] = periods[integer(0, static_cast<int>(periods.size()) - 1)];
    auto period = Period<Rational>::from_tanh_half(q(pn, pd));
    const int n = integer(0, max_nodes);
    std::vector<Rational> ts;
    if (n > 0 && coin(0.3)) ts.push_back(q(0));
    while (static_cast<int>(ts.size()) < n) {
      Rational t = q(integer(1, 29), 30) * period.tanh_half();
      if (std::find(ts.begin(), ts.end(), t) == ts.end()) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    std::vector<TanhNode<Rational>> nodes;
    for (const auto& t : ts) {
      Rational w = q(integer(-6, 6), integer(1, 4));
      Rational v = coin(0.4) ? q(integer(1, 6), integer(1, 4)) : q(0);
      if (w == 0 && v == 0) w = 1;
      nodes.push_back({t, w, v});
    }
    return PeakonPair<Rational>::from_tanh(period, 0, nodes);
  }

 private:
  std::mt19937_64 rng_;
};

/// Max of |p_k - q_k| over coefficients, relative to max(1, max |p_k|).
template <class P>
double coeff_distance(const P& p, const P& r) {
  double scale = std::max(1.0, p.max_abs()), d = 0;
  for (int k = 0; k <= std::max(p.degree(), r.degree()); ++k) {
    d = std::max(d, std::abs(peakon::to_double(p.coeff(k)) - peakon::to_double(r.coeff(k))));
  }
  return d / scale;
}

inline double pair_distance(const PeakonPair<double>& p, const PeakonPair<double>& r) {
  return peakon::node_distance(p, r);
}

// s(kappa, .) propagated node to node in long double. On a free stretch
// f = alpha e^{y/2} + beta e^{-y/2}, so f'^2 + f^2/4 = (alpha^2 e^y + beta^2 e^{-y})/2
// integrates in closed form.
struct NormingIntegrals {
  long double energy = 0;  // int s'^2 + s^2/4 + kappa^2 sum upsilon s(x_n)^2
  long double masses = 0;  // sum s(x_n)^2 (omega_n + 2 kappa upsilon_n)
};

inline NormingIntegrals norming_integrals(const PeakonPair<double>& pair, long double kappa) {
  using L = long double;
  NormingIntegrals out;
  L f = 0, g = 1;
  auto stretch = [&](L d) {
    const L alpha = (f / 2 + g), beta = (f / 2 - g);
    out.energy += alpha * alpha * std::expm1(d) / 2 - beta * beta * std::expm1(-d) / 2;
    const L nf = alpha * std::exp(d / 2) + beta * std::exp(-d / 2);
    const L ng = (alpha * std::exp(d / 2) - beta * std::exp(-d / 2)) / 2;
    f = nf;
    g = ng;
  };
  L x = pair.a();
  for (const auto& n : pair.nodes()) {
    stretch(n.x - x);
    out.energy += kappa * kappa * n.upsilon * f * f;
    out.masses += f * f * (n.omega + 2 * kappa * n.upsilon);
    g -= (kappa * n.omega + kappa * kappa * n.upsilon) * f;
    x = n.x;
  }
  stretch(pair.a() + pair.ell() - x);
  return out;
}

}  // namespace fixtures
