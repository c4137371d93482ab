#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "peakon/errors.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/poly.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

/// Relative slack used when placing a numerically computed eigenvalue into a
/// gap whose endpoints are themselves numerical.
inline constexpr double kGapSlack = 1e-7;

/// Entries of the transfer matrix from a to a + l, as polynomials in z:
///   [ c  s  ]
///   [ c' s' ]
template <Scalar T>
struct Monodromy {
  Poly<T> c, s, c_prime, s_prime;
  Period<T> period;
  double a = 0;

  double ell() const { return period.length(); }
  Poly<T> det() const { return c * s_prime - s * c_prime; }
};

/// Propagates (f, f') from a to a + l across free segments and the node
/// interface conditions. The product is accumulated right to left. In exact
/// mode each free segment is the scale-free matrix [[1, 2 tau], [tau/2, 1]]
/// and the product of the dropped cosh factors is restored at the end.
/// Floating mode accumulates in long double and rounds once.
template <Scalar T>
Monodromy<T> monodromy(const PeakonPair<T>& pair) {
  using W = std::conditional_t<is_exact_v<T>, T, long double>;
  using P = Poly<W>;
  P m00 = P::constant(W(1)), m01, m10, m11 = P::constant(W(1));
  const auto& period = pair.period();

  auto free_segment = [&](const T& t_from, const T& t_to, double dx) {
    W ch, sh;
    if constexpr (is_exact_v<T>) {
      (void)dx;
      ch = T(1);
      sh = (t_to - t_from) / (1 - t_to * t_from);
    } else {
      (void)t_from;
      (void)t_to;
      ch = std::cosh(static_cast<W>(dx) / 2);
      sh = std::sinh(static_cast<W>(dx) / 2);
    }
    if (sh == W(0)) return;
    P n00 = m00 * ch + m10 * W(2 * sh);
    P n01 = m01 * ch + m11 * W(2 * sh);
    P n10 = m00 * W(sh / 2) + m10 * ch;
    P n11 = m01 * W(sh / 2) + m11 * ch;
    m00 = std::move(n00);
    m01 = std::move(n01);
    m10 = std::move(n10);
    m11 = std::move(n11);
  };

  T t_prev = T(0);
  double x_prev = pair.a();
  for (const auto& node : pair.nodes()) {
    free_segment(t_prev, node.tanh_half, node.x - x_prev);
    P rho(std::vector<W>{W(0), static_cast<W>(node.omega), static_cast<W>(node.upsilon)});
    m10 = m10 - rho * m00;
    m11 = m11 - rho * m01;
    t_prev = node.tanh_half;
    x_prev = node.x;
  }
  free_segment(t_prev, period.tanh_half(), pair.ell() - (x_prev - pair.a()));

  if constexpr (is_exact_v<T>) {
    // prod_j cosh(d_j/2) = prod_j (1 - t_j t_{j-1}) * cosh(l/2) / prod_n (1 - t_n^2)
    T scale = period.cosh_half();
    T t_last = T(0);
    for (const auto& node : pair.nodes()) {
      scale *= (1 - node.tanh_half * t_last) / (1 - node.tanh_half * node.tanh_half);
      t_last = node.tanh_half;
    }
    scale *= 1 - period.tanh_half() * t_last;
    m00 = m00 * scale;
    m01 = m01 * scale;
    m10 = m10 * scale;
    m11 = m11 * scale;
  }
  return Monodromy<T>{poly_cast<T>(m00), poly_cast<T>(m01), poly_cast<T>(m10), poly_cast<T>(m11), period, pair.a()};
}

/// Monodromy matrix and its z-derivative at one real z, by direct propagation
/// in extended precision (far better conditioned than evaluating the
/// polynomial entries from their coefficients).
struct PointMonodromy {
  long double m[2][2];
  long double dm[2][2];

  long double c() const { return m[0][0]; }
  long double s() const { return m[0][1]; }
  long double s_dot() const { return dm[0][1]; }
  /// s' at a zero of s, taken from det = 1 when c is the larger entry.
  long double s_prime_at_zero() const { return std::abs(m[0][0]) > std::abs(m[1][1]) ? 1 / m[0][0] : m[1][1]; }
};

template <Scalar T>
PointMonodromy monodromy_at(const PeakonPair<T>& pair, long double z) {
  using L = long double;
  PointMonodromy pm{{{1, 0}, {0, 1}}, {{0, 0}, {0, 0}}};
  auto apply = [&](const L (&a)[2][2], const L (&da)[2][2]) {
    PointMonodromy out{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        out.m[i][j] = a[i][0] * pm.m[0][j] + a[i][1] * pm.m[1][j];
        out.dm[i][j] = da[i][0] * pm.m[0][j] + da[i][1] * pm.m[1][j] + a[i][0] * pm.dm[0][j] + a[i][1] * pm.dm[1][j];
      }
    pm = out;
  };
  auto free_segment = [&](L dx) {
    const L ch = std::cosh(dx / 2), sh = std::sinh(dx / 2);
    const L a[2][2] = {{ch, 2 * sh}, {sh / 2, ch}};
    const L da[2][2] = {{0, 0}, {0, 0}};
    apply(a, da);
  };
  L x_prev = pair.a();
  for (const auto& node : pair.nodes()) {
    const L w = to_double(node.omega), v = to_double(node.upsilon);
    free_segment(2 * std::atanh(static_cast<L>(to_double(node.tanh_half))) - (x_prev - pair.a()));
    const L a[2][2] = {{1, 0}, {-(w * z + v * z * z), 1}};
    const L da[2][2] = {{0, 0}, {-(w + 2 * v * z), 0}};
    apply(a, da);
    x_prev = pair.a() + 2 * std::atanh(static_cast<L>(to_double(node.tanh_half)));
  }
  free_segment(2 * std::atanh(static_cast<L>(to_double(pair.period().tanh_half()))) - (x_prev - pair.a()));
  return pm;
}

/// Floquet discriminant: half the trace of the monodromy matrix.
template <Scalar T>
Poly<T> discriminant(const Monodromy<T>& mono) {
  return (mono.c + mono.s_prime) * (T(1) / T(2));
}

template <Scalar T>
struct FloquetSpectra {
  std::vector<RealRoot<T>> periodic;      // zeros of Delta - 1
  std::vector<RealRoot<T>> antiperiodic;  // zeros of Delta + 1
};

template <Scalar T>
FloquetSpectra<T> floquet_spectra(const Poly<T>& delta) {
  const Poly<T> one = Poly<T>::constant(T(1));
  FloquetSpectra<T> out{real_roots(delta - one, true), real_roots(delta + one, true)};
  for (const auto* list : {&out.periodic, &out.antiperiodic}) {
    for (const auto& r : *list) {
      if (r.value == T(0)) fail(ErrorCode::InternalInconsistency, "zero is a periodic/antiperiodic eigenvalue");
      if (r.multiplicity > 2) fail(ErrorCode::InternalInconsistency, "eigenvalue of multiplicity above two");
    }
  }
  return out;
}

enum class EdgeKind { periodic, antiperiodic };

/// Zero lambda_index of Delta^2 - 1; double zeros appear under two indices.
template <Scalar T>
struct BandEdge {
  int index;
  T value;
  EdgeKind kind;
};

template <Scalar T>
struct Gap {
  int index;
  ExtendedReal<T> lower;
  ExtendedReal<T> upper;
  bool outermost = false;

  bool closed() const { return lower.is_finite() && upper.is_finite() && lower.value == upper.value; }

  /// Distance from x to the gap (0 inside), measured in units of 1 + |x|.
  double excess(double x) const {
    double lo = lower.to_double(), hi = upper.to_double();
    double d = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
    return d / (1 + std::abs(x));
  }
};

template <Scalar T>
struct GapStructure {
  Poly<T> delta;
  std::vector<BandEdge<T>> lambdas;  // ascending, indices -2I-..-1, 1..2I+
  int i_minus = 0;
  int i_plus = 0;
  std::vector<Gap<T>> gaps;  // ascending, indices -I-..-1, 1..I+

  const BandEdge<T>& lambda(int index) const {
    int pos = index < 0 ? index + 2 * i_minus : 2 * i_minus + index - 1;
    return lambdas.at(static_cast<std::size_t>(pos));
  }

  const Gap<T>* gap(int index) const {
    for (const auto& g : gaps)
      if (g.index == index) return &g;
    return nullptr;
  }

  /// Membership of (kappa, zeta) in the torus component over gap `index`.
  bool on_torus(int index, const ExtendedReal<T>& kappa, const T& zeta, double tol) const {
    const Gap<T>* g = gap(index);
    if (g == nullptr) return false;
    if (!kappa.is_finite()) {
      bool side_ok = kappa.kind == ExtendedReal<T>::Kind::pos_inf ? !g->upper.is_finite() : !g->lower.is_finite();
      return side_ok && std::abs(to_double(zeta)) <= tol;
    }
    const double k = to_double(kappa.value);
    if (g->excess(k) > tol) return false;
    // Rounding in the coefficients of Delta shows up in Delta(kappa) at the
    // level of sum |c_j| |kappa|^j.
    long double dv = 0, spread = 0;
    for (int j = delta.degree(); j >= 0; --j) {
      dv = dv * k + to_double(delta.coeff(j));
      spread = spread * std::abs(k) + std::abs(to_double(delta.coeff(j)));
    }
    const long double z = to_double(zeta);
    return std::abs(z * z - (dv * dv - 1)) <= tol * (1 + dv * dv) + 1e-12L * std::abs(dv) * spread;
  }
};

/// Labels the zeros of Delta^2 - 1 and assembles the gaps around them.
template <Scalar T>
GapStructure<T> gap_structure(const Poly<T>& delta) {
  const auto spectra = floquet_spectra(delta);
  struct Raw {
    T value;
    EdgeKind kind;
  };
  std::vector<Raw> all;
  for (const auto& r : spectra.periodic)
    for (int k = 0; k < r.multiplicity; ++k) all.push_back({r.value, EdgeKind::periodic});
  for (const auto& r : spectra.antiperiodic)
    for (int k = 0; k < r.multiplicity; ++k) all.push_back({r.value, EdgeKind::antiperiodic});
  std::sort(all.begin(), all.end(), [](const Raw& p, const Raw& q) { return p.value < q.value; });

  GapStructure<T> gs;
  gs.delta = delta;
  const auto negatives = std::count_if(all.begin(), all.end(), [](const Raw& r) { return r.value < T(0); });
  const auto positives = static_cast<long>(all.size()) - negatives;
  if (negatives % 2 != 0 || positives % 2 != 0) {
    fail(ErrorCode::InternalInconsistency, "odd number of band edges on one side of zero");
  }
  gs.i_minus = static_cast<int>(negatives / 2);
  gs.i_plus = static_cast<int>(positives / 2);
  if (gs.i_minus + gs.i_plus != std::max(delta.degree(), 0)) {
    fail(ErrorCode::InternalInconsistency, "band edge count does not match deg Delta");
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    int pos = static_cast<int>(k);
    int index = pos < negatives ? pos - static_cast<int>(negatives) : pos - static_cast<int>(negatives) + 1;
    gs.lambdas.push_back({index, all[k].value, all[k].kind});
  }

  using X = ExtendedReal<T>;
  for (int i = -gs.i_minus; i <= gs.i_plus; ++i) {
    if (i == 0) continue;
    Gap<T> g{i, X::neg_inf(), X::pos_inf(), false};
    if (i == -gs.i_minus) {
      g.upper = X::finite(gs.lambda(2 * i).value);
      g.outermost = true;
    } else if (i < 0) {
      g.lower = X::finite(gs.lambda(2 * i - 1).value);
      g.upper = X::finite(gs.lambda(2 * i).value);
    } else if (i < gs.i_plus) {
      g.lower = X::finite(gs.lambda(2 * i).value);
      g.upper = X::finite(gs.lambda(2 * i + 1).value);
    } else {
      g.lower = X::finite(gs.lambda(2 * i).value);
      g.outermost = true;
    }
    gs.gaps.push_back(std::move(g));
  }
  return gs;
}

/// Dirichlet divisor component (kappa_i, zeta_i) over gap i.
template <Scalar T>
struct DivisorComponent {
  int gap;
  ExtendedReal<T> kappa;
  T zeta{};
};

template <Scalar T>
struct NormedEigenvalue {
  T kappa;
  T gamma;
};

template <Scalar T>
struct DirichletData {
  std::vector<DivisorComponent<T>> divisor;  // one per gap
  std::vector<NormedEigenvalue<T>> spectrum;  // finite kappas, ascending
  T omega_a{};
  T upsilon_a{};
};

/// Dirichlet eigenvalues (zeros of s), their norming constants, and the
/// divisor on the torus of `gaps`.
template <Scalar T>
DirichletData<T> dirichlet_data(const PeakonPair<T>& pair, const Monodromy<T>& mono, const GapStructure<T>& gaps) {
  DirichletData<T> out;
  if (const auto* base = pair.base_node()) {
    out.omega_a = base->omega;
    out.upsilon_a = base->upsilon;
  }

  std::vector<std::optional<T>> slot(gaps.gaps.size());
  if (mono.s.degree() > 0) {
    for (const auto& root : real_roots(mono.s, true)) {
      if (root.multiplicity != 1) fail(ErrorCode::InternalInconsistency, "multiple Dirichlet eigenvalue");
      const double k = to_double(root.value);
      std::size_t best = gaps.gaps.size();
      double best_excess = kGapSlack;
      for (std::size_t g = 0; g < gaps.gaps.size(); ++g) {
        double e = gaps.gaps[g].excess(k);
        if (e <= best_excess) {
          best_excess = e;
          best = g;
        }
      }
      if (best == gaps.gaps.size()) {
        fail(ErrorCode::InternalInconsistency, "Dirichlet eigenvalue " + std::to_string(k) + " outside every gap");
      }
      if (slot[best]) fail(ErrorCode::InternalInconsistency, "two Dirichlet eigenvalues in one gap");
      slot[best] = root.value;
    }
  }

  const Poly<T> delta = gaps.delta;
  const Poly<T> s_dot = mono.s.derivative();
  using X = ExtendedReal<T>;
  for (std::size_t g = 0; g < gaps.gaps.size(); ++g) {
    const auto& gap = gaps.gaps[g];
    if (slot[g]) {
      T kappa = *slot[g];
      if constexpr (is_exact_v<T>) {
        const T sp = mono.s_prime(kappa);
        out.divisor.push_back({gap.index, X::finite(kappa), T(delta(kappa) - sp)});
        out.spectrum.push_back({kappa, T(T(1) / (kappa * s_dot(kappa) * sp))});
      } else {
        long double k = kappa;
        PointMonodromy pm = monodromy_at(pair, k);
        for (int it = 0; it < 4 && pm.s_dot() != 0; ++it) {
          const long double next = k - pm.s() / pm.s_dot();
          PointMonodromy trial = monodromy_at(pair, next);
          if (!(std::abs(trial.s()) < std::abs(pm.s()))) break;
          k = next;
          pm = trial;
        }
        kappa = static_cast<T>(k);
        const long double sp = pm.s_prime_at_zero();
        out.divisor.push_back({gap.index, X::finite(kappa), static_cast<T>((pm.c() - sp) / 2)});
        out.spectrum.push_back({kappa, static_cast<T>(1 / (k * pm.s_dot() * sp))});
      }
    } else if (gap.outermost) {
      out.divisor.push_back({gap.index, gap.index < 0 ? X::neg_inf() : X::pos_inf(), T(0)});
    } else {
      fail(ErrorCode::InternalInconsistency, "inner gap " + std::to_string(gap.index) + " has no Dirichlet eigenvalue");
    }
  }
  return out;
}

template <Scalar T>
DirichletData<T> dirichlet_data(const PeakonPair<T>& pair) {
  const auto mono = monodromy(pair);
  return dirichlet_data(pair, mono, gap_structure(discriminant(mono)));
}

template <Scalar T>
struct WeylFunction {
  RatFunc<T> f;
  PartialFraction<T> pf;
};

/// m(z) = -c(z, a + l) / (z s(z, a + l)) with its partial fraction expansion.
template <Scalar T>
WeylFunction<T> weyl_function(const Monodromy<T>& mono) {
  RatFunc<T> f(-mono.c, Poly<T>::identity() * mono.s);
  auto pf = partial_fractions(f);
  return {std::move(f), std::move(pf)};
}

/// Everything the forward map produces for one pair.
template <Scalar T>
struct ForwardAnalysis {
  Monodromy<T> mono;
  Poly<T> delta;
  FloquetSpectra<T> spectra;
  GapStructure<T> gaps;
  DirichletData<T> dirichlet;
};

template <Scalar T>
ForwardAnalysis<T> analyze(const PeakonPair<T>& pair) {
  auto mono = monodromy(pair);
  auto delta = discriminant(mono);
  auto spectra = floquet_spectra(delta);
  auto gaps = gap_structure(delta);
  auto dir = dirichlet_data(pair, mono, gaps);
  return {std::move(mono), std::move(delta), std::move(spectra), std::move(gaps), std::move(dir)};
}

}  // namespace peakon
