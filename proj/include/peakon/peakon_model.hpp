#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "peakon/errors.hpp"
#include "peakon/scalar.hpp"

namespace peakon {

/// One support point of the periodic measures omega and upsilon.
/// `tanh_half` is tanh((x - a)/2); it is the primary coordinate in exact mode,
/// where `x` is derived from it.
template <Scalar T>
struct Node {
  double x = 0;
  T tanh_half{};
  T omega{};
  T upsilon{};
};

struct NodeSpec {
  double x;
  double omega;
  double upsilon;
};

template <Scalar T>
struct TanhNode {
  T tanh_half;
  T omega;
  T upsilon;
};

/// A pair (u, mu) of the multi-peakon phase space, stored through the weights
/// of omega = u - u'' and of the singular part upsilon of mu over one period
/// [a, a + l).
template <Scalar T>
class PeakonPair {
 public:
  PeakonPair(Period<T> period, double a, std::vector<Node<T>> nodes)
      : period_(std::move(period)), a_(a), nodes_(std::move(nodes)) {
    validate();
  }

  static PeakonPair from_positions(double ell, double a, const std::vector<NodeSpec>& specs)
    requires(!is_exact_v<T>)
  {
    auto period = Period<T>::from_length(ell);
    std::vector<Node<T>> nodes;
    nodes.reserve(specs.size());
    for (const auto& s : specs) nodes.push_back({s.x, std::tanh((s.x - a) / 2), s.omega, s.upsilon});
    return PeakonPair(period, a, std::move(nodes));
  }

  static PeakonPair from_tanh(Period<T> period, double a, const std::vector<TanhNode<T>>& specs) {
    std::vector<Node<T>> nodes;
    nodes.reserve(specs.size());
    for (const auto& s : specs) {
      nodes.push_back({a + 2 * std::atanh(peakon::to_double(s.tanh_half)), s.tanh_half, s.omega, s.upsilon});
    }
    return PeakonPair(std::move(period), a, std::move(nodes));
  }

  const Period<T>& period() const { return period_; }
  double ell() const { return period_.length(); }
  double a() const { return a_; }
  const std::vector<Node<T>>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// Node sitting exactly at the base point, if any.
  const Node<T>* base_node() const {
    if (!nodes_.empty() && nodes_.front().tanh_half == T(0)) return &nodes_.front();
    return nullptr;
  }

  PeakonPair<double> to_double() const {
    std::vector<Node<double>> nodes;
    for (const auto& n : nodes_) {
      nodes.push_back({n.x, peakon::to_double(n.tanh_half), peakon::to_double(n.omega), peakon::to_double(n.upsilon)});
    }
    return PeakonPair<double>(Period<double>::from_length(ell()), a_, std::move(nodes));
  }

 private:
  void validate() const {
    T prev = T(-1);
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      const auto& node = nodes_[n];
      const std::string where = "node " + std::to_string(n + 1);
      if (node.tanh_half < T(0) || !(node.tanh_half < period_.tanh_half())) {
        fail(ErrorCode::InvalidPair, where + " lies outside [a, a + l)");
      }
      if (n > 0 && node.tanh_half == prev) fail(ErrorCode::DuplicatePosition, where + " repeats a position");
      if (n > 0 && node.tanh_half < prev) fail(ErrorCode::InvalidPair, "node positions must increase");
      if (node.upsilon < T(0)) fail(ErrorCode::InvalidPair, where + " has negative upsilon");
      if (node.omega == T(0) && node.upsilon == T(0)) fail(ErrorCode::InvalidPair, where + " carries no mass");
      prev = node.tanh_half;
    }
  }

  Period<T> period_;
  double a_ = 0;
  std::vector<Node<T>> nodes_;
};

namespace detail {

/// y reduced into [0, l]; the upper end only appears through rounding and
/// then stands for the left limit.
inline double reduce_period(double y, double ell) {
  double r = std::fmod(y, ell);
  if (r < 0) r += ell;
  return r;
}

/// Periodized Green kernel of 1 - d^2/dx^2 (half of sum_k e^{-|d + k l|}).
inline double green(double d, double ell) { return std::cosh(d - ell / 2) / (2 * std::sinh(ell / 2)); }
inline double green_prime(double d, double ell) { return std::sinh(d - ell / 2) / (2 * std::sinh(ell / 2)); }

}  // namespace detail

struct StateValue {
  double u;
  double u_prime_left;
};

/// u(x) and the left limit of u'(x).
template <Scalar T>
StateValue eval_state(const PeakonPair<T>& pair, double x) {
  const double ell = pair.ell();
  StateValue out{0, 0};
  for (const auto& n : pair.nodes()) {
    double d = detail::reduce_period(x - n.x, ell);
    double w = to_double(n.omega);
    out.u += w * detail::green(d, ell);
    out.u_prime_left += w * detail::green_prime(d == 0 ? ell : d, ell);
  }
  return out;
}

struct ConservedQuantities {
  double int_u;
  double int_mu;
};

template <Scalar T>
ConservedQuantities conserved_quantities(const PeakonPair<T>& pair) {
  ConservedQuantities out{0, 0};
  for (const auto& n : pair.nodes()) {
    out.int_u += to_double(n.omega);
    out.int_mu += to_double(n.omega) * eval_state(pair, n.x).u + to_double(n.upsilon);
  }
  return out;
}

/// P(x) = 1/4 int e^{-|x-s|} u(s)^2 ds + 1/4 int e^{-|x-s|} dmu(s), integrated
/// in closed form over the node-free segments of the window [x, x + l).
template <Scalar T>
double eval_P(const PeakonPair<T>& pair, double x) {
  const double ell = pair.ell();
  const auto& nodes = pair.nodes();
  if (nodes.empty()) return 0.0;

  struct Breakpoint {
    double offset;
    int node;  // -1 for the window start
  };
  std::vector<Breakpoint> bps;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    double o = detail::reduce_period(nodes[j].x - x, ell);
    if (o >= ell) o = 0;
    bps.push_back({o, static_cast<int>(j)});
  }
  std::sort(bps.begin(), bps.end(), [](const auto& p, const auto& q) { return p.offset < q.offset; });
  if (bps.front().offset > 0) bps.insert(bps.begin(), {0.0, -1});

  // u(s0) and u'(s0+) at a segment start.
  auto right_state = [&](const Breakpoint& bp) {
    double alpha = 0, beta = 0;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      double d = bp.node >= 0 ? (static_cast<int>(n) == bp.node ? 0.0 : detail::reduce_period(nodes[bp.node].x - nodes[n].x, ell))
                              : detail::reduce_period(x - nodes[n].x, ell);
      double w = to_double(nodes[n].omega);
      alpha += w * detail::green(d, ell);
      beta += w * detail::green_prime(d, ell);
    }
    return std::pair{alpha, beta};
  };

  double integral = 0;
  for (std::size_t k = 0; k < bps.size(); ++k) {
    const double start = bps[k].offset;
    const double h = (k + 1 < bps.size() ? bps[k + 1].offset : ell) - start;
    if (h <= 0) continue;
    auto [alpha, beta] = right_state(bps[k]);
    // u = A e^y + B e^-y on the segment, kernel cosh(c0 - y).
    const double A = (alpha + beta) / 2, B = (alpha - beta) / 2;
    const double c0 = ell / 2 - start;
    auto ex = [h](double k) { return (std::exp(k * h) - 1) / k; };
    const double part_plus = 3 * A * A * ex(1) + 2 * A * B * ex(-1) + 3 * B * B * ex(-3);
    const double part_minus = 3 * A * A * ex(3) + 2 * A * B * ex(1) + 3 * B * B * ex(-1);
    integral += 0.5 * (std::exp(c0) * part_plus + std::exp(-c0) * part_minus);
  }

  double point = 0;
  for (const auto& n : nodes) point += to_double(n.upsilon) * detail::green(detail::reduce_period(x - n.x, ell), ell);
  return integral / (4 * std::sinh(ell / 2)) + point / 2;
}

/// Same periodic measures described from a new base point.
inline PeakonPair<double> rebase(const PeakonPair<double>& pair, double a_new) {
  const double ell = pair.ell();
  std::vector<Node<double>> nodes;
  for (const auto& n : pair.nodes()) {
    double shift = std::floor((n.x - a_new) / ell) * ell;
    double x = n.x - shift;
    if (x >= a_new + ell) x -= ell;
    if (x < a_new) x += ell;
    nodes.push_back({x, std::tanh((x - a_new) / 2), n.omega, n.upsilon});
  }
  std::sort(nodes.begin(), nodes.end(), [](const auto& p, const auto& q) { return p.x < q.x; });
  return PeakonPair<double>(pair.period(), a_new, std::move(nodes));
}

/// Largest relative difference between corresponding node data of two pairs
/// (infinite when the node counts differ).
template <Scalar T>
double node_distance(const PeakonPair<T>& p, const PeakonPair<T>& r) {
  if (p.size() != r.size()) return std::numeric_limits<double>::infinity();
  auto rel = [](double x, double y) { return std::abs(x - y) / (1 + std::abs(x)); };
  double d = std::max(rel(p.ell(), r.ell()), rel(p.a(), r.a()));
  for (std::size_t n = 0; n < p.size(); ++n) {
    const auto &x = p.nodes()[n], &y = r.nodes()[n];
    d = std::max({d, rel(x.x, y.x), rel(to_double(x.omega), to_double(y.omega)),
                  rel(to_double(x.upsilon), to_double(y.upsilon))});
  }
  return d;
}

struct Peak {
  double q;
  double p;
  double upsilon;
};

/// Pair for u = sum_k sum_n p_n e^{-|x - q_n - k l|}; omega_n = 2 p_n.
inline PeakonPair<double> from_momenta(double ell, double a, const std::vector<Peak>& peaks) {
  std::vector<NodeSpec> specs;
  for (const auto& pk : peaks) {
    double x = a + detail::reduce_period(pk.q - a, ell);
    if (x >= a + ell) x -= ell;
    specs.push_back({x, 2 * pk.p, pk.upsilon});
  }
  std::sort(specs.begin(), specs.end(), [](const auto& p, const auto& q) { return p.x < q.x; });
  for (std::size_t n = 1; n < specs.size(); ++n) {
    if (specs[n].x - specs[n - 1].x <= 1e-12 * ell) fail(ErrorCode::DuplicatePosition, "two peaks coincide modulo l");
  }
  if (specs.size() > 1 && specs.front().x + ell - specs.back().x <= 1e-12 * ell) {
    fail(ErrorCode::DuplicatePosition, "two peaks coincide modulo l");
  }
  return PeakonPair<double>::from_positions(ell, a, specs);
}

}  // namespace peakon
