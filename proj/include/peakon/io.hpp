#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "peakon/forward_spectral.hpp"
#include "peakon/inverse_dirichlet.hpp"
#include "peakon/inverse_periodic.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/scalar.hpp"
#include "peakon/trace_validation.hpp"

namespace peakon::io {

using json = nlohmann::json;

/// Malformed or missing input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
      return to_double(parse_rational(s));
    } catch (const std::invalid_argument&) {
    }
  }
  throw InputError(std::string("field '") + what + "' is not a number");
}

inline Rational rational(const json& j, const char* what) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number()) return parse_rational(j.dump());
  } catch (const std::invalid_argument&) {
  }
  throw InputError(std::string("field '") + what + "' is not a rational");
}

template <Scalar T>
T scalar(const json& j, const char* what) {
  if constexpr (is_exact_v<T>) {
    return rational(j, what);
  } else {
    return number(j, what);
  }
}

inline double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j.at(key), key) : fallback;
}

template <Scalar T>
json value(const T& v) {
  if constexpr (is_exact_v<T>) {
    return to_string(v);
  } else {
    const double d = static_cast<double>(v);
    return d == 0 ? 0.0 : d;
  }
}

template <Scalar T>
json extended(const ExtendedReal<T>& v) {
  switch (v.kind) {
    case ExtendedReal<T>::Kind::pos_inf: return "inf";
    case ExtendedReal<T>::Kind::neg_inf: return "-inf";
    default: return value(v.value);
  }
}

inline ExtendedReal<double> extended_number(const json& j) {
  const double v = number(j, "kappa");
  if (v == std::numeric_limits<double>::infinity()) return ExtendedReal<double>::pos_inf();
  if (v == -std::numeric_limits<double>::infinity()) return ExtendedReal<double>::neg_inf();
  return ExtendedReal<double>::finite(v);
}

template <Scalar T>
Period<T> read_period(const json& j) {
  if constexpr (is_exact_v<T>) {
    return Period<T>::from_tanh_half(rational(field(j, "tanh_half_ell"), "tanh_half_ell"));
  } else {
    if (j.contains("ell")) return Period<T>::from_length(number(j.at("ell"), "ell"));
    return Period<T>::from_tanh_half(number(field(j, "tanh_half_ell"), "tanh_half_ell"));
  }
}

template <Scalar T>
void write_period(json& j, const Period<T>& period) {
  j["ell"] = period.length();
  if constexpr (is_exact_v<T>) j["tanh_half_ell"] = to_string(period.tanh_half());
}

template <Scalar T>
json roots(const std::vector<RealRoot<T>>& list) {
  json out = json::array();
  for (const auto& r : list) {
    // irrational roots of the exact mode are written as floating numbers
    const json v = !is_exact_v<T> || r.exact ? value(r.value) : json(to_double(r.value));
    for (int k = 0; k < r.multiplicity; ++k) out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// {"ell", "a", "nodes": [{"x", "omega", "upsilon"}]}. Exact mode reads
/// "tanh_half_ell" and a "tanh_half" per node instead of the positions.
template <Scalar T>
PeakonPair<T> pair_from_json(const json& j) {
  try {
    const double a = detail::number_or(j, "a", 0.0);
    const auto period = detail::read_period<T>(j);
    std::vector<TanhNode<T>> nodes;
    for (const auto& n : detail::field(j, "nodes")) {
      T t;
      if constexpr (is_exact_v<T>) {
        t = detail::rational(detail::field(n, "tanh_half"), "tanh_half");
      } else {
        t = n.contains("tanh_half") ? detail::number(n.at("tanh_half"), "tanh_half")
                                    : std::tanh((detail::number(detail::field(n, "x"), "x") - a) / 2);
      }
      const T omega = n.contains("omega") ? detail::scalar<T>(n.at("omega"), "omega") : T(0);
      const T upsilon = n.contains("upsilon") ? detail::scalar<T>(n.at("upsilon"), "upsilon") : T(0);
      nodes.push_back({t, omega, upsilon});
    }
    return PeakonPair<T>::from_tanh(period, a, nodes);
  } catch (const json::exception& e) {
    throw InputError(e.what());
  }
}

template <Scalar T>
json to_json(const PeakonPair<T>& pair) {
  json j;
  detail::write_period(j, pair.period());
  j["a"] = pair.a();
  j["nodes"] = json::array();
  for (const auto& n : pair.nodes()) {
    json node{{"x", n.x}, {"omega", detail::value(n.omega)}, {"upsilon", detail::value(n.upsilon)}};
    if constexpr (is_exact_v<T>) node["tanh_half"] = to_string(n.tanh_half);
    j["nodes"].push_back(node);
  }
  return j;
}

/// Spectral-data record. "kappas" and "zetas" follow the divisor (one entry
/// per gap, "inf"/"-inf" for a component at infinity); "gammas" is aligned
/// with "kappas" and null at infinite components.
template <Scalar T>
json to_json(const PeakonPair<T>& pair, const ForwardAnalysis<T>& fw) {
  json j;
  detail::write_period(j, pair.period());
  j["a"] = pair.a();
  j["delta_coeffs"] = json::array();
  for (int k = 0; k <= fw.delta.degree(); ++k) j["delta_coeffs"].push_back(detail::value(fw.delta.coeff(k)));
  j["periodic"] = detail::roots(fw.spectra.periodic);
  j["antiperiodic"] = detail::roots(fw.spectra.antiperiodic);
  j["kappas"] = json::array();
  j["gammas"] = json::array();
  j["zetas"] = json::array();
  for (const auto& c : fw.dirichlet.divisor) {
    // an irrational kappa and the data derived from it are written as doubles
    const bool exact = !c.kappa.is_finite() || !is_exact_v<T> || fw.mono.s(c.kappa.value) == T(0);
    auto put = [&](const T& v) { return exact ? detail::value(v) : json(to_double(v)); };
    j["kappas"].push_back(c.kappa.is_finite() ? put(c.kappa.value) : detail::extended(c.kappa));
    json gamma = nullptr;
    if (c.kappa.is_finite()) {
      for (const auto& e : fw.dirichlet.spectrum) {
        if (e.kappa == c.kappa.value) gamma = put(e.gamma);
      }
    }
    j["gammas"].push_back(gamma);
    j["zetas"].push_back(put(c.zeta));
  }
  j["omega_a"] = detail::value(fw.dirichlet.omega_a);
  j["upsilon_a"] = detail::value(fw.dirichlet.upsilon_a);
  return j;
}

/// Dirichlet data from a spectral-data record; infinite kappas are skipped.
template <Scalar T>
DirichletSpectralInput<T> dirichlet_input_from_json(const json& j) {
  try {
    DirichletSpectralInput<T> in;
    in.period = detail::read_period<T>(j);
    in.a = detail::number_or(j, "a", 0.0);
    in.omega_a = j.contains("omega_a") ? detail::scalar<T>(j.at("omega_a"), "omega_a") : T(0);
    in.upsilon_a = j.contains("upsilon_a") ? detail::scalar<T>(j.at("upsilon_a"), "upsilon_a") : T(0);
    const auto& kappas = detail::field(j, "kappas");
    const auto& gammas = detail::field(j, "gammas");
    if (!kappas.is_array() || !gammas.is_array() || kappas.size() != gammas.size()) {
      throw InputError("'kappas' and 'gammas' must be arrays of equal length");
    }
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      if (kappas[i].is_string()) {
        const auto s = kappas[i].get<std::string>();
        if (s == "inf" || s == "-inf") continue;
      }
      in.spectrum.push_back({detail::scalar<T>(kappas[i], "kappas"), detail::scalar<T>(gammas[i], "gammas")});
    }
    return in;
  } catch (const json::exception& e) {
    throw InputError(e.what());
  }
}

/// {"ell", "coeffs", "a"}
struct DiscriminantFile {
  Poly<double> delta;
  Period<double> period;
  double a = 0;
};

inline DiscriminantFile discriminant_from_json(const json& j) {
  try {
    std::vector<double> c;
    for (const auto& v : detail::field(j, "coeffs")) c.push_back(detail::number(v, "coeffs"));
    if (c.empty()) throw InputError("'coeffs' is empty");
    return {Poly<double>(std::move(c)), detail::read_period<double>(j), detail::number_or(j, "a", 0.0)};
  } catch (const json::exception& e) {
    throw InputError(e.what());
  }
}

/// {"points": [{"kappa", "zeta"}]} in gap order.
inline DivisorPoint<double> divisor_from_json(const json& j) {
  try {
    DivisorPoint<double> out;
    for (const auto& p : detail::field(j, "points")) {
      const int gap = p.contains("gap") ? p.at("gap").get<int>() : 0;
      out.push_back({gap, detail::extended_number(detail::field(p, "kappa")), detail::number(detail::field(p, "zeta"), "zeta")});
    }
    return out;
  } catch (const json::exception& e) {
    throw InputError(e.what());
  }
}

inline json to_json(const DivisorPoint<double>& divisor) {
  json points = json::array();
  for (const auto& c : divisor) points.push_back({{"gap", c.gap}, {"kappa", detail::extended(c.kappa)}, {"zeta", c.zeta}});
  return {{"points", points}};
}

inline json to_json(const TraceReport& report) {
  json j = json::object();
  for (const auto& it : report.items) {
    j[std::string(it.name)] = {{"lhs", it.lhs}, {"rhs", it.rhs}, {"residual", it.residual}};
  }
  j["max_residual"] = report.max_residual();
  return j;
}

}  // namespace peakon::io
