// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"

using namespace peakon;
using fixtures::q;

namespace {

constexpr unsigned long kCorpusSeed = 20240601;
constexpr int kCorpusSize = 50;

std::vector<PeakonPair<double>> random_corpus() {
  fixtures::PairGenerator gen(kCorpusSeed);
  std::vector<PeakonPair<double>> out;
  for (int k = 0; k < kCorpusSize; ++k) out.push_back(gen.pair());
  return out;
}

struct Check {
  bool ok = true;
  double worst = 0;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
  void bound(double value, double tol, const std::string& what) {
    worst = std::max(worst, std::isnan(value) ? INFINITY : value);
    require(value <= tol, what + " = " + std::to_string(value));
  }
};

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const SpectralError& e) {
    return e.code();
  }
  return ErrorCode::InternalInconsistency;
}

Check criterion_s1() {
  Check c;
  auto exact = fixtures::s1_exact();
  auto fe = analyze(exact);
  c.require(fe.delta == Poly<Rational>{q(5, 4), q(-3, 4)}, "exact Delta");
  c.require(fe.spectra.periodic.size() == 1 && fe.spectra.periodic[0].value == q(1, 3), "exact periodic spectrum");
  c.require(fe.spectra.antiperiodic.size() == 1 && fe.spectra.antiperiodic[0].value == q(3), "exact antiperiodic");
  c.require(fe.dirichlet.spectrum.empty() && fe.dirichlet.omega_a == q(1), "exact Dirichlet data");
  auto w = weyl_function(fe.mono);
  c.require(w.pf.poles.size() == 1 && w.pf.poles[0].residue == q(5, 6) && w.pf.constant == q(1), "exact Weyl function");
  auto rec = solve_dirichlet(spectral_input(exact, fe.dirichlet));
  c.require(rec.pair.size() == 1 && rec.pair.nodes()[0].omega == q(1) && rec.pair.nodes()[0].tanh_half == q(0),
            "exact inverse");
  auto per = solve_periodic(fe.delta, fe.dirichlet.divisor, exact.period());
  c.require(per.pair.size() == 1 && per.pair.nodes()[0].omega == q(1), "exact periodic inverse");

  auto pair = fixtures::s1();
  auto ff = analyze(pair);
  c.bound(fixtures::coeff_distance(ff.delta, Poly<double>{1.25, -0.75}), 1e-12, "Delta");
  c.bound(std::abs(ff.spectra.periodic.at(0).value - 1.0 / 3), 1e-12, "periodic eigenvalue");
  c.bound(std::abs(ff.spectra.antiperiodic.at(0).value - 3.0), 1e-12, "antiperiodic eigenvalue");
  c.bound(std::abs(eval_state(pair, 0.0).u - 5.0 / 6), 1e-12, "u(0)");
  c.bound(std::abs(eval_P(pair, 0.0) - 41.0 / 72), 1e-12, "P(0)");
  auto rt = roundtrip(pair);
  c.bound(rt.max(), 1e-12, "roundtrip");
  c.bound(trace_report(pair).max_residual(), 1e-12, "trace residual");
  return c;
}

Check criterion_t2() {
  Check c;
  auto exact = fixtures::t2_exact();
  auto dir = dirichlet_data(exact);
  c.require(dir.spectrum.size() == 1 && dir.spectrum[0].kappa == q(-9, 2), "kappa");
  c.require(dir.spectrum.size() == 1 && dir.spectrum[0].gamma == q(1, 6), "gamma");
  c.require(dir.divisor.size() == 2 && dir.divisor[0].zeta == q(15, 8), "zeta");
  auto report = trace_report(exact);
  c.bound(std::abs(report.at("trace1").lhs), 1e-12, "trace1");
  c.bound(std::abs(report.at("trace2").lhs - 40.0 / 27), 1e-12, "trace2");
  c.bound(std::abs(report.at("tid1").lhs - 1.0 / 9), 1e-12, "tid1");
  c.bound(std::abs(report.at("tid2").lhs - 7.0 / 81), 1e-12, "tid2");
  c.bound(report.max_residual(), 1e-12, "identity residual");

  auto fw = analyze(fixtures::t2());
  c.bound(std::abs(fw.dirichlet.spectrum.at(0).kappa + 4.5) / 4.5, 1e-12, "floating kappa");
  c.bound(std::abs(fw.dirichlet.spectrum.at(0).gamma - 1.0 / 6) * 6, 1e-12, "floating gamma");
  c.bound(std::abs(fw.dirichlet.divisor.at(0).zeta - 15.0 / 8) / 1.875, 1e-12, "floating zeta");
  return c;
}

Check criterion_dirichlet(const std::vector<PeakonPair<double>>& corpus) {
  Check c;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& pair = corpus[k];
    double d = INFINITY;
    try {
      d = node_distance(pair, solve_dirichlet(spectral_input(pair, dirichlet_data(pair))).pair);
    } catch (const SpectralError&) {
    }
    c.bound(d, 1e-7, "pair " + std::to_string(k) + " node distance");
  }
  return c;
}

Check criterion_periodic(const std::vector<PeakonPair<double>>& corpus) {
  Check c;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& pair = corpus[k];
    double d = INFINITY;
    try {
      auto data = periodic_data(pair);
      d = node_distance(pair, solve_periodic(data.delta, data.divisor, pair.period(), pair.a()).pair);
    } catch (const SpectralError&) {
    }
    c.bound(d, 1e-7, "pair " + std::to_string(k) + " node distance");
  }
  return c;
}

Check criterion_grid() {
  Check c;
  const Poly<double> delta{1.25, 0.0, -1.0 / 6};
  const auto family = isospectral_sample(delta, Period<double>::from_length(fixtures::kLn4), 4);
  c.require(family.size() == 16, "family size " + std::to_string(family.size()));
  const auto ref = conserved_quantities(fixtures::t2());
  for (const auto& p : family) {
    c.bound(fixtures::coeff_distance(delta, analyze(p).delta), 1e-7, "Delta");
    const auto cq = conserved_quantities(p);
    c.bound(std::abs(cq.int_u - ref.int_u), 1e-7, "int u");
    c.bound(std::abs(cq.int_mu - ref.int_mu), 1e-7, "int mu");
  }
  return c;
}

Check criterion_invariants(const std::vector<PeakonPair<double>>& corpus) {
  Check c;
  std::mt19937_64 rng(kCorpusSeed + 1);
  std::uniform_real_distribution<double> unit(0, 1);
  for (const auto& pair : corpus) {
    const auto fw = analyze(pair);
    c.bound(fixtures::coeff_distance(fw.mono.det(), Poly<double>::constant(1.0)), 1e-9, "det M - 1");

    for (int k = 0; k < 10; ++k) {
      auto moved = rebase(pair, pair.a() + unit(rng) * pair.ell());
      c.bound(fixtures::coeff_distance(fw.delta, discriminant(monodromy(moved))), 1e-9, "base-point change of Delta");
    }

    if (fw.delta.degree() >= 2) {
      const auto d1 = fw.delta.derivative(), d2 = d1.derivative();
      for (const auto& r : real_roots(d1, false)) {
        const double v = fw.delta(r.value);
        c.require(std::abs(v) >= 1 - 1e-10 && v * d2(r.value) <= 1e-9 * (1 + std::abs(v * d2(r.value))),
                  "critical value condition");
      }
    }

    for (std::size_t g = 0; g < fw.gaps.gaps.size(); ++g) {
      const auto& comp = fw.dirichlet.divisor.at(g);
      const auto& gap = fw.gaps.gaps[g];
      if (comp.kappa.is_finite()) {
        c.require(gap.excess(comp.kappa.value) <= kGapSlack, "interlacing");
      } else {
        c.require(gap.outermost, "interlacing: inner gap without eigenvalue");
      }
    }

    const auto w = weyl_function(fw.mono);
    for (int k = 0; k < 20; ++k) {
      const std::complex<double> z(12 * unit(rng) - 6, 4 * unit(rng) + 0.01);
      c.require(w.f(z).imag() > 0, "Herglotz sign");
    }

    for (const auto& e : fw.dirichlet.spectrum) {
      const auto ni = fixtures::norming_integrals(pair, e.kappa);
      c.bound(std::abs(static_cast<double>(ni.energy) * e.gamma - 1), 1e-8, "norming constant, energy route");
      c.bound(std::abs(static_cast<double>(ni.masses) * e.gamma * e.kappa - 1), 1e-8, "norming constant, mass route");
    }

    int total = 0, off_base = 0, infinite = 0;
    for (const auto& n : pair.nodes()) {
      const int wgt = 1 + (n.upsilon > 0 ? 1 : 0);
      total += wgt;
      if (&n != pair.base_node()) off_base += wgt;
    }
    c.require(std::max(fw.delta.degree(), 0) == total && static_cast<int>(fw.dirichlet.spectrum.size()) == off_base,
              "degree law");

    if (pair.empty()) continue;
    for (const auto& comp : fw.dirichlet.divisor) infinite += comp.kappa.is_finite() ? 0 : 1;
    double want;
    if (infinite == 2) {
      want = -pair.base_node()->upsilon;
    } else if (infinite == 1) {
      want = pair.base_node()->omega;
    } else {
      const double d1 = pair.nodes().front().x - pair.a(), dn = pair.a() + pair.ell() - pair.nodes().back().x;
      want = 0.5 / std::tanh(d1 / 2) + 0.5 / std::tanh(dn / 2);
    }
    for (bool periodic : {true, false}) {
      const double got = base_mass_product(fw.spectra, fw.dirichlet, pair.period(), periodic);
      c.bound(std::abs(got - want) / (1 + std::abs(want)), 1e-9, "base-mass product");
    }
  }
  return c;
}

Check criterion_traces(const std::vector<PeakonPair<double>>& corpus) {
  Check c;
  for (const auto& pair : corpus) {
    for (const auto& it : trace_report(pair).items) c.bound(it.residual, 1e-8, std::string(it.name));
  }
  return c;
}

Check criterion_errors() {
  Check c;
  const RatFunc<Rational> reciprocal(Poly<Rational>{q(1)}, Poly<Rational>{q(0), q(1)});
  c.require(code_of([&] { stieltjes_extract(reciprocal); }) == ErrorCode::NotAdmissible, "m = 1/z accepted");

  const auto period = Period<double>::from_length(fixtures::kLn4);
  const Poly<double> delta{1.25, 0.0, -1.0 / 6};
  using X = ExtendedReal<double>;
  DivisorPoint<double> off{{-1, X::finite(-4.5), 1.0}, {1, X::pos_inf(), 0.0}};
  c.require(code_of([&] { solve_periodic(delta, off, period); }) == ErrorCode::DivisorOffTorus, "off-torus divisor");
  DivisorPoint<double> on{{-1, X::finite(-4.5), 1.875}, {1, X::pos_inf(), 0.0}};
  c.require(code_of([&] { solve_periodic(Poly<double>{1.5, 0.0, -1.0 / 6}, on, period); }) ==
                ErrorCode::BadNormalization,
            "mis-normalized Delta");
  return c;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const auto corpus = random_corpus();
  struct Row {
    int id;
    const char* title;
    std::function<Check()> run;
  };
  const std::vector<Row> rows{
      {1, "S1 fixture, exact and floating", criterion_s1},
      {2, "T2 fixture", criterion_t2},
      {3, "Dirichlet roundtrip, 50 random pairs", [&] { return criterion_dirichlet(corpus); }},
      {4, "periodic roundtrip, 50 random pairs", [&] { return criterion_periodic(corpus); }},
      {5, "T2 isospectral 4x4 grid", criterion_grid},
      {6, "invariant suite", [&] { return criterion_invariants(corpus); }},
      {7, "trace identities", [&] { return criterion_traces(corpus); }},
      {8, "error paths", criterion_errors},
  };
  std::vector<Check> results;
  for (const auto& row : rows) {
    Check c;
    try {
      c = row.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.note = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(c));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  results[2].require(secs < 30, "suite took " + std::to_string(secs) + " s");
  int failed = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& c = results[k];
    failed += c.ok ? 0 : 1;
    std::printf("%s criterion %d: %s (worst %.3g)%s%s\n", c.ok ? "PASS" : "FAIL", rows[k].id, rows[k].title, c.worst,
                c.ok ? "" : ": ", c.note.c_str());
  }
  std::printf("elapsed %.2f s\n", secs);
  return failed == 0 ? 0 : 1;
}
