#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace peakon;
using fixtures::q;

namespace {

DirichletSpectralInput<double> t2_input() {
  return {{{-4.5, 1.0 / 6}}, 1.0, 0.0, Period<double>::from_length(fixtures::kLn4), 0.0};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const SpectralError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InternalInconsistency;
}

}  // namespace

TEST(AssembleM, T2MatchesWeylFunction) {
  auto in = spectral_input(fixtures::t2_exact(), dirichlet_data(fixtures::t2_exact()));
  auto m = assemble_m(in);
  auto w = weyl_function(monodromy(fixtures::t2_exact())).f;
  for (auto z : {q(1), q(-3, 7), q(5, 2)}) EXPECT_EQ(m(z), w(z));
}

TEST(SolveDirichlet, T2Floating) {
  auto rec = solve_dirichlet(t2_input());
  EXPECT_LE(fixtures::pair_distance(rec.pair, fixtures::t2()), 1e-12);
  EXPECT_LE(rec.residual, 1e-12);
}

TEST(SolveDirichlet, T2Exact) {
  DirichletSpectralInput<Rational> in{
      {{q(-9, 2), q(1, 6)}}, q(1), q(0), Period<Rational>::from_tanh_half(q(3, 5)), 0.0};
  auto rec = solve_dirichlet(in);
  ASSERT_EQ(rec.pair.size(), 2u);
  EXPECT_EQ(rec.pair.nodes()[1].tanh_half, q(1, 2));
  EXPECT_EQ(rec.pair.nodes()[1].omega, q(-1));
  EXPECT_EQ(rec.residual, 0.0);
}

TEST(SolveDirichlet, ExactRoundtrip) {
  fixtures::PairGenerator gen(51);
  int exact = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto pair = gen.exact_pair(2);
    if (!has_exact_dirichlet_spectrum(monodromy(pair))) {
      EXPECT_LE(roundtrip(pair).dirichlet, 1e-7) << "trial " << trial;
      continue;
    }
    ++exact;
    auto rec = solve_dirichlet(spectral_input(pair, dirichlet_data(pair)));
    ASSERT_EQ(rec.pair.size(), pair.size()) << "trial " << trial;
    for (std::size_t n = 0; n < pair.size(); ++n) {
      EXPECT_EQ(rec.pair.nodes()[n].tanh_half, pair.nodes()[n].tanh_half);
      EXPECT_EQ(rec.pair.nodes()[n].omega, pair.nodes()[n].omega);
      EXPECT_EQ(rec.pair.nodes()[n].upsilon, pair.nodes()[n].upsilon);
    }
    EXPECT_EQ(rec.residual, 0.0);
  }
  EXPECT_GE(exact, 20);
}

TEST(SolveDirichlet, FloatingRoundtrip) {
  fixtures::PairGenerator gen(52);
  for (int trial = 0; trial < 50; ++trial) {
    auto pair = gen.pair();
    auto rec = solve_dirichlet(spectral_input(pair, dirichlet_data(pair)));
    EXPECT_LE(fixtures::pair_distance(pair, rec.pair), 1e-7) << "trial " << trial;
  }
}

TEST(SolveDirichlet, DataFromReconstructionMatchesInput) {
  // random admissible data: the reconstruction reproduces it through the forward map
  fixtures::PairGenerator gen(53);
  for (int trial = 0; trial < 50; ++trial) {
    const int count = gen.integer(0, 5);
    DirichletSpectralInput<double> in;
    in.period = Period<double>::from_length(gen.uniform(0.5, 3.0));
    while (static_cast<int>(in.spectrum.size()) < count) {
      double k = gen.uniform(-5, 5);
      bool apart = std::abs(k) > 0.2;
      for (const auto& e : in.spectrum) apart = apart && std::abs(e.kappa - k) > 0.2;
      if (apart) in.spectrum.push_back({k, gen.uniform(0.05, 2.0)});
    }
    if (gen.coin(0.3)) in.omega_a = gen.uniform(-2, 2);
    if (gen.coin(0.3)) in.upsilon_a = gen.uniform(0.1, 1);
    if (in.omega_a == 0 && in.upsilon_a == 0 && gen.coin(0.5)) in.omega_a = 1;
    auto rec = solve_dirichlet(in);
    EXPECT_LE(rec.residual, 1e-7) << "trial " << trial;
    auto got = dirichlet_data(rec.pair);
    EXPECT_LE(detail::dirichlet_mismatch(got, in), 1e-7) << "trial " << trial;
  }
}

TEST(SolveDirichlet, SignLaw) {
  fixtures::PairGenerator gen(54);
  for (int trial = 0; trial < 40; ++trial) {
    auto pair = gen.pair({.max_nodes = 5, .allow_base_node = false, .allow_upsilon = false, .nonnegative_omega = true});
    for (const auto& e : dirichlet_data(pair).spectrum) EXPECT_GT(e.kappa, 0.0) << "trial " << trial;
  }
  for (int trial = 0; trial < 40; ++trial) {
    DirichletSpectralInput<double> in;
    in.period = Period<double>::from_length(gen.uniform(0.5, 3.0));
    double k = 0;
    for (int j = 0; j < gen.integer(1, 5); ++j) {
      k += gen.uniform(0.3, 2.0);
      in.spectrum.push_back({k, gen.uniform(0.05, 2.0)});
    }
    auto rec = solve_dirichlet(in);
    for (const auto& n : rec.pair.nodes()) {
      EXPECT_GE(n.omega, 0.0) << "trial " << trial;
      EXPECT_EQ(n.upsilon, 0.0) << "trial " << trial;
    }
  }
}

TEST(SolveDirichlet, PositionsInsidePeriod) {
  fixtures::PairGenerator gen(55);
  for (int trial = 0; trial < 30; ++trial) {
    auto pair = gen.pair();
    auto rec = solve_dirichlet(spectral_input(pair, dirichlet_data(pair)));
    double prev = -1;
    for (const auto& n : rec.pair.nodes()) {
      EXPECT_GT(n.tanh_half, prev);
      EXPECT_LT(n.tanh_half, std::tanh(pair.ell() / 2));
      prev = n.tanh_half;
    }
  }
}

TEST(SolveDirichlet, ErrorPaths) {
  auto in = t2_input();
  in.spectrum[0].gamma = -1;
  EXPECT_EQ(code_of([&] { solve_dirichlet(in); }), ErrorCode::NotAdmissible);
  in = t2_input();
  in.upsilon_a = -0.5;
  EXPECT_EQ(code_of([&] { solve_dirichlet(in); }), ErrorCode::NotAdmissible);
  in = t2_input();
  in.spectrum.push_back({-4.5, 0.2});
  EXPECT_EQ(code_of([&] { solve_dirichlet(in); }), ErrorCode::NotAdmissible);
  in = t2_input();
  in.spectrum[0].kappa = 0;
  EXPECT_EQ(code_of([&] { solve_dirichlet(in); }), ErrorCode::NotAdmissible);
}
