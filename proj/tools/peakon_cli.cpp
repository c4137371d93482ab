#include <cmath>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "peakon/io.hpp"
#include "peakon/peakon.hpp"

using namespace peakon;
using io::json;

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string divisor;
  std::string mode = "float";
  double tol = 1e-7;
  int samples = 4;
  double new_base = 0;

  bool rational() const { return mode == "rational"; }
};

void emit(const Options& opt, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (opt.output.empty()) {
    std::cout << text;
  } else {
    io::write_text(opt.output, text);
  }
}

template <Scalar T>
int forward(const Options& opt) {
  const auto pair = io::pair_from_json<T>(io::read_json(opt.input));
  emit(opt, io::to_json(pair, analyze(pair)));
  return 0;
}

template <Scalar T>
int inv_dirichlet(const Options& opt) {
  const auto rec = solve_dirichlet(io::dirichlet_input_from_json<T>(io::read_json(opt.input)));
  emit(opt, io::to_json(rec.pair));
  std::cerr << "residual " << rec.residual << "\n";
  return rec.residual <= opt.tol ? 0 : 1;
}

int inv_periodic(const Options& opt) {
  const auto disc = io::discriminant_from_json(io::read_json(opt.input));
  const auto divisor = io::divisor_from_json(io::read_json(opt.divisor));
  const auto rec = solve_periodic(disc.delta, divisor, disc.period, disc.a);
  emit(opt, io::to_json(rec.pair));
  std::cerr << "residual " << rec.residual << "\n";
  return rec.residual <= opt.tol ? 0 : 1;
}

template <Scalar T>
int roundtrip_cmd(const Options& opt) {
  const auto r = roundtrip(io::pair_from_json<T>(io::read_json(opt.input)));
  std::cout << "dirichlet " << r.dirichlet << "\nperiodic " << r.periodic << "\nmax " << r.max() << "\n";
  return r.max() < opt.tol ? 0 : 1;
}

template <Scalar T>
int trace_check(const Options& opt) {
  const auto report = trace_report(io::pair_from_json<T>(io::read_json(opt.input)));
  emit(opt, io::to_json(report));
  return report.max_residual() < opt.tol ? 0 : 1;
}

int isospectral(const Options& opt) {
  const auto disc = io::discriminant_from_json(io::read_json(opt.input));
  std::string lines;
  for (const auto& p : isospectral_sample(disc.delta, disc.period, opt.samples, disc.a)) lines += io::to_json(p).dump() + "\n";
  if (opt.output.empty()) {
    std::cout << lines;
  } else {
    io::write_text(opt.output, lines);
  }
  return 0;
}

int shift_base(const Options& opt) {
  const auto pair = io::pair_from_json<double>(io::read_json(opt.input));
  const auto moved = rebase(pair, opt.new_base);
  const auto before = analyze(pair), after = analyze(moved);
  double change = 0;
  for (int k = 0; k <= std::max(before.delta.degree(), after.delta.degree()); ++k) {
    change = std::max(change, std::abs(before.delta.coeff(k) - after.delta.coeff(k)));
  }
  change /= std::max(1.0, before.delta.max_abs());
  auto kappas = [](const ForwardAnalysis<double>& fw) {
    json out = json::array();
    for (const auto& e : fw.dirichlet.spectrum) out.push_back(e.kappa);
    return out;
  };
  emit(opt, {{"pair", io::to_json(moved)},
             {"kappas_before", kappas(before)},
             {"kappas_after", kappas(after)},
             {"delta_change", change}});
  return change <= opt.tol ? 0 : 1;
}

template <Scalar T>
int dispatch(const std::string& name, const Options& opt) {
  if (name == "forward") return forward<T>(opt);
  if (name == "inv-dirichlet") return inv_dirichlet<T>(opt);
  if (name == "roundtrip") return roundtrip_cmd<T>(opt);
  if (name == "trace-check") return trace_check<T>(opt);
  if (name == "inv-periodic") return inv_periodic(opt);
  if (name == "isospectral-sample") return isospectral(opt);
  return shift_base(opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral data of periodic multi-peakon pairs"};
  app.require_subcommand(1);
  Options opt;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("-i,--input", opt.input, "input file")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", opt.output, "output file (default stdout)");
    cmd->add_option("--tol", opt.tol, "tolerance for residual checks")->check(CLI::PositiveNumber);
    return cmd;
  };
  auto add_mode = [&](CLI::App* cmd) {
    cmd->add_option("--mode", opt.mode, "float or rational")->check(CLI::IsMember({"float", "rational"}));
  };

  add_mode(add("forward", "pair file -> spectral-data file"));
  add_mode(add("inv-dirichlet", "spectral-data file -> pair file"));
  add_mode(add("roundtrip", "both inverse roundtrips of a pair file"));
  add_mode(add("trace-check", "trace identity residuals of a pair file"));
  add("inv-periodic", "discriminant + divisor files -> pair file")
      ->add_option("--divisor", opt.divisor, "divisor file")
      ->required()
      ->check(CLI::ExistingFile);
  add("isospectral-sample", "discriminant file -> one pair per line")
      ->add_option("--samples", opt.samples, "angles per open gap")
      ->check(CLI::PositiveNumber);
  add("shift-base", "pair file -> same pair from another base point")
      ->add_option("--new-base", opt.new_base, "new base point")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return opt.rational() ? dispatch<Rational>(name, opt) : dispatch<double>(name, opt);
  } catch (const SpectralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const io::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
}
