// Command-line driver: verify, bessel, gap, dtn, theorem22, sweep.
// Exit codes: 0 pass, 1 verdict false or failing suite, 2 usage or configuration error.

#include "dtn/dtn_engine.hpp"
#include "dtn/errors.hpp"
#include "dtn/experiments.hpp"
#include "dtn/spectral_gap.hpp"
#include "dtn/special_functions.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace dtn;

namespace {

struct Global {
  std::string config;
  std::optional<unsigned> precision;
  std::string out;
  std::string format;  // empty: subcommand default
};

void emit(const Global& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + g.out + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

experiments::ExperimentParams load_params(const Global& g) {
  nlohmann::json j = nlohmann::json::object();
  if (!g.config.empty()) {
    std::ifstream f(g.config);
    if (!f) throw ConfigError("cannot read config '" + g.config + "'");
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  if (g.precision) j["precision"] = *g.precision;
  return experiments::ExperimentParams::from_json(j);
}

std::string format_of(const Global& g, const std::string& fallback) {
  const std::string f = g.format.empty() ? fallback : g.format;
  if (f != "json" && f != "csv") throw ConfigError("--format must be csv or json");
  return f;
}

std::string matrix_csv(const basis::DtnMatrix& a) {
  std::ostringstream os;
  os << "f1,f2,j1,j2,log2_abs,phase\n";
  os.precision(17);
  for (const auto& [k, v] : a.entries)
    os << k.first.frequency() << ',' << k.second.frequency() << ',' << k.first.j << ',' << k.second.j << ','
       << v.magnitude.log2_abs() << ',' << v.phase << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DtN-map instability toolkit"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--precision", g.precision, "working precision in bits")->check(CLI::Range(64u, 1u << 16));
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "csv or json");

  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  std::string suite = "all";
  verify->add_option("suite", suite, "bessel, basis, radial, potentials, spectrum, dtn or all");

  auto* bessel = app.add_subcommand("bessel", "J, J', Y, Y' at one point");
  double nu = 0;
  std::string z = "1";
  bessel->add_option("--nu", nu, "order (integer or half-integer)");
  bessel->add_option("--z", z, "argument (decimal string, parsed at the working precision)");

  auto* gap = app.add_subcommand("gap", "eigenvalue-free interval near (rho^2, 2 rho^2)");
  double rho = 1.5;
  int dim = 2;
  bool with_c1 = false;
  gap->add_option("--rho", rho);
  gap->add_option("--d", dim);
  gap->add_flag("--c1", with_c1, "measure the Weyl constant and report the gap constants");

  auto* dtn = app.add_subcommand("dtn", "DtN difference matrix for v_nm");
  std::optional<double> energy;
  long n = 12, degree_max = 30;
  int m = 3;
  bool conj = false;
  dtn->add_option("--energy", energy, "energy (default: gap energy for rho = 1.5)");
  dtn->add_option("--n", n);
  dtn->add_option("--m", m);
  dtn->add_option("--degree-max", degree_max);
  dtn->add_flag("--conjugate", conj, "use e^{-in theta}");

  auto* thm = app.add_subcommand("theorem22", "end-to-end instability certificate");
  bool timings = false;
  thm->add_flag("--timings", timings, "include wall-clock runtimes in the report");

  auto* sweep = app.add_subcommand("sweep", "parameter sweep (CSV)");
  std::string axis = "n", range;
  sweep->add_option("--axis", axis, "n, E or m");
  sweep->add_option("--range", range, "start:stop:step")->required();

  for (auto* sub : {verify, bessel, gap, dtn, thm, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const experiments::ExperimentParams params = load_params(g);
    const unsigned prec = params.precision;

    if (verify->parsed()) {
      if (!experiments::is_known_suite(suite)) {
        std::cerr << "unknown suite '" << suite << "'\n" << verify->help();
        return 2;
      }
      const auto j = experiments::cmd_verify(suite, g.precision ? *g.precision : kDefaultPrecisionBits);
      emit(g, j.dump(2));
      return j.at("passed").get<bool>() ? 0 : 1;
    }

    if (bessel->parsed()) {
      ScopedPrecision guard(prec);
      const auto o = special::BesselOrder::from_double(nu);
      const Real zz(z);
      if (!(zz > 0)) throw ConfigError("--z must be positive");
      const XReal jv = special::bessel_j(o, zz, prec), jp = special::bessel_j_prime(o, zz, prec);
      const XReal yv = special::bessel_y(o, zz, prec), yp = special::bessel_y_prime(o, zz, prec);
      const XReal w = jv * yp - jp * yv;
      const XReal ref(Real(2 / (real_pi() * zz)));
      nlohmann::json j = {{"nu", nu},
                          {"z", z},
                          {"precision_bits", prec},
                          {"J", jv.str(30)},
                          {"Jp", jp.str(30)},
                          {"Y", yv.str(30)},
                          {"Yp", yp.str(30)},
                          {"wronskian_rel_error", ((w - ref).abs() / ref).to_double()}};
      if (format_of(g, "json") == "csv") {
        std::ostringstream os;
        os << "nu,z,J,Jp,Y,Yp\n" << nu << ',' << z << ',' << jv.str(30) << ',' << jp.str(30) << ',' << yv.str(30)
           << ',' << yp.str(30) << '\n';
        emit(g, os.str());
      } else {
        emit(g, j.dump(2));
      }
      return 0;
    }

    if (gap->parsed()) {
      std::optional<double> c1;
      if (with_c1) c1 = spectrum::measure_c1(dim).c1;
      const auto table = spectrum::disk_eigenvalues(dim, 2 * rho * rho * 1.0001, std::min(prec, 256u));
      const auto r = spectrum::find_gap_energy(rho, table, c1);
      if (format_of(g, "json") == "csv") {
        emit(g, table.to_csv());
      } else {
        emit(g, r.to_json().dump(2));
      }
      return r.reverified ? 0 : 1;
    }

    if (dtn->parsed()) {
      ScopedPrecision guard(prec);
      const double e = energy ? *energy : spectrum::find_gap_energy(1.5, 2, std::nullopt, 128).energy;
      auto v = potentials::PotentialVnm::make(n, m, params.bump, 2, prec);
      if (conj) v = v.conjugate();
      engine::ChainContext ctx(Real(e), v, degree_max, params.engine_options(prec));
      std::vector<engine::ModeChain> chains;
      const auto a = engine::dtn_diff_matrix(ctx, degree_max, &chains);
      const auto table = spectrum::disk_eigenvalues(2, 2 * e + 10, 128);
      const auto budget = spectrum::resolvent_budget(Real(e), v.eps, table);
      const auto rep = engine::solve_report(ctx, a, chains, budget.q.to_double(), params.residual_tolerance);
      if (format_of(g, "csv") == "csv") {
        emit(g, matrix_csv(a));
      } else {
        emit(g, nlohmann::json{{"report", rep.to_json()}, {"matrix", a.to_json()}}.dump(2));
      }
      return rep.passed ? 0 : 1;
    }

    if (thm->parsed()) {
      const auto r = experiments::cmd_theorem22(params);
      emit(g, r.to_json(timings).dump(2));
      return r.verdict ? 0 : 1;
    }

    if (sweep->parsed()) {
      format_of(g, "csv");
      const auto ax = experiments::parse_axis(axis);
      const auto values = experiments::parse_range(range);
      emit(g, experiments::cmd_sweep(ax, values, params));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
