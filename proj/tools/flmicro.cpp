// Command-line entry point: loads JSON descriptors, dispatches to the
// library, and writes JSON or CSV reports.  Exit codes: 0 = all checks
// passed, 1 = a check failed (report still written), 2 = bad configuration.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "flm/grid_fourier.hpp"
#include "flm/microlocal.hpp"
#include "flm/newton_polyhedron.hpp"
#include "flm/pdo.hpp"
#include "flm/propagation.hpp"
#include "flm/weights.hpp"

using nlohmann::json;

namespace {

constexpr const char* kVersion = "flmicro 1.0.0";

struct CommonOpts {
  std::string in, out, format = "json";
  std::uint64_t seed = 20260826;
  std::size_t grid_points = 256;
  double grid_extent = 3.0;
  int refine = 2;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--in", o->in, "input descriptor (JSON)");
  cmd->add_option("--out", o->out, "output report path (default: stdout)");
  cmd->add_option("--format", o->format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", o->seed, "seed for randomized probes");
  cmd->add_option("--grid-points", o->grid_points, "grid samples per axis");
  cmd->add_option("--grid-extent", o->grid_extent, "grid half-width per axis");
  cmd->add_option("--refine", o->refine, "refinement levels");
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw flm::BadParam("cannot open input file: " + path);
  json j;
  f >> j;
  return j;
}

// Key/value rows; only flat numeric/string tables go to CSV.
std::string to_csv(const json& report) {
  std::ostringstream os;
  os << "key,value\n";
  std::function<void(const std::string&, const json&)> walk =
      [&](const std::string& prefix, const json& node) {
        if (node.is_object()) {
          for (auto it = node.begin(); it != node.end(); ++it)
            walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
        } else if (node.is_array()) {
          for (std::size_t i = 0; i < node.size(); ++i)
            walk(prefix + "[" + std::to_string(i) + "]", node[i]);
        } else {
          os << prefix << "," << node.dump() << "\n";
        }
      };
  walk("", report);
  return os.str();
}

void require_json_only(const CommonOpts& o, const std::string& command) {
  if (o.format == "csv")
    throw flm::BadParam("the " + command + " report is nested; csv output only applies to "
                        "tabular reports (weight-check, estimate)");
}

void emit(const CommonOpts& o, const json& report) {
  const std::string text = o.format == "csv" ? to_csv(report) : report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw flm::BadParam("cannot open output file: " + o.out);
    f << text;
  }
}

json config_echo(const CommonOpts& o, const std::string& command) {
  return json{{"version", kVersion}, {"command", command},   {"seed", o.seed},
              {"format", o.format},  {"in", o.in},           {"out", o.out},
              {"grid_points", o.grid_points},                {"grid_extent", o.grid_extent},
              {"refine", o.refine}};
}

std::string rational_str(const flm::Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

flm::Weight make_weight(const std::string& family, double m, std::vector<long long> M,
                        double r, int n) {
  if (family == "homogeneous") return flm::make_homogeneous(n, m);
  if (family == "quasi_homogeneous") {
    if (M.empty()) throw flm::BadParam("quasi_homogeneous needs --M");
    return flm::make_quasi_homogeneous(M, m);
  }
  if (family == "log_type") return flm::make_log_type(n, r, m);
  if (family == "constant") return flm::make_constant(n, m > 0.0 ? m : 1.0);
  throw flm::BadParam("unknown weight family: " + family);
}

flm::Condition parse_condition(const std::string& name) {
  if (name == "T") return flm::Condition::temperate;
  if (name == "SV") return flm::Condition::slowly_varying;
  if (name == "SA") return flm::Condition::subadditive;
  if (name == "SM") return flm::Condition::submultiplicative;
  if (name == "G") return flm::Condition::delta_split;
  if (name == "B") return flm::Condition::beurling;
  if (name == "PG") return flm::Condition::polynomial_growth;
  if (name == "SB") return flm::Condition::scale_bounded;
  throw flm::BadParam("unknown condition: " + name);
}

flm::Field random_band_limited(const flm::GridSpec& g, std::mt19937_64& rng, double band) {
  flm::Spectrum spec{g, std::vector<flm::complex>(g.size(), flm::complex(0.0))};
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> xi(static_cast<std::size_t>(g.n));
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point_xi(i, xi.data());
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    if (r2 <= band * band) spec.values[i] = flm::complex(ud(rng), ud(rng));
  }
  return flm::idft(spec);
}

int cmd_polyhedron(const CommonOpts& o) {
  require_json_only(o, "polyhedron");
  if (o.in.empty()) throw flm::BadParam("polyhedron requires --in");
  json in = load_json(o.in);
  std::vector<flm::LatticePoint> pts;
  for (const auto& v : in.at("vertices")) pts.push_back(v.get<flm::LatticePoint>());
  auto P = flm::build_polyhedron(pts);
  json facets = json::array();
  for (const auto& f : P.inner_facets()) {
    json nrm = json::array();
    for (const auto& c : f.normal) nrm.push_back(rational_str(c));
    facets.push_back({{"normal", nrm}, {"vertices", f.vertices}});
  }
  json vertices = json::array();
  for (const auto& v : P.vertices()) vertices.push_back(v);
  json report{{"config", config_echo(o, "polyhedron")},
              {"dim", P.dim()},
              {"vertices", vertices},
              {"inner_facets", facets},
              {"mu0", P.mu0()},
              {"mu1", P.mu1()},
              {"mu", rational_str(P.mu())},
              {"mu_value", boost::rational_cast<double>(P.mu())},
              {"delta", rational_str(P.delta())},
              {"delta_value", boost::rational_cast<double>(P.delta())},
              {"lattice_points", flm::lattice_points(P, false).size()},
              {"interior_lattice_points", flm::lattice_points(P, true).size()},
              {"passed", true}};
  emit(o, report);
  return 0;
}

int cmd_weight_check(const CommonOpts& o, const std::string& family, double m,
                     const std::vector<long long>& M, double r, int n,
                     const std::string& cond) {
  auto w = make_weight(family, m, M, r, n);
  flm::SamplingPlan plan;
  plan.seed = o.seed;
  plan.levels = std::max(2, o.refine);
  auto rep = flm::check_condition(w, parse_condition(cond), plan);
  // First-order derivative decay for the scaling families; the gain per
  // derivative is 1/m_1 for quasi-homogeneous orders, 1 otherwise.
  bool decay_ok = true;
  double decay_constant = 0.0;
  if ((family == "homogeneous" && m != 0.0) || family == "quasi_homogeneous") {
    std::vector<int> alpha(static_cast<std::size_t>(w.n), 0);
    alpha[0] = 1;
    // One derivative gains one order of decay: 1/m for <.>^m, 1/m_j per axis
    // for the anisotropic family.
    std::vector<double> gain(static_cast<std::size_t>(w.n),
                             family == "homogeneous" ? 1.0 / m : 1.0);
    if (family == "quasi_homogeneous")
      for (std::size_t j = 0; j < M.size(); ++j) gain[j] = 1.0 / static_cast<double>(M[j]);
    auto dd = flm::check_derivative_decay(w, 1.0, alpha, gain, plan);
    decay_ok = dd.passed;
    decay_constant = dd.constant;
  }
  json report{{"config", config_echo(o, "weight-check")},
              {"family", family},
              {"m", m},
              {"condition", cond},
              {"passed", rep.passed && decay_ok},
              {"condition_passed", rep.passed},
              {"constant", rep.constant},
              {"refinement_ratio", rep.refinement_ratio},
              {"parameter", rep.parameter},
              {"derivative_decay_passed", decay_ok},
              {"derivative_decay_constant", decay_constant}};
  emit(o, report);
  return (rep.passed && decay_ok) ? 0 : 1;
}

int cmd_estimate(const CommonOpts& o, double m, double p, int pairs, bool extent_set) {
  flm::GridSpec g{1, extent_set ? o.grid_extent : 16.0, o.grid_points ? o.grid_points : 128};
  auto omega = flm::make_homogeneous(1, m);
  std::mt19937_64 rng(o.seed);
  flm::SamplingPlan plan;
  plan.seed = o.seed;
  plan.shells = 8;
  plan.quad_per_axis = 256;
  plan.truncation = 64.0;
  double worst = 0.0;
  bool all_pass = true;
  json rows = json::array();
  for (int i = 0; i < pairs; ++i) {
    auto f1 = random_band_limited(g, rng, 0.25 * g.max_xi());
    auto f2 = random_band_limited(g, rng, 0.25 * g.max_xi());
    auto rep = flm::product_estimate(f1, f2, omega, omega, omega, p, plan);
    worst = std::max(worst, rep.ratio);
    all_pass = all_pass && rep.ratio <= 1.01;
    rows.push_back(
        {{"pair", i}, {"lhs", rep.lhs}, {"rhs", rep.rhs_bound}, {"ratio", rep.ratio}});
  }
  const double q = p <= 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
  const double cq = flm::estimate_Cq(omega, omega, omega, q, plan);

  // Operator continuity for a Gaussian-coefficient multiplication symbol.
  auto sym = flm::function_symbol(
      1, [](std::span<const double> x) { return flm::complex(std::exp(-x[0] * x[0])); });
  auto u = flm::sample_space(
      g, [](std::span<const double> x) { return flm::complex(std::exp(-x[0] * x[0])); });
  auto phi = flm::sample_space(
      g, [](std::span<const double> x) { return flm::complex(std::exp(-0.25 * x[0] * x[0])); });
  auto cont = flm::verify_continuity(sym, omega, omega, omega, flm::make_constant(1, 1.0), p, u,
                                     phi, plan);

  // One random instance of the two-kernel Schur bound.
  flm::Spectrum gs{g, std::vector<flm::complex>(g.size())};
  std::normal_distribution<double> gau;
  for (std::size_t i = 0; i < gs.values.size(); ++i)
    gs.values[i] = flm::complex(gau(rng), gau(rng)) * std::exp(-0.05 * g.xi(i) * g.xi(i));
  flm::Kernel2 F = [](std::span<const double> xi, std::span<const double> eta) {
    return flm::complex(std::exp(-(xi[0] * xi[0] + eta[0] * eta[0]) / 40.0));
  };
  flm::Kernel2 fker = [](std::span<const double> z, std::span<const double>) {
    return flm::complex(std::exp(-z[0] * z[0] / 10.0));
  };
  auto schur = flm::kernel_apply(F, fker, gs, p);
  const bool schur_ok = schur.lhs_norm <= 1.01 * schur.bound();

  const bool passed = all_pass && cont.passed && schur_ok && std::isfinite(cq);
  json report{{"config", config_echo(o, "estimate")},
              {"weight_exponent", m},
              {"p", p},
              {"pairs", pairs},
              {"worst_ratio", worst},
              {"rows", rows},
              {"cq", cq},
              {"continuity_ratio", cont.ratio},
              {"continuity_passed", cont.passed},
              {"kernel_schur_ratio", schur.lhs_norm / schur.bound()},
              {"kernel_schur_passed", schur_ok},
              {"passed", passed}};
  emit(o, report);
  return passed ? 0 : 1;
}

int cmd_quantize(const CommonOpts& o, const std::string& symbol, bool extent_set) {
  require_json_only(o, "quantize");
  flm::GridSpec g;
  if (symbol == "model") {
    g = flm::GridSpec{2, o.grid_extent, o.grid_points ? o.grid_points : 128};
  } else {
    // 1-D checks need a wide box so the Gaussian is numerically compactly
    // supported; the 2-D default extent is too small for that.
    g = flm::GridSpec{1, extent_set ? o.grid_extent : 16.0,
                      o.grid_points ? o.grid_points : 512};
  }
  flm::Symbol a;
  if (symbol == "identity") {
    a = flm::multiplier_symbol(1, [](std::span<const double>) { return flm::complex(1.0); });
  } else if (symbol == "derivative") {
    a = flm::multiplier_symbol(
        1, [](std::span<const double> xi) { return flm::complex(0.0, xi[0]); });
  } else if (symbol == "model") {
    a = flm::example_symbol();
  } else {
    throw flm::BadParam("unknown symbol: " + symbol);
  }
  auto u = flm::sample_space(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); ++j) r2 += x[j] * x[j];
    return flm::complex(std::exp(-r2), 0.0);
  });
  auto f = flm::quantize(a, u);
  const auto one = flm::make_constant(g.n, 1.0);
  bool passed = true;
  double err = 0.0;
  if (symbol == "identity") {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      num += std::abs(f.values[i] - u.values[i]);
      den += std::abs(u.values[i]);
    }
    err = num / den;
    passed = err <= 1e-10;
  } else if (symbol == "derivative") {
    double worst = 0.0;
    double x[1];
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point_x(i, x);
      worst = std::max(worst,
                       std::abs(f.values[i] - flm::complex(-2.0 * x[0] * std::exp(-x[0] * x[0]))));
    }
    err = worst;
    passed = err <= 1e-6;
  }
  // Global ellipticity audit on a reference first-order elliptic symbol.
  auto lam1 = flm::make_homogeneous(1, 1.0);
  auto ref = flm::multiplier_symbol(1, [&](std::span<const double> xi) {
    return flm::complex(std::sqrt(1.0 + xi[0] * xi[0]));
  });
  flm::SpaceBox K{{-1.0}, {1.0}};
  flm::GridSpec g1{1, 16.0, 256};
  auto ell = flm::check_elliptic(ref, lam1, 1.0, K, 1.0, g1);

  passed = passed && ell.passed;
  json report{{"config", config_echo(o, "quantize")},
              {"symbol", symbol},
              {"input_norm", flm::fl_norm(u, one, 2.0)},
              {"output_norm", flm::fl_norm(f, one, 2.0)},
              {"error", err},
              {"elliptic_reference_passed", ell.passed},
              {"passed", passed}};
  emit(o, report);
  return passed ? 0 : 1;
}

int cmd_microlocal(const CommonOpts& o, double k, double eps) {
  require_json_only(o, "microlocal");
  flm::GridSpec g{2, o.grid_extent, o.grid_points ? o.grid_points : 128};
  auto wM = flm::make_quasi_homogeneous({1, 2}, 1.0);
  auto Xk = flm::mask_from_predicate(g, flm::example_Xk(k));
  auto inc = flm::find_inclusion_eps(Xk, wM, eps, flm::InclusionMode::bracket_bracket, 2.0);
  auto floor_rep =
      flm::find_inclusion_eps(Xk, wM, eps, flm::InclusionMode::masked_weight_bound, 2.0);
  double x0[2] = {0.0, 0.0};
  auto ell = flm::mcl_elliptic(flm::example_symbol(), std::span<const double>(x0, 2), Xk, 1.0,
                               wM, 0.5, 1e-2);
  // Cone/bracket equivalence on a coarser grid; both directions must verify.
  flm::GridSpec gc{2, o.grid_extent, std::min<std::size_t>(g.points, 64)};
  auto cone = flm::check_cone_equivalence(flm::example_Xk(k), {1, 2}, eps, gc, 256, 1024);

  // One-dimensional microlocal continuity and filter-membership audits.
  flm::GridSpec g1{1, 8.0, 256};
  auto lam1 = flm::make_homogeneous(1, 1.0);
  auto one = flm::make_constant(1, 1.0);
  auto gauss = [](const flm::GridSpec& gg) {
    return flm::sample_space(gg, [](std::span<const double> x) {
      return flm::complex(std::exp(-x[0] * x[0]), 0.0);
    });
  };
  auto half = flm::mask_from_predicate(g1, [](std::span<const double> xi) {
    return xi[0] > 1.0;
  });
  auto sym1 = flm::multiplier_symbol(1, [](std::span<const double> xi) {
    return flm::complex(std::sqrt(1.0 + xi[0] * xi[0]));
  });
  auto cont = flm::verify_mcl_continuity(sym1, gauss(g1), gauss(g1), half, lam1, lam1, one,
                                         lam1, 2.0, 0.5);
  auto filt = flm::filter_membership(
      gauss, gauss, [](std::span<const double> xi) { return xi[0] > 1.0; }, lam1, 1.0, 0.4, g1);

  const bool passed = inc.verified && floor_rep.verified && ell.passed && cone.verified &&
                      cont.passed && filt.member;
  json report{{"config", config_echo(o, "microlocal")},
              {"k", k},
              {"eps", eps},
              {"inclusion_verified", inc.verified},
              {"eps_prime", inc.eps_prime},
              {"weight_floor_c", floor_rep.c_hat},
              {"elliptic_passed", ell.passed},
              {"elliptic_c0", ell.c0},
              {"elliptic_eps", ell.eps_used},
              {"cone_equivalence_verified", cone.verified},
              {"cone_forward", cone.forward},
              {"cone_backward", cone.backward},
              {"continuity_passed", cont.passed},
              {"continuity_ratio", cont.ratio},
              {"filter_member", filt.member},
              {"passed", passed}};
  emit(o, report);
  return passed ? 0 : 1;
}

int cmd_demo(const CommonOpts& o) {
  require_json_only(o, "demo");
  flm::DemoScenario sc;
  sc.grid = flm::GridSpec{2, o.grid_extent, o.grid_points ? o.grid_points : 256};
  sc.seed = o.seed;
  if (!o.in.empty()) {
    json in = load_json(o.in);
    if (in.contains("grid")) {
      sc.grid.points = in["grid"].value("points", sc.grid.points);
      sc.grid.extent = in["grid"].value("extent", sc.grid.extent);
    }
    sc.k = in.value("k", sc.k);
    sc.p = in.value("p", sc.p);
    sc.t_tilde = in.value("t_tilde", sc.t_tilde);
    sc.s = in.value("s", sc.s);
    sc.ridge_width = in.value("ridge_width", sc.ridge_width);
    sc.ridge_amplitude = in.value("ridge_amplitude", sc.ridge_amplitude);
    sc.smooth_amplitude = in.value("smooth_amplitude", sc.smooth_amplitude);
    sc.eps = in.value("eps", sc.eps);
    sc.chi_sigma = in.value("chi_sigma", sc.chi_sigma);
    sc.phi_sigma = in.value("phi_sigma", sc.phi_sigma);
    sc.weight_floor = in.value("weight_floor", sc.weight_floor);
    sc.separation = in.value("separation", sc.separation);
    if (in.contains("probe_points")) {
      sc.probes.clear();
      for (const auto& p : in["probe_points"])
        sc.probes.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  }
  auto report = flm::run_propagation_demo(sc);
  report["config"]["cli"] = config_echo(o, "demo");

  // Closed-form regularity bookkeeping on a reference ledger.
  flm::RegularityLedger ledger;
  ledger.r = 1.0;
  ledger.eps_gain = 0.5;
  ledger.tau = 1.6;
  ledger.t_tilde = 3.0;
  ledger.s = 10.0;
  ledger.q = 2.0;
  report["regularity"] = {
      {"bootstrap_schedule", flm::bootstrap_schedule(ledger.t_tilde, ledger.s, ledger.r,
                                                     ledger.eps_gain)},
      {"semilinear_gain", flm::semilinear_gain(ledger)},
      {"threshold_case_a", flm::example_thresholds(2.6, 10.0, 2.0, flm::ThresholdCase::a)},
      {"threshold_case_b", flm::example_thresholds(2.5, 10.0, 2.0, flm::ThresholdCase::b)}};
  emit(o, report);
  return report["passed"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - weighted Fourier-Lebesgue toolkit command line"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string family = "homogeneous", cond = "T", symbol = "identity";
  double m = 2.0, r = 1.0, k = 0.5, eps = 0.3, p = 2.0;
  int n = 1, pairs = 10;
  std::vector<long long> M;

  auto* poly = app.add_subcommand("polyhedron", "Newton polyhedron invariants from vertices");
  add_common(poly, &o);

  auto* wc = app.add_subcommand("weight-check", "verify a weight-function condition");
  add_common(wc, &o);
  wc->add_option("--family", family, "homogeneous | quasi_homogeneous | log_type | constant");
  wc->add_option("--m", m, "weight exponent");
  wc->add_option("--M", M, "quasi-homogeneity orders (e.g. --M 1 2)");
  wc->add_option("--r", r, "log exponent for log_type");
  wc->add_option("--n", n, "dimension");
  wc->add_option("--cond", cond, "T | SV | SA | SM | G | B | PG | SB");

  auto* est = app.add_subcommand("estimate", "product estimate on random band-limited pairs");
  add_common(est, &o);
  est->add_option("--m", m, "weight exponent");
  est->add_option("--p", p, "Lebesgue exponent");
  est->add_option("--pairs", pairs, "number of random pairs");

  auto* qu = app.add_subcommand("quantize", "apply a named symbol to a Gaussian field");
  add_common(qu, &o);
  qu->add_option("--symbol", symbol, "identity | derivative | model");

  auto* mcl = app.add_subcommand("microlocal", "sector inclusion and ellipticity checks");
  add_common(mcl, &o);
  mcl->add_option("--k", k, "sector parameter in (0,1)");
  mcl->add_option("--eps", eps, "neighborhood size");

  auto* demo = app.add_subcommand("demo", "propagation-of-singularities demonstration");
  add_common(demo, &o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (poly->parsed()) return cmd_polyhedron(o);
    if (wc->parsed()) return cmd_weight_check(o, family, m, M, r, n, cond);
    if (est->parsed()) return cmd_estimate(o, m, p, pairs, est->count("--grid-extent") > 0);
    if (qu->parsed()) return cmd_quantize(o, symbol, qu->count("--grid-extent") > 0);
    if (mcl->parsed()) return cmd_microlocal(o, k, eps);
    if (demo->parsed()) return cmd_demo(o);
  } catch (const flm::BadParam& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const flm::Error& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
