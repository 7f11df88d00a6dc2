// melnikov-lab: batch front end for the scan, demo, verification and evolution
// scenarios. Exit status: 0 all checks passed, 1 a check failed, 2 bad input.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "melnikov/melnikov.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace melnikov;

namespace {

/// Input problems detected before any computation starts.
struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw BadInput(where + ": expected a JSON object");
  for (const auto& [k, _] : j.items())
    if (!allowed.count(k)) throw BadInput(where + ": unknown key '" + k + "'");
}

std::vector<double> real_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw BadInput(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw BadInput(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<cplx> complex_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw BadInput(where + ": expected an array");
  std::vector<cplx> out;
  for (const auto& v : j) out.push_back(ba::complex_from_json(v));
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// ---------------------------------------------------------- potentials

struct PotentialSpec {
  std::string kind = "zero";  // zero | cosine | fourier
  double period = kTwoPi;
  std::size_t n = 64;
  double amplitude = 0.0;
  double mean = 0.0;
  std::vector<double> cos_coeffs, sin_coeffs;

  floquet::PeriodicPotential build() const {
    const PeriodicGrid g(n, period);
    const double w = kTwoPi / period;
    return floquet::PeriodicPotential::sample(g, [&](double x) {
      double v = mean;
      if (kind == "cosine") v += amplitude * std::cos(w * x);
      for (std::size_t m = 0; m < cos_coeffs.size(); ++m) v += cos_coeffs[m] * std::cos(w * (m + 1) * x);
      for (std::size_t m = 0; m < sin_coeffs.size(); ++m) v += sin_coeffs[m] * std::sin(w * (m + 1) * x);
      return v;
    });
  }

  json to_json() const {
    json j{{"kind", kind}, {"period", period}, {"n", n}, {"mean", mean}};
    if (kind == "cosine") j["amplitude"] = amplitude;
    if (kind == "fourier") j["cos"] = cos_coeffs, j["sin"] = sin_coeffs;
    return j;
  }
};

PotentialSpec parse_potential(const json& u, double period, std::size_t n) {
  PotentialSpec p;
  p.period = period;
  p.n = n;
  if (u.is_string()) {
    p.kind = u.get<std::string>();
  } else if (u.is_object()) {
    expect_keys(u, {"kind", "amplitude", "mean", "cos", "sin"}, "potential");
    p.kind = u.value("kind", "fourier");
    p.amplitude = u.value("amplitude", 0.0);
    p.mean = u.value("mean", 0.0);
    if (u.contains("cos")) p.cos_coeffs = real_list(u["cos"], "potential.cos");
    if (u.contains("sin")) p.sin_coeffs = real_list(u["sin"], "potential.sin");
  } else {
    throw BadInput("potential: expected a name or an object");
  }
  if (p.kind != "zero" && p.kind != "cosine" && p.kind != "fourier") throw BadInput("potential: unknown kind '" + p.kind + "'");
  if (!(p.period > 0.0)) throw BadInput("period must be positive");
  if (p.n < 8 || p.n % 2) throw BadInput("grid size must be even and at least 8");
  return p;
}

// ---------------------------------------------------------- scenarios

struct Context {
  fs::path out;
  bool svg = false;
  std::uint64_t seed = 0;
};

report::Report floquet_scan(const json& cfg, const Context& ctx) {
  expect_keys(cfg, {"u", "potential", "T", "period", "n", "amplitude", "range", "scan_points", "samples"}, "floquet-scan");
  const double period = cfg.value("T", cfg.value("period", kTwoPi));
  json ujson = cfg.contains("potential") ? cfg["potential"] : cfg.value("u", json("zero"));
  if (ujson.is_string() && ujson.get<std::string>() == "cosine") ujson = json{{"kind", "cosine"}, {"amplitude", cfg.value("amplitude", 1.0)}};
  const auto pspec = parse_potential(ujson, period, cfg.value("n", std::size_t{64}));
  const auto range = real_list(cfg.value("range", json::array({-2.0, 4.0})), "range");
  if (range.size() != 2 || !(range[0] < range[1])) throw BadInput("range must be [E_min, E_max] with E_min < E_max");
  floquet::BandEdgeOptions opt;
  opt.scan_points = cfg.value("scan_points", opt.scan_points);
  const std::size_t samples = cfg.value("samples", std::size_t{400});
  if (opt.scan_points < 16 || samples < 2) throw BadInput("scan_points >= 16 and samples >= 2 required");

  json echo{{"potential", pspec.to_json()}, {"range", range}, {"scan_points", opt.scan_points}, {"samples", samples}};
  report::Report rep("floquet-scan", echo);
  const auto u = pspec.build();
  const auto energies = floquet::energy_grid(range[0], range[1], samples);
  const auto table = floquet::scan_discriminant(u, energies);
  floquet::write_discriminant_csv(table, ctx.out / "discriminant.csv");
  rep.add_file("discriminant.csv");

  double det = 0.0, prod = 0.0;
  for (const auto& e : energies) {
    const auto m = floquet::monodromy(u, e);
    det = std::max(det, m.relative_det_error());
    const auto s = floquet::sample_from(m, u.period());
    prod = std::max(prod, std::abs(s.rho_plus * s.rho_minus - 1.0));
  }
  rep.add_check("floquet", checks::make_check("det_error", det, 1e-9));
  rep.add_check("floquet", checks::make_check("multiplier_product", prod, 1e-9));

  const auto gaps = floquet::find_band_edges(u, range[0], range[1], opt);
  json edges = json::array();
  for (const auto& e : gaps.edges)
    edges.push_back({{"energy", e.energy},
                     {"level", e.level},
                     {"double_root", e.double_root},
                     {"closed_gap", e.closed_gap},
                     {"delta_derivative", e.delta_derivative},
                     {"identity_distance", e.identity_distance}});
  json open = json::array();
  for (const auto& [a, b] : gaps.open_gaps) open.push_back({a, b});
  rep.data() = {{"band_edges", gaps.band_edges},
                {"closed_gaps", gaps.closed_gaps},
                {"open_gaps", open},
                {"edges", edges},
                {"scan_density", gaps.scan_density},
                {"warnings", gaps.warnings}};
  if (ctx.svg) {
    std::vector<double> e, d, up, down;
    for (const auto& s : table) {
      e.push_back(s.energy.real());
      d.push_back(s.delta.real());
      up.push_back(2.0);
      down.push_back(-2.0);
    }
    io::write_text_atomic(ctx.out / "discriminant.svg",
                          report::svg_line_plot("discriminant", {"E", e}, {{"delta", d}, {"+2", up}, {"-2", down}}));
    rep.add_file("discriminant.svg");
  }
  return rep;
}

report::Report soliton_demo(const json& cfg, const Context& ctx) {
  expect_keys(cfg, {"kappa", "c0", "t_end", "samples", "window"}, "soliton-demo");
  const double kappa = cfg.value("kappa", 1.0);
  const double c0 = cfg.value("c0", 0.5);
  if (!(kappa > 0.0)) throw BadInput("kappa must be positive");
  const std::size_t samples = cfg.value("samples", std::size_t{200});
  const auto window = real_list(cfg.value("window", json::array({-20.0, 20.0})), "window");
  if (window.size() != 2 || !(window[0] < window[1])) throw BadInput("window must be [lo, hi]");
  if (samples < 2) throw BadInput("samples must be >= 2");
  const double k3 = kappa * kappa * kappa;
  const bool annihilates = c0 > 0.0 && c0 < 1.0 / k3;
  double t_end = cfg.value("t_end", 0.0);
  if (t_end <= 0.0) t_end = annihilates ? soliton::annihilation_time(kappa, c0) : 1.0;

  json echo{{"kappa", kappa}, {"c0", c0}, {"t_end", t_end}, {"samples", samples}, {"window", window}};
  report::Report rep("soliton-demo", echo);
  using namespace soliton;
  const FlowSetting mel{FlowKind::melnikov, c0, kappa};
  const auto times = linspace(0.0, t_end, samples);
  auto traj = trajectory_table(mel, times, window[0], window[1]);
  traj.write(ctx.out / "annihilation.csv");
  rep.add_file("annihilation.csv");
  const FlowSetting rev{FlowKind::melnikov_reversed, c0, kappa};
  const auto capture_times = linspace(0.0, 8.0 / k3, samples);
  trajectory_table(rev, capture_times, window[0], window[1]).write(ctx.out / "capture.csv");
  rep.add_file("capture.csv");
  {
    std::vector<double> c;
    for (double t : times) c.push_back(c_trajectory(mel, t));
    report::emit_plot_data({{"t", times}, {"c", c}}, ctx.out / "c_trajectory.csv", ctx.svg, "c(t), Melnikov flow");
    rep.add_file("c_trajectory.csv");
    if (ctx.svg) rep.add_file("c_trajectory.svg");
  }

  json results{{"regime", annihilates ? "annihilation" : (c0 == 1.0 / k3 ? "stationary" : "no annihilation")}};
  if (annihilates) {
    const double t_star = annihilation_time(kappa, c0);
    results["t_star"] = t_star;
    results["c_at_t_star"] = c_trajectory(mel, t_star);
    rep.add_check("soliton", checks::make_check("c_at_t_star", std::abs(c_trajectory(mel, t_star)), 1e-12));
    const double rk4 = c_trajectory_rk4(mel, t_star, 20000);
    rep.add_check("soliton", checks::make_check("rk4_c_at_t_star", std::abs(rk4), 1e-10));
  }
  rep.data() = results;

  if (c0 != 0.0) {
    const SolitonState s(kappa, c0);
    const auto xs = linspace(-10.0, 10.0, 101);
    if (c0 > 0.0) {
      rep.add_check("soliton", checks::make_check("schrodinger_residual", schrodinger_residual(s, xs), 1e-10));
      rep.add_check("soliton", checks::make_check("c_derivative_residual", verify_c_derivative(s, xs).residual(), 1e-7));
      if (annihilates) {
        const std::vector<double> ts{0.0, 0.5 * t_end};
        rep.add_check("soliton", checks::make_check("melnikov_pde_residual", verify_melnikov_pde(kappa, c0, ts, xs).residual(), 1e-6));
      }
      rep.add_check("soliton", checks::make_check("residue_identity", residue_identity_residual(s, linspace(-3.0, 3.0, 20), 5.0 * kappa), 1e-8));
    }
  }
  const auto& cal = residue_calibration();
  rep.calibration() = {{"residue_orientation",
                        {{"kappa", cal.kappa}, {"c", cal.c}, {"x", cal.x}, {"radius", cal.radius}, {"sign", cal.sign}}}};
  return rep;
}

report::Report ba_verify(const json& cfg, const Context& ctx) {
  expect_keys(cfg, {"data", "time", "lambdas", "x_samples", "k", "path"}, "ba-verify");
  const auto data = cfg.contains("data") ? ba::spectral_data_from_json(cfg["data"]) : ba::SpectralDataG0::kdv({1.0, 1.5});
  ba::TimePoint tp = cfg.contains("time") ? ba::time_point_from_json(cfg["time"]) : ba::TimePoint({0.1}, {-2.0, -3.0});
  if (tp.taus.size() != data.size()) throw BadInput("time.taus needs one entry per pair");
  const auto lambdas = complex_list(cfg.value("lambdas", json::array({2.0, json::array({3.0, 1.0})})), "lambdas");
  const auto xs = real_list(cfg.value("x_samples", json::array({-1.0, -0.5, 0.0, 0.5, 1.0})), "x_samples");
  const std::size_t k = cfg.value("k", std::size_t{0});
  if (k >= data.size()) throw BadInput("k out of range");
  ba::FlowPath path;
  double path_tau = 0.3;
  if (cfg.contains("path")) {
    const auto& p = cfg["path"];
    expect_keys(p, {"time_rates", "alphas", "betas", "tau"}, "path");
    if (p.contains("time_rates"))
      for (const auto& [m, c] : p["time_rates"].items()) path.time_rates[std::stoi(m)] = c.get<double>();
    path.alphas = complex_list(p.at("alphas"), "path.alphas");
    path.betas = complex_list(p.at("betas"), "path.betas");
    path_tau = p.value("tau", path_tau);
  } else {
    path.time_rates[3] = 0.5;
    path.alphas = tp.taus;
    path.betas.assign(data.size(), 0.0);
    path.betas[k] = 1.0;
  }
  if (path.alphas.size() != data.size() || path.betas.size() != data.size()) throw BadInput("path needs one alpha and beta per pair");

  json echo{{"data", ba::to_json(data)}, {"time", ba::to_json(tp)}, {"x_samples", xs}, {"k", k}, {"path_tau", path_tau}};
  json lj = json::array();
  for (cplx l : lambdas) lj.push_back(ba::complex_to_json(l));
  echo["lambdas"] = lj;
  report::Report rep("ba-verify", echo);

  const auto ev = ba::solve_ba(data, tp);
  json a = json::array();
  for (cplx v : ev.a) a.push_back(ba::complex_to_json(v));
  rep.data() = {{"a", a}, {"chi1", ba::complex_to_json(ev.chi1)}, {"condition_number", ev.condition_number},
                {"u", ba::complex_to_json(ba::potential_u(data, tp))}};

  rep.add_check("ba", checks::make_check("tau_flow_residual", ba::verify_tau_source(data, tp, k, xs).residual(), 1e-6));
  rep.add_check("ba", checks::make_check("kp_residual", ba::kp_residual(data, tp, lambdas, xs, {tp.time(2)}), 1e-6));
  if (data.kdv_symmetric) {
    bool even_zero = true;
    for (std::size_t m = 2; m <= tp.times.size(); m += 2) even_zero = even_zero && tp.time(static_cast<int>(m)) == 0.0;
    if (even_zero) rep.add_check("ba", checks::make_check("kdv_residual", ba::kdv_residual(data, tp, lambdas, xs), 1e-6));
  }
  double dpsi = 0.0, quotient = 0.0;
  for (cplx l : lambdas) {
    if ((l - data.plus(k)).real() != 0.0) dpsi = std::max(dpsi, ba::verify_dpsi(data, tp, k, l).residual());
  }
  const auto q = ba::verify_tau_quotient(data, tp, k, lambdas);
  quotient = std::max(q.spread, q.against_source);
  rep.add_check("ba", checks::make_check("dpsi_residual", dpsi, 1e-6));
  rep.add_check("ba", checks::make_check("tau_quotient_lambda_independence", quotient, 1e-6));
  const auto flow = ba::verify_combined_flow(data, tp, path, path_tau, xs);
  rep.add_check("ba", checks::make_check("combined_flow_residual", flow.residual.residual(), 1e-6));
  json ung = json::array();
  for (const auto& t : flow.ungluing_times) ung.push_back(t ? ba::complex_to_json(*t) : json(nullptr));
  rep.data()["ungluing_times"] = ung;

  const auto grid = ba::potential_grid(data, tp, k, linspace(-4.0, 4.0, 81), linspace(tp.taus[k].real() - 1.0, tp.taus[k].real() + 1.0, 5));
  grid.write(ctx.out / "u_grid.csv");
  rep.add_file("u_grid.csv");
  io::write_text_atomic(ctx.out / "spectral_data.json", json{{"data", ba::to_json(data)}, {"time", ba::to_json(tp)}}.dump(2) + "\n");
  rep.add_file("spectral_data.json");
  return rep;
}

report::Report evolve(const json& cfg, const Context& ctx) {
  expect_keys(cfg, {"mode", "solver", "sources", "probes", "initial", "kappa", "c0", "drift_tolerance", "error_tolerance"}, "evolve");
  const std::string mode = cfg.value("mode", "bloch");
  if (mode != "bloch" && mode != "prescribed") throw BadInput("mode must be 'bloch' or 'prescribed'");
  if (cfg.contains("solver")) {
    expect_keys(cfg["solver"], {"grid", "dt", "t_end", "integrator", "dealias", "snapshot_every", "kdv_scale"}, "solver");
  }
  kdv::SolverConfig solver;
  try {
    solver = kdv::solver_config_from_json(cfg.value("solver", json::object()));
  } catch (const Error& e) {
    throw BadInput(std::string("solver: ") + e.what());
  }
  json echo{{"mode", mode}, {"solver", kdv::to_json(solver)}};
  fs::create_directories(ctx.out);

  kdv::RunReport run;
  report::Report rep("evolve", echo);
  if (mode == "prescribed") {
    const double kappa = cfg.value("kappa", 1.0);
    const double c0 = cfg.value("c0", 0.5);
    const double tol = cfg.value("error_tolerance", 1e-4);
    echo["kappa"] = kappa;
    echo["c0"] = c0;
    rep = report::Report("evolve", echo);
    run = kdv::evolve_prescribed_source(kappa, c0, solver);
    rep.add_check("solver", checks::make_check("max_exact_error", run.max_exact_error(), tol));
  } else {
    if (cfg.contains("sources"))
      expect_keys(cfg["sources"], {"entries", "refresh_every", "refresh_stages"}, "sources");
    const auto spec = kdv::source_spec_from_json(cfg.value("sources", json::object()));
    const auto probes = complex_list(cfg.value("probes", json::array({-0.3, 0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0})), "probes");
    const auto init = cfg.value("initial", json{{"kind", "cosine"}, {"amplitude", 0.2}});
    const auto pspec = parse_potential(init, solver.grid.length(), solver.grid.size());
    const double tol = cfg.value("drift_tolerance", 1e-5);
    json src = json::array();
    for (const auto& e : spec.entries) src.push_back({{"energy", e.energy}, {"weight", e.weight}});
    echo["sources"] = {{"entries", src}, {"refresh_every", spec.refresh_every}, {"refresh_stages", spec.refresh_stages}};
    echo["initial"] = pspec.to_json();
    json pj = json::array();
    for (cplx p : probes) pj.push_back(ba::complex_to_json(p));
    echo["probes"] = pj;
    rep = report::Report("evolve", echo);
    run = kdv::evolve(pspec.build(), spec, solver, probes);
    const auto drift = kdv::isospectrality_report(run, probes);
    rep.add_check("solver", checks::make_check("delta_drift", drift.max_delta_drift, tol));
    rep.add_check("solver", checks::make_check("mean_drift", drift.mean_drift, 1e-12));
    rep.data() = {{"delta_drift", drift.delta_drift}, {"l2_drift", drift.l2_drift}, {"displacement", drift.displacement}};
    kdv::invariant_table(run).write(ctx.out / "invariants.csv");
    rep.add_file("invariants.csv");
  }
  rep.add_check("solver", checks::make_check("imaginary_part", run.max_imag, 1e-10));
  rep.data()["steps"] = run.steps;
  rep.data()["final_time"] = run.times.back();
  kdv::snapshot_table(run).write(ctx.out / "snapshots.csv");
  rep.add_file("snapshots.csv");
  if (ctx.svg) {
    const auto& g = run.snapshots.front().u.grid();
    std::vector<std::pair<double, std::vector<double>>> traces;
    double span = 0.0;
    for (const auto& s : run.snapshots) {
      traces.emplace_back(s.t, s.u.real_part());
      span = std::max(span, s.u.max_abs());
    }
    io::write_text_atomic(ctx.out / "waterfall.svg", report::svg_waterfall("u(x, t)", g.nodes(), traces, 0.5 * span));
    rep.add_file("waterfall.svg");
  }
  return rep;
}

report::Report verify_all(const json& cfg, const Context& ctx) {
  expect_keys(cfg, {"seed"}, "verify-all");
  checks::Options opt;
  opt.seed = ctx.seed ? ctx.seed : cfg.value("seed", opt.seed);
  report::Report rep("verify-all", json{{"seed", opt.seed}});
  for (const auto& criterion : checks::all_criteria()) {
    const auto r = criterion(opt);
    std::cerr << checks::summary_line(r, false) << '\n';
    rep.add_criterion(r);
  }
  const auto& cal = soliton::residue_calibration();
  rep.calibration() = {{"residue_orientation",
                        {{"kappa", cal.kappa}, {"c", cal.c}, {"x", cal.x}, {"radius", cal.radius}, {"sign", cal.sign}}}};
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"melnikov-lab: spectral and soliton experiments for KdV with self-consistent sources"};
  std::string kind, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool svg = false;
  app.add_option("kind", kind, "floquet-scan | soliton-demo | ba-verify | evolve | verify-all")
      ->required()
      ->check(CLI::IsMember({"floquet-scan", "soliton-demo", "ba-verify", "evolve", "verify-all"}));
  app.add_option("--config", config_path, "JSON scenario file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized property checks");
  app.add_flag("--svg", svg, "also write SVG plots");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  json cfg = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read config " << config_path << '\n';
      return 2;
    }
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      std::cerr << "invalid JSON in " << config_path << ": " << e.what() << '\n';
      return 2;
    }
  }

  const Context ctx{out_dir, svg, seed};
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(ctx.out);
    report::Report rep = kind == "floquet-scan"   ? floquet_scan(cfg, ctx)
                         : kind == "soliton-demo" ? soliton_demo(cfg, ctx)
                         : kind == "ba-verify"    ? ba_verify(cfg, ctx)
                         : kind == "evolve"       ? evolve(cfg, ctx)
                                                  : verify_all(cfg, ctx);
    rep.add_timing("total", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    rep.write(ctx.out);
    std::cout << (rep.passed() ? "PASS" : "FAIL") << ' ' << kind << " -> " << (ctx.out / "report.json").string() << '\n';
    return rep.passed() ? 0 : 1;
  } catch (const BadInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 1;
  }
}
