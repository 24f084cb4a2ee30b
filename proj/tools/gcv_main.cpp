// gcv: Gauss-Cauchy convolution (Voigt) inference and filtering toolkit.
//
// Subcommands: fit-voigt, filter, smooth, simulate, mc, benchmark, fisher,
// levy-info.  Exit codes: 0 success, 1 usage/parse error, 2 numerical
// non-convergence, 3 grid escape.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcv/bench.hpp"
#include "gcv/csv.hpp"
#include "gcv/levy.hpp"
#include "gcv/mle.hpp"
#include "gcv/rng.hpp"
#include "gcv/ssm.hpp"
#include "gcv/version.hpp"
#include "gcv/voigt.hpp"

using nlohmann::json;

namespace {

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

json base_doc(const json& config) {
  return json{{"version", gcv::kVersion}, {"config", config}};
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_fit_voigt(const std::string& in, const std::string& out_json,
                  const std::string& out_se, std::vector<double> init_vals) {
  const gcv::Series series = gcv::read_series(in);
  const gcv::ParamBox box = gcv::default_box(series.y);
  std::optional<gcv::VoigtParams> init;
  if (init_vals.size() == 3) init = gcv::VoigtParams{init_vals[0], init_vals[1], init_vals[2]};
  const gcv::MleResult r = gcv::fit(series.y, box, init);

  json config{{"command", "fit-voigt"}, {"in", in},
              {"box", {{"mu_max", box.mu_max}, {"sigma_min", box.sigma_min},
                       {"sigma_max", box.sigma_max}, {"gamma_min", box.gamma_min},
                       {"gamma_max", box.gamma_max}}},
              {"n", series.y.size()}};
  json doc = base_doc(config);
  doc["theta_hat"] = {{"mu", r.theta_hat.mu}, {"sigma", r.theta_hat.sigma},
                      {"gamma", r.theta_hat.gamma}};
  doc["loglik"] = r.loglik;
  doc["std_errors"] = {r.std_errors[0], r.std_errors[1], r.std_errors[2]};
  doc["converged"] = r.converged;
  doc["on_boundary"] = r.on_boundary;
  doc["iterations"] = r.iterations;
  doc["gradient_norm"] = r.gradient_norm;
  write_json(out_json, doc);

  if (!out_se.empty()) {
    gcv::CsvTable t;
    t.header = {"param", "estimate", "std_error"};
    const char* names[3] = {"mu", "sigma", "gamma"};
    const double est[3] = {r.theta_hat.mu, r.theta_hat.sigma, r.theta_hat.gamma};
    for (int i = 0; i < 3; ++i)
      t.rows.push_back({names[i], gcv::format_double(est[i]),
                        gcv::format_double(r.std_errors[i])});
    gcv::write_csv(out_se, t);
  }
  if (!r.converged)
    throw NonConvergence(r.on_boundary ? "boundary solution" : "MLE did not converge");
  return 0;
}

// ---------------------------------------------------------------------------

gcv::ssm::SsmParams params_from_values(gcv::ssm::Family family,
                                       const std::vector<double>& v) {
  gcv::ssm::SsmParams p;
  p.meas.family = family;
  if (v.size() < 4) throw CLI::ValidationError("--params needs mu,phi,tau + measurement values");
  p.mu = v[0];
  p.phi = v[1];
  p.tau = v[2];
  using gcv::ssm::Family;
  switch (family) {
    case Family::Gaussian: p.meas.sigma = v.at(3); break;
    case Family::Cauchy: p.meas.gamma = v.at(3); break;
    case Family::GCC: p.meas.sigma = v.at(3); p.meas.gamma = v.at(4); break;
    case Family::NormalLaplace: p.meas.sigma = v.at(3); p.meas.b = v.at(4); break;
    case Family::StudentT: p.meas.sigma = v.at(3); p.meas.nu = v.at(4); break;
    case Family::Huber: p.meas.sigma = v.at(3); p.meas.k = v.at(4); break;
  }
  return p;
}

json params_json(const gcv::ssm::SsmParams& p) {
  json j{{"family", gcv::ssm::family_name(p.meas.family)}, {"mu", p.mu},
         {"phi", p.phi}, {"tau", p.tau}};
  using gcv::ssm::Family;
  switch (p.meas.family) {
    case Family::Gaussian: j["sigma"] = p.meas.sigma; break;
    case Family::Cauchy: j["gamma"] = p.meas.gamma; break;
    case Family::GCC: j["sigma"] = p.meas.sigma; j["gamma"] = p.meas.gamma; break;
    case Family::NormalLaplace: j["sigma"] = p.meas.sigma; j["b"] = p.meas.b; break;
    case Family::StudentT: j["sigma"] = p.meas.sigma; j["nu"] = p.meas.nu; break;
    case Family::Huber: j["sigma"] = p.meas.sigma; j["k"] = p.meas.k; break;
  }
  return j;
}

int cmd_filter(const std::string& in, const std::string& family_name,
               std::vector<double> param_vals, bool do_fit, bool with_smooth,
               const std::string& out_csv, const std::string& out_json_path) {
  const gcv::ssm::Family family = gcv::ssm::family_from_name(family_name);
  const gcv::Series series = gcv::read_series(in);

  gcv::ssm::SsmParams params;
  json fit_block;
  if (do_fit) {
    const gcv::ssm::SsmBox box = gcv::ssm::default_ssm_box(series.y);
    const gcv::ssm::QmleResult q = gcv::ssm::qmle(series.y, family, box);
    params = q.params_hat;
    fit_block = {{"loglik", q.loglik}, {"converged", q.converged},
                 {"on_boundary", q.on_boundary}, {"iterations", q.iterations}};
    fit_block["params"] = params_json(params);
    fit_block["param_names"] = q.param_names;
    fit_block["se_sandwich"] = q.se_sandwich;
    fit_block["se_invinfo"] = q.se_invinfo;
    if (!q.converged) {
      // still emit outputs below, then signal exit 2 at the end
      fit_block["warning"] = "criterion maximization did not converge";
    }
  } else {
    params = params_from_values(family, param_vals);
  }
  params.validate();

  const gcv::ssm::FilterResult fr = gcv::ssm::filter(series.y, params);
  const auto sm = with_smooth ? gcv::ssm::smoother(fr, params)
                              : std::vector<gcv::ssm::SmootherStep>{};

  gcv::CsvTable t;
  t.header = {"t", "y", "x_pred", "h_pred", "e", "psi", "x_filt", "h_filt",
              "x_smooth", "h_smooth", "e_state", "e_gauss", "e_cauchy", "ll"};
  for (std::size_t i = 0; i < fr.steps.size(); ++i) {
    const auto& st = fr.steps[i];
    double xs = std::numeric_limits<double>::quiet_NaN();
    double hs = xs, es = xs, eg = xs, ec = xs;
    if (with_smooth) {
      xs = sm[i].x_smooth;
      hs = sm[i].h_smooth;
    }
    if (params.meas.family == gcv::ssm::Family::GCC) {
      const auto d = gcv::ssm::decompose(st, params);
      es = d.e_state;
      eg = d.e_gauss;
      ec = d.e_cauchy;
    }
    t.rows.push_back({std::to_string(i + 1), gcv::format_double(series.y[i]),
                      gcv::format_double(st.x_pred), gcv::format_double(st.h_pred),
                      gcv::format_double(st.e), gcv::format_double(st.psi),
                      gcv::format_double(st.x_filt), gcv::format_double(st.h_filt),
                      gcv::format_double(xs), gcv::format_double(hs),
                      gcv::format_double(es), gcv::format_double(eg),
                      gcv::format_double(ec), gcv::format_double(st.ll)});
  }
  if (!out_csv.empty()) gcv::write_csv(out_csv, t);

  json config{{"command", with_smooth ? "smooth" : "filter"}, {"in", in},
              {"family", family_name}, {"fit", do_fit}, {"T", series.y.size()}};
  json doc = base_doc(config);
  doc["params"] = params_json(params);
  doc["criterion"] = fr.loglik;
  doc["closed_form"] = (family == gcv::ssm::Family::Gaussian ||
                        family == gcv::ssm::Family::Cauchy ||
                        family == gcv::ssm::Family::GCC ||
                        family == gcv::ssm::Family::NormalLaplace);
  if (!fit_block.is_null()) doc["estimation"] = fit_block;
  write_json(out_json_path, doc);
  if (do_fit && !fit_block["converged"].get<bool>())
    throw NonConvergence("QMLE did not converge");
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& family_name, std::vector<double> param_vals,
                 std::size_t T, std::uint64_t seed, const std::string& out_csv) {
  const gcv::ssm::Family family = gcv::ssm::family_from_name(family_name);
  const gcv::ssm::SsmParams params = params_from_values(family, param_vals);
  params.validate();
  const auto sim = gcv::ssm::simulate_ssm(params, T, seed);
  gcv::CsvTable t;
  t.header = {"t", "y", "x", "eps", "noise_gauss", "noise_heavy"};
  for (std::size_t i = 0; i < T; ++i)
    t.rows.push_back({std::to_string(i + 1), gcv::format_double(sim.y[i]),
                      gcv::format_double(sim.x[i]), gcv::format_double(sim.eps[i]),
                      gcv::format_double(sim.noise_g[i]),
                      gcv::format_double(sim.noise_h[i])});
  gcv::write_csv(out_csv, t);
  json config{{"command", "simulate"}, {"family", family_name}, {"T", T},
              {"seed", seed}, {"out", out_csv}};
  json doc = base_doc(config);
  doc["params"] = params_json(params);
  write_json("-", doc);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_mc(const std::string& mode, std::vector<double> design, std::size_t n,
           std::size_t reps, std::uint64_t seed, const std::string& out_csv) {
  if (reps == 0) throw CLI::ValidationError("--reps must be positive");
  gcv::CsvTable t;
  t.header = {"param", "n", "mean", "std", "astd", "alpha_l", "alpha_r"};
  json config{{"command", "mc"}, {"mode", mode}, {"reps", reps}, {"seed", seed}};

  if (mode == "mle") {
    if (design.size() != 3)
      throw CLI::ValidationError("--design for mle mode needs mu,sigma,gamma");
    const gcv::VoigtParams truth{design[0], design[1], design[2]};
    gcv::ParamBox box;
    box.mu_max = std::abs(truth.mu) + 50.0 * (truth.sigma + truth.gamma);
    box.sigma_min = 1e-6 * truth.sigma;
    box.sigma_max = 1e4 * truth.sigma;
    box.gamma_min = 1e-6 * truth.gamma;
    box.gamma_max = 1e4 * truth.gamma;
    const gcv::McSummary s = gcv::mc_study(truth, n, reps, box, seed);
    const char* names[3] = {"mu", "sigma", "gamma"};
    for (int i = 0; i < 3; ++i)
      t.rows.push_back({names[i], std::to_string(n), gcv::format_double(s.mean[i]),
                        gcv::format_double(s.std_dev[i]), gcv::format_double(s.astd[i]),
                        gcv::format_double(s.alpha_left[i]),
                        gcv::format_double(s.alpha_right[i])});
    config["design"] = {{"mu", truth.mu}, {"sigma", truth.sigma}, {"gamma", truth.gamma}};
    config["n"] = n;
    config["reps_failed"] = s.reps_failed;
  } else if (mode == "qmle") {
    if (design.size() != 5)
      throw CLI::ValidationError("--design for qmle mode needs sigma,gamma,mu,phi,tau");
    gcv::ssm::SsmParams truth;
    truth.meas.family = gcv::ssm::Family::GCC;
    truth.meas.sigma = design[0];
    truth.meas.gamma = design[1];
    truth.mu = design[2];
    truth.phi = design[3];
    truth.tau = design[4];
    const gcv::ssm::QmleMcSummary s = gcv::ssm::qmle_mc_study(truth, n, reps, seed);
    const char* names[5] = {"sigma", "gamma", "mu", "phi", "tau"};
    for (int i = 0; i < 5; ++i)
      t.rows.push_back({names[i], std::to_string(n), gcv::format_double(s.mean[i]),
                        gcv::format_double(s.std_dev[i]), "", "", ""});
    config["design"] = {{"sigma", design[0]}, {"gamma", design[1]}, {"mu", design[2]},
                        {"phi", design[3]}, {"tau", design[4]}};
    config["T"] = n;
    config["reps_failed"] = s.reps_failed;
  } else {
    throw CLI::ValidationError("--mode must be mle or qmle");
  }
  gcv::write_csv(out_csv, t);
  write_json("-", base_doc(config));
  return 0;
}

// ---------------------------------------------------------------------------

int run_selftest();

int cmd_benchmark(std::vector<double> lambdas, std::vector<double> phis,
                  std::vector<double> ratios, std::size_t T, std::uint64_t seed,
                  int nodes, const std::string& out_kl, const std::string& out_corr,
                  const std::string& out_long, bool selftest) {
  if (selftest) return run_selftest();
  for (double ph : phis)
    if (!(std::abs(ph) < 1.0)) throw CLI::ValidationError("phi values must satisfy |phi| < 1");
  gcv::bench::GridSpec spec;
  if (nodes > 0) spec.nodes = nodes;
  const auto sweep = gcv::bench::design_sweep(lambdas, phis, ratios, T, seed, spec);
  const auto agg = gcv::bench::aggregate_by_lambda(sweep);

  gcv::CsvTable t1;
  t1.header = {"lambda", "kl_x_shape", "kl_x_op", "kl_y_shape", "kl_y_op", "max_kl_x_op"};
  gcv::CsvTable t2;
  t2.header = {"lambda", "mae_shape", "mae_op", "rmse_op", "q95_abs_d"};
  for (const auto& a : agg) {
    t1.rows.push_back({gcv::format_double(a.lambda), gcv::format_double(a.kl_x_shape),
                       gcv::format_double(a.kl_x_op), gcv::format_double(a.kl_y_shape),
                       gcv::format_double(a.kl_y_op), gcv::format_double(a.max_kl_x_op)});
    t2.rows.push_back({gcv::format_double(a.lambda), gcv::format_double(a.mae_shape),
                       gcv::format_double(a.mae_op), gcv::format_double(a.rmse_op),
                       gcv::format_double(a.q95_abs_d)});
  }
  if (!out_kl.empty()) gcv::write_csv(out_kl, t1);
  if (!out_corr.empty()) gcv::write_csv(out_corr, t2);
  if (!out_long.empty()) {
    gcv::CsvTable tl;
    tl.header = {"lambda", "phi", "tau_ratio", "mae_shape", "mae_op", "rmse_op", "q95_abs_d"};
    for (const auto& r : sweep.rows) {
      if (r.failed) continue;
      tl.rows.push_back({gcv::format_double(r.lambda), gcv::format_double(r.phi),
                         gcv::format_double(r.tau_ratio),
                         gcv::format_double(r.corr.mae_shape),
                         gcv::format_double(r.corr.mae_op),
                         gcv::format_double(r.corr.rmse_op),
                         gcv::format_double(r.corr.q95_abs_op)});
    }
    gcv::write_csv(out_long, tl);
  }
  json config{{"command", "benchmark"}, {"lambdas", lambdas}, {"phis", phis},
              {"tau_ratios", ratios}, {"T", T}, {"seed", seed}, {"nodes", spec.nodes}};
  json doc = base_doc(config);
  int failures = 0;
  for (const auto& r : sweep.rows)
    if (r.failed) {
      ++failures;
      doc["failures"].push_back({{"lambda", r.lambda}, {"phi", r.phi},
                                 {"tau_ratio", r.tau_ratio}, {"error", r.error}});
    }
  doc["designs"] = sweep.rows.size();
  doc["designs_failed"] = failures;
  write_json("-", doc);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_fisher(std::vector<double> params, const std::string& out_json) {
  if (params.size() != 3) throw CLI::ValidationError("--params needs mu,sigma,gamma");
  const gcv::VoigtParams p{params[0], params[1], params[2]};
  const gcv::FisherInfo fi = gcv::fisher_information(p);
  json config{{"command", "fisher"},
              {"params", {{"mu", p.mu}, {"sigma", p.sigma}, {"gamma", p.gamma}}}};
  json doc = base_doc(config);
  doc["info"] = fi.info;
  doc["inverse"] = fi.inverse;
  doc["astd"] = fi.astd;
  doc["neg_mean_hessian"] = fi.neg_mean_hessian;
  doc["equality_gap"] = fi.equality_gap;
  write_json(out_json, doc);
  return 0;
}

int cmd_levy_info(double sigma, double theta, std::vector<double> deltas,
                  const std::string& out_csv) {
  gcv::CsvTable t;
  t.header = {"delta", "i_sigma_sigma", "i_sigma_theta", "i_theta_theta"};
  for (double d : deltas) {
    const auto I = gcv::levy::increment_fisher({sigma, theta, d});
    t.rows.push_back({gcv::format_double(d), gcv::format_double(I[0][0]),
                      gcv::format_double(I[0][1]), gcv::format_double(I[1][1])});
  }
  gcv::write_csv(out_csv, t);
  json config{{"command", "levy-info"}, {"sigma", sigma}, {"theta", theta},
              {"deltas", deltas}, {"out", out_csv}};
  write_json("-", base_doc(config));
  return 0;
}

// ---------------------------------------------------------------------------
// Property self-test battery: identity suites runnable end to end.

int run_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, double worst) {
    std::printf("[%s] %-42s worst=%.3e\n", ok ? "PASS" : "FAIL", name, worst);
    if (!ok) ++failures;
  };

  { // closure identity by complex central differences
    double worst = 0.0;
    gcv::Rng rng(7, 0);
    for (int i = 0; i < 1000; ++i) {
      const double a = std::exp(rng.uniform() * 6.0 - 3.0);
      const double b = (rng.uniform() * 2.0 - 1.0) * 10.0;
      const std::complex<double> w(a, std::abs(b));
      const double h = 1e-6 * (1.0 + std::abs(w));
      const auto d_num = (gcv::erfcx(w + h) - gcv::erfcx(w - h)) / (2.0 * h);
      const auto d_closed = 2.0 * w * gcv::erfcx(w) - 2.0 / std::sqrt(3.14159265358979323846);
      const double err = std::abs(d_num - d_closed) / (1.0 + std::abs(d_closed));
      worst = std::max(worst, err);
    }
    report("erfcx closure identity", worst <= 1e-8, worst);
  }
  { // conjugation + positivity + Gaussian tail identity
    double worst = 0.0;
    bool pos = true;
    gcv::Rng rng(8, 0);
    for (int i = 0; i < 500; ++i) {
      const double a = std::exp(rng.uniform() * 12.0 - 8.0);
      const double b = std::exp(rng.uniform() * 12.0 - 6.0);
      const auto z1 = gcv::erfcx({a, b});
      const auto z2 = gcv::erfcx({a, -b});
      worst = std::max(worst, std::abs(z1.real() - z2.real()) / std::abs(z1.real()));
      worst = std::max(worst, std::abs(z1.imag() + z2.imag()) /
                                  std::max(std::abs(z1.imag()), 1e-300));
      if (!(z1.real() > 0.0)) pos = false;
      const double r = 0.1 + 8.0 * rng.uniform();
      const double lhs = std::erfc(r / std::sqrt(2.0));
      const double rhs = gcv::erfcx_real(r / std::sqrt(2.0)) * std::exp(-0.5 * r * r);
      worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    report("erfcx conjugation/positivity/normal tail", pos && worst <= 1e-12, worst);
  }
  { // score and Hessian against finite differences + algebraic identities
    double worst = 0.0;
    gcv::Rng rng(9, 0);
    for (int i = 0; i < 500; ++i) {
      const gcv::VoigtParams p{rng.normal(), std::exp(rng.uniform() * 2 - 1),
                               std::exp(rng.uniform() * 2 - 1)};
      const double y = p.mu + (rng.uniform() * 2 - 1) * 20.0 * (p.sigma + p.gamma);
      const auto s = gcv::score(y, p);
      const double hom = p.sigma * s.s_sigma + p.gamma * s.s_gamma - (y - p.mu) * s.s_mu + 1.0;
      worst = std::max(worst, std::abs(hom));
      const auto H = gcv::hessian(y, p);
      const double lap = H.mm + s.s_mu * s.s_mu + H.gg + s.s_gamma * s.s_gamma;
      worst = std::max(worst, std::abs(lap));
      const auto cm = gcv::conditional_moments(y, p);
      const double sig2 = p.sigma * p.sigma;
      worst = std::max(worst, std::abs(cm.mean - sig2 * s.s_mu));
      worst = std::max(worst, std::abs(cm.variance - (sig2 + sig2 * sig2 * H.mm)));
    }
    report("homogeneity/Laplace/Tweedie identities", worst <= 1e-10, worst);
  }
  { // GCC filter nests the Kalman filter
    gcv::ssm::SsmParams p;
    p.mu = 0.3;
    p.phi = 0.9;
    p.tau = 0.4;
    p.meas.family = gcv::ssm::Family::GCC;
    p.meas.sigma = 1.0;
    p.meas.gamma = 1e-12;
    const auto sim = gcv::ssm::simulate_ssm(p, 500, 11);
    const auto fr = gcv::ssm::filter(sim.y, p);
    double worst = 0.0;
    double x = p.mu, h = p.stationary_var();
    for (std::size_t t = 0; t < sim.y.size(); ++t) {
      const double xp = t ? (1 - p.phi) * p.mu + p.phi * x : p.mu;
      const double hp = t ? p.phi * p.phi * h + p.tau * p.tau : p.stationary_var();
      const double K = hp / (hp + 1.0);
      x = xp + K * (sim.y[t] - xp);
      h = hp - K * hp;
      worst = std::max(worst, std::abs(x - fr.steps[t].x_filt));
      worst = std::max(worst, std::abs(h - fr.steps[t].h_filt));
    }
    report("GCC filter nests Kalman at gamma -> 0", worst <= 1e-9, worst);
  }
  { // exact benchmark matches the operational filter in the Gaussian design
    gcv::ssm::SsmParams p;
    p.mu = 0.0;
    p.phi = 0.9;
    p.tau = 0.5;
    p.meas.family = gcv::ssm::Family::Gaussian;
    p.meas.sigma = 1.0;
    const auto sim = gcv::ssm::simulate_ssm(p, 150, 12);
    gcv::bench::GridSpec spec;
    spec.nodes = 2001;
    spec.burn_in = 10;
    const auto kd = gcv::bench::kl_diagnostics(sim.y, p, spec);
    const auto cd = gcv::bench::correction_diagnostics(sim.y, p, spec);
    const double worst = std::max({kd.mean_x_op, kd.mean_y_op, cd.mae_op});
    report("exact benchmark exactness at lambda = 0", worst <= 1e-10, worst);
  }
  { // Levy adapter equals the Voigt computation under the scale maps
    double worst = 0.0;
    gcv::Rng rng(13, 0);
    for (int i = 0; i < 100; ++i) {
      const double sig = std::exp(rng.uniform() * 2 - 1);
      const double th = (rng.uniform() < 0.5 ? -1 : 1) * std::exp(rng.uniform() * 2 - 1);
      const double del = std::exp(rng.uniform() * 4 - 3);
      const double x = rng.cauchy(1.0);
      const gcv::levy::LevyParams lp{sig, th, del};
      const gcv::VoigtParams vp{0.0, sig * std::sqrt(del), std::abs(th) * del};
      worst = std::max(worst, std::abs(gcv::levy::increment_logpdf(x, lp) -
                                       gcv::log_pdf(x, vp)));
      const auto is = gcv::levy::increment_score(x, lp);
      const auto vs = gcv::score(x, vp);
      worst = std::max(worst, std::abs(is.d_sigma - std::sqrt(del) * vs.s_sigma));
      worst = std::max(worst,
                       std::abs(is.d_theta - (th > 0 ? 1.0 : -1.0) * del * vs.s_gamma));
    }
    report("Levy adapter reduces to Voigt scale maps", worst == 0.0, worst);
  }
  { // criterion ranking on synthetic GCC data
    gcv::ssm::SsmParams truth;
    truth.mu = -1.9420;
    truth.phi = 0.9716;
    truth.tau = 0.1138;
    truth.meas.family = gcv::ssm::Family::GCC;
    truth.meas.sigma = 0.1817;
    truth.meas.gamma = 0.0199;
    const auto sim = gcv::ssm::simulate_ssm(truth, 2000, 14);
    const auto box = gcv::ssm::default_ssm_box(sim.y);
    const auto qg = gcv::ssm::qmle(sim.y, gcv::ssm::Family::GCC, box);
    const auto qk = gcv::ssm::qmle(sim.y, gcv::ssm::Family::Gaussian, box);
    report("criterion ranking GCC >= Gaussian", qg.loglik >= qk.loglik,
           qg.loglik - qk.loglik);
  }

  std::printf("%s (%d failure%s)\n", failures == 0 ? "SELFTEST PASS" : "SELFTEST FAIL",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss-Cauchy convolution (Voigt) inference and filtering"};
  app.require_subcommand(1);

  // fit-voigt
  std::string in_path, out_json_path, out_se_path, family = "gcc", out_csv;
  std::vector<double> init_vals, param_vals, design;
  auto* fit_cmd = app.add_subcommand("fit-voigt", "Voigt maximum likelihood fit");
  fit_cmd->add_option("--in", in_path, "input CSV with a y column")->required();
  fit_cmd->add_option("--out-json", out_json_path, "result JSON path (- for stdout)");
  fit_cmd->add_option("--out-se", out_se_path, "standard-error table CSV");
  fit_cmd->add_option("--init", init_vals, "initial mu,sigma,gamma")->expected(3);

  // filter / smooth
  bool do_fit = false;
  auto add_filter_opts = [&](CLI::App* c) {
    c->add_option("--in", in_path)->required();
    c->add_option("--family", family, "gaussian|cauchy|gcc|normal-laplace|student-t|huber");
    c->add_option("--params", param_vals,
                  "mu,phi,tau + family scales (e.g. gcc: mu,phi,tau,sigma,gamma)");
    c->add_flag("--fit", do_fit, "estimate parameters by QMLE first");
    c->add_option("--out-csv", out_csv, "per-step output CSV");
    c->add_option("--out-json", out_json_path, "summary JSON (- for stdout)");
  };
  auto* filter_cmd = app.add_subcommand("filter", "forward filtering pass");
  add_filter_opts(filter_cmd);
  auto* smooth_cmd = app.add_subcommand("smooth", "filtering plus backward smoothing");
  add_filter_opts(smooth_cmd);

  // simulate
  std::size_t T = 500, n = 1000, reps = 100;
  std::uint64_t seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a state-space path");
  sim_cmd->add_option("--family", family);
  sim_cmd->add_option("--params", param_vals)->required();
  sim_cmd->add_option("-T,--T", T, "series length");
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_option("--out", out_csv)->required();

  // mc
  std::string mode = "mle";
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study harness");
  mc_cmd->add_option("--mode", mode, "mle or qmle");
  mc_cmd->add_option("--design", design,
                     "mle: mu,sigma,gamma   qmle: sigma,gamma,mu,phi,tau");
  mc_cmd->add_option("-n,--n", n, "per-replication sample size (or T for qmle)");
  mc_cmd->add_option("--reps", reps);
  mc_cmd->add_option("--seed", seed);
  mc_cmd->add_option("--out", out_csv)->required();

  // benchmark
  std::string lam_str = "0,0.01,0.05,0.1,0.5,1.0", phi_str = "0.9,0.97,0.99",
              ratio_str = "0.25,0.5,1.0";
  std::string out_kl, out_corr, out_long;
  int nodes = 0;
  bool selftest = false;
  auto* bench_cmd = app.add_subcommand("benchmark", "exact-filter approximation diagnostics");
  bench_cmd->add_option("--lambdas", lam_str, "comma list of gamma/sigma ratios");
  bench_cmd->add_option("--phis", phi_str, "comma list of persistence values");
  bench_cmd->add_option("--ratios", ratio_str, "comma list of tau/sigma values");
  bench_cmd->add_option("-T,--T", T, "simulated steps per design");
  bench_cmd->add_option("--seed", seed);
  bench_cmd->add_option("--nodes", nodes, "grid nodes (default 4001)");
  bench_cmd->add_option("--out-kl", out_kl, "aggregated KL table CSV");
  bench_cmd->add_option("--out-corr", out_corr, "aggregated correction table CSV");
  bench_cmd->add_option("--out-long", out_long, "per-design long table CSV");
  bench_cmd->add_flag("--selftest", selftest, "run the property self-test battery");

  // fisher
  auto* fisher_cmd = app.add_subcommand("fisher", "Voigt Fisher information");
  fisher_cmd->add_option("--params", param_vals, "mu,sigma,gamma")->required();
  fisher_cmd->add_option("--out-json", out_json_path);

  // levy-info
  double lsigma = 1.0, ltheta = 1.0;
  std::string delta_str = "0.001,0.01,0.1,1.0";
  auto* levy_cmd = app.add_subcommand("levy-info", "Brownian-Cauchy increment information");
  levy_cmd->add_option("--sigma", lsigma);
  levy_cmd->add_option("--theta", ltheta);
  levy_cmd->add_option("--deltas", delta_str, "comma list of sampling intervals");
  levy_cmd->add_option("--out", out_csv)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit_voigt(in_path, out_json_path, out_se_path, init_vals);
    if (filter_cmd->parsed())
      return cmd_filter(in_path, family, param_vals, do_fit, false, out_csv, out_json_path);
    if (smooth_cmd->parsed())
      return cmd_filter(in_path, family, param_vals, do_fit, true, out_csv, out_json_path);
    if (sim_cmd->parsed()) return cmd_simulate(family, param_vals, T, seed, out_csv);
    if (mc_cmd->parsed()) return cmd_mc(mode, design, n, reps, seed, out_csv);
    if (bench_cmd->parsed())
      return cmd_benchmark(parse_list(lam_str), parse_list(phi_str), parse_list(ratio_str),
                           T, seed, nodes, out_kl, out_corr, out_long, selftest);
    if (fisher_cmd->parsed()) return cmd_fisher(param_vals, out_json_path);
    if (levy_cmd->parsed()) return cmd_levy_info(lsigma, ltheta, parse_list(delta_str), out_csv);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gcv::bench::grid_escape_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    if (what.find("converge") != std::string::npos) return 2;
    return 1;
  }
  return 1;
}
