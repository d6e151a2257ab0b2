// locsk: command-line front end for the localized SK laboratory.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "locsk/locsk.hpp"

namespace {

using locsk::ExperimentConfig;
using locsk::ExperimentKind;

struct CommonFlags {
  std::string kernel_file;
  std::string config_file;
  int dim = 1;
  std::vector<int> box_n;
  double beta = 0.2;
  double field = 0.3;
  std::size_t samples = 2000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  std::string format = "csv";
  bool allow_high_beta = false;
};

void add_model_flags(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--kernel-file", f.kernel_file, "Kernel JSON file (default: q^2 = 1 + cos(pi x))");
  sub->add_option("--dim", f.dim, "Lattice dimension");
  sub->add_option("--box-n", f.box_n, "Box radius N (repeatable)")->take_all();
  sub->add_option("--beta", f.beta, "Inverse temperature");
  sub->add_option("--field", f.field, "External field h");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--out", f.out, "Output file (default: stdout)");
}

void add_experiment_flags(CLI::App* sub, CommonFlags& f) {
  add_model_flags(sub, f);
  sub->add_option("--samples", f.samples, "Disorder samples per box size");
  sub->add_option("--workers", f.workers, "Worker threads");
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--config", f.config_file, "Experiment config JSON; explicit flags override it");
  sub->add_flag("--allow-high-beta", f.allow_high_beta, "Permit beta above the high-temperature guard");
}

locsk::KernelSpec kernel_for(const CommonFlags& f) {
  return f.kernel_file.empty() ? locsk::default_kernel(f.dim) : locsk::load_kernel(f.kernel_file);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw locsk::ValidationError("cannot write " + out);
  os << text;
}

std::string json_line(const nlohmann::json& j) { return j.dump() + "\n"; }

// True if `name` exists on this subcommand and was given.
bool given(const CLI::App* sub, const std::string& name) {
  const auto* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

ExperimentConfig build_config(const CLI::App* sub, const CommonFlags& f, ExperimentKind kind) {
  ExperimentConfig c;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw locsk::ValidationError("cannot open config " + f.config_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw locsk::ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    c = locsk::config_from_json(j);
  }
  c.kind = kind;
  auto given = [&](const char* name) { return ::given(sub, name); };
  if (given("--dim")) c.dim = f.dim;
  if (given("--kernel-file")) c.kernel = locsk::load_kernel(f.kernel_file);
  if (given("--beta")) c.beta = f.beta;
  if (given("--field")) c.h = f.field;
  if (given("--box-n")) c.box_n = f.box_n;
  if (given("--samples")) c.samples = f.samples;
  if (given("--seed")) c.seed = f.seed;
  if (given("--workers")) c.workers = f.workers;
  if (given("--allow-high-beta")) c.allow_high_beta = true;
  return c;
}

int run(int argc, char** argv) {
  CLI::App app{"Localized Sherrington-Kirkpatrick laboratory"};
  app.require_subcommand(1);
  CommonFlags f;

  // analytic
  auto* analytic = app.add_subcommand("analytic", "Replica-symmetric quantities r, s, SK, p, tau");
  double gamma0 = 1.0, tol = 1e-12;
  int quad_nodes = 61;
  analytic->add_option("--beta", f.beta, "Inverse temperature");
  analytic->add_option("--field", f.field, "External field h");
  analytic->add_option("--gamma0", gamma0, "Mean of q^2");
  analytic->add_option("--quad-nodes", quad_nodes, "Gauss-Hermite nodes")->check(CLI::Range(21, 1000));
  analytic->add_option("--tol", tol, "Fixed-point tolerance");

  // kernel
  auto* kernel = app.add_subcommand("kernel", "Validate a kernel file or fit one from a tabulated grid");
  std::string grid_file;
  int grid_per_dim = 0, max_mode = 0;
  double residual_tol = 1e-6;
  kernel->add_option("--kernel-file", f.kernel_file, "Kernel JSON to validate and summarize");
  kernel->add_option("--dim", f.dim, "Dimension of the tabulated grid");
  kernel->add_option("--grid-file", grid_file, "Whitespace-separated q^2 samples on the periodic grid");
  kernel->add_option("--grid-per-dim", grid_per_dim, "Grid points per dimension");
  kernel->add_option("--max-mode", max_mode, "Largest |k_l| kept in the fit");
  kernel->add_option("--residual-tol", residual_tol, "Maximum reconstruction error");
  kernel->add_option("--out", f.out, "Write the fitted kernel JSON here");

  // exact
  auto* exact = app.add_subcommand("exact", "Exact log Z and p_N for one disorder sample");
  add_model_flags(exact, f);

  // mcmc
  auto* mcmc = app.add_subcommand("mcmc", "Two-replica heat-bath overlap moments for one disorder sample");
  std::size_t sweeps = 4000, burn_in = 500, thin = 1;
  add_model_flags(mcmc, f);
  mcmc->add_option("--sweeps", sweeps, "Total sweeps");
  mcmc->add_option("--burn-in", burn_in, "Discarded sweeps");
  mcmc->add_option("--thin", thin, "Record every thin-th sweep");

  // interp
  auto* interp = app.add_subcommand("interp", "Interpolation paths: CSV rows path_id,t,logZ,Y_N");
  std::size_t paths = 100, grid = 11;
  add_experiment_flags(interp, f);
  interp->add_option("--paths", paths, "Number of sampled paths");
  interp->add_option("--grid", grid, "Equispaced time points including 0 and 1");

  auto* convergence = app.add_subcommand("convergence", "Mean p_N against p(beta, h) over box sizes");
  add_experiment_flags(convergence, f);
  auto* clt = app.add_subcommand("clt", "Fluctuations of side^{d/2} (p_N - p) against tau");
  add_experiment_flags(clt, f);
  auto* decay = app.add_subcommand("overlap-decay", "Weighted overlap moments over box sizes");
  add_experiment_flags(decay, f);
  std::size_t mcmc_samples = 200;
  decay->add_option("--mcmc-samples", mcmc_samples, "Disorder samples for sizes beyond exact enumeration");
  decay->add_option("--sweeps", sweeps, "Heat-bath sweeps per chain");
  decay->add_option("--burn-in", burn_in, "Discarded sweeps");
  decay->add_option("--thin", thin, "Record every thin-th sweep");
  auto* deriv = app.add_subcommand("derivative-check", "Finite-difference vs integration-by-parts beta derivative");
  add_experiment_flags(deriv, f);
  auto* icheck = app.add_subcommand("interp-check", "Per-time averages of p_N(t) and Y_N(t)");
  add_experiment_flags(icheck, f);
  icheck->add_option("--paths", paths, "Number of sampled paths");
  icheck->add_option("--grid", grid, "Equispaced time points including 0 and 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (analytic->parsed()) {
    locsk::AnalyticOptions opt;
    opt.quad_nodes = quad_nodes;
    opt.tol = tol;
    const auto a = locsk::solve_analytic(f.beta, f.field, gamma0, opt);
    nlohmann::json j = {{"beta", a.beta}, {"h", a.h},     {"gamma0", a.gamma0},   {"r", a.r},     {"s", a.s},
                        {"sk", a.sk_value}, {"p", a.p_value}, {"tau_hat", a.tau_hat}, {"tau", a.tau}};
    if (a.zero_field) j["warning"] = "h = 0: r = 0 by convention";
    if (a.tau_negative) j["warning_tau"] = "tau is negative";
    emit(json_line(j), "");
    return 0;
  }

  if (kernel->parsed()) {
    locsk::KernelSpec spec = locsk::default_kernel(f.dim);
    double residual = 0.0;
    if (!grid_file.empty()) {
      std::ifstream in(grid_file);
      if (!in) throw locsk::ValidationError("cannot open grid file " + grid_file);
      std::vector<double> values;
      for (double v; in >> v;) values.push_back(v);
      auto fit = locsk::fit_from_grid(f.dim, values, grid_per_dim, max_mode, residual_tol);
      spec = std::move(fit.spec);
      residual = fit.residual;
      if (!f.out.empty()) locsk::save_kernel(spec, f.out);
    } else if (!f.kernel_file.empty()) {
      spec = locsk::load_kernel(f.kernel_file);
    }
    const auto h2 = locsk::check_hypothesis2(spec);
    nlohmann::json j = locsk::to_json(spec);
    j["gamma0"] = spec.gamma0();
    j["Gamma"] = spec.Gamma();
    j["max_valid_dhat"] = h2.max_valid_dhat;
    j["hypothesis2"] = h2.satisfied;
    j["dhat_max"] = locsk::dhat_max(spec);
    if (!grid_file.empty()) j["residual"] = residual;
    std::cout << json_line(j);
    return 0;
  }

  if (exact->parsed()) {
    const auto spec = kernel_for(f);
    const int N = f.box_n.empty() ? 1 : f.box_n.front();
    const auto dis = locsk::sample_disorder(locsk::LatticeBox(spec.dim(), N), f.seed);
    const auto lz = locsk::exact_log_partition(dis, spec, f.beta, f.field);
    emit(json_line({{"logZ", lz.logZ}, {"pN", lz.pN}, {"N", N}, {"seed", f.seed}}), f.out);
    return 0;
  }

  if (mcmc->parsed()) {
    const auto spec = kernel_for(f);
    const int N = f.box_n.empty() ? 1 : f.box_n.front();
    const auto dis = locsk::sample_disorder(locsk::LatticeBox(spec.dim(), N), f.seed);
    const double r = locsk::solve_r(f.beta, f.field, spec.gamma0()).value;
    const auto res = locsk::run_replica_chain(dis, spec, f.beta, f.field, r, sweeps, burn_in, thin,
                                              locsk::derive_seed(f.seed, "mcmc"));
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : res.moments.modes)
      modes.push_back({{"k", m.k}, {"gamma", m.gamma}, {"mean", m.value}, {"se", m.se}});
    nlohmann::json j = {{"N", N},
                        {"seed", f.seed},
                        {"records", res.records},
                        {"r", r},
                        {"overlap", {{"mean", res.moments.overlap}, {"se", res.moments.overlap_se}}},
                        {"overlap_sq", {{"mean", res.moments.overlap_sq}, {"se", res.moments.overlap_sq_se}}},
                        {"weighted", {{"mean", res.moments.weighted}, {"se", res.moments.weighted_se}}},
                        {"modes", modes},
                        {"max_drift", res.max_drift}};
    emit(json_line(j), f.out);
    return 0;
  }

  struct Entry {
    CLI::App* sub;
    ExperimentKind kind;
  };
  const Entry entries[] = {{convergence, ExperimentKind::Convergence},
                           {clt, ExperimentKind::Clt},
                           {decay, ExperimentKind::OverlapDecay},
                           {deriv, ExperimentKind::DerivativeCheck},
                           {icheck, ExperimentKind::InterpCheck},
                           {interp, ExperimentKind::InterpCheck}};
  for (const auto& e : entries) {
    if (!e.sub->parsed()) continue;
    ExperimentConfig c = build_config(e.sub, f, e.kind);
    if (given(e.sub, "--mcmc-samples")) c.mcmc_samples = mcmc_samples;
    if (given(e.sub, "--sweeps")) c.sweeps = sweeps;
    if (given(e.sub, "--burn-in")) c.burn_in = burn_in;
    if (given(e.sub, "--thin")) c.thin = thin;
    if (given(e.sub, "--paths")) c.paths = paths;
    if (given(e.sub, "--grid")) c.grid = grid;
    if (e.sub == interp) {
      const auto recs = locsk::run_interp_paths(c);
      emit(locsk::render(locsk::to_table(recs, c), f.format, "interp", locsk::config_hash(c), c.seed), f.out);
    } else {
      emit(locsk::run_experiment(c, f.format), f.out);
    }
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const locsk::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const locsk::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
