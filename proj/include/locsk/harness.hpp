#pragma once

#include <cinttypes>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "locsk/analytic.hpp"
#include "locsk/errors.hpp"
#include "locsk/interpolation.hpp"
#include "locsk/kernel.hpp"
#include "locsk/mcmc.hpp"
#include "locsk/model.hpp"
#include "locsk/parallel.hpp"
#include "locsk/rng.hpp"
#include "locsk/stats.hpp"

namespace locsk {

inline constexpr double kHighTemperatureGuard = 0.35;

enum class ExperimentKind { Convergence, Clt, OverlapDecay, DerivativeCheck, InterpCheck };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Clt: return "clt";
    case ExperimentKind::OverlapDecay: return "overlap-decay";
    case ExperimentKind::DerivativeCheck: return "derivative-check";
    case ExperimentKind::InterpCheck: return "interp-check";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "convergence") return ExperimentKind::Convergence;
  if (s == "clt") return ExperimentKind::Clt;
  if (s == "overlap-decay") return ExperimentKind::OverlapDecay;
  if (s == "derivative-check") return ExperimentKind::DerivativeCheck;
  if (s == "interp-check") return ExperimentKind::InterpCheck;
  throw ValidationError("unknown experiment kind: " + s);
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Convergence;
  int dim = 1;
  std::optional<KernelSpec> kernel;  // default_kernel(dim) when empty
  double beta = 0.2;
  double h = 0.3;
  std::vector<int> box_n{2};
  std::size_t samples = 2000;
  std::uint64_t seed = 1;
  bool allow_high_beta = false;
  // overlap-decay sizes beyond exact enumeration
  std::size_t mcmc_samples = 200;
  std::size_t sweeps = 4000;
  std::size_t burn_in = 500;
  std::size_t thin = 1;
  // interp-check
  std::size_t paths = 500;
  std::size_t grid = 11;
  // not part of the experiment identity
  int workers = 1;

  KernelSpec kernel_spec() const { return kernel ? *kernel : default_kernel(dim); }
};

// Fields that determine the output. Worker count and output location are
// excluded so that they cannot change the bytes written.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"dim", c.dim},
          {"kernel", to_json(c.kernel_spec())},
          {"beta", c.beta},
          {"field", c.h},
          {"box_n", c.box_n},
          {"samples", c.samples},
          {"seed", c.seed},
          {"allow_high_beta", c.allow_high_beta},
          {"mcmc_samples", c.mcmc_samples},
          {"sweeps", c.sweeps},
          {"burn_in", c.burn_in},
          {"thin", c.thin},
          {"paths", c.paths},
          {"grid", c.grid}};
}

// Keys as in config_to_json; "kernel" may be an inline kernel object or
// "kernel_file" a path. Missing keys keep their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
  try {
    if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("dim")) c.dim = j.at("dim").get<int>();
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("kernel_file")) c.kernel = load_kernel(j.at("kernel_file").get<std::string>());
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    if (j.contains("field")) c.h = j.at("field").get<double>();
    if (j.contains("box_n")) c.box_n = j.at("box_n").get<std::vector<int>>();
    if (j.contains("samples")) c.samples = j.at("samples").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("allow_high_beta")) c.allow_high_beta = j.at("allow_high_beta").get<bool>();
    if (j.contains("mcmc_samples")) c.mcmc_samples = j.at("mcmc_samples").get<std::size_t>();
    if (j.contains("sweeps")) c.sweeps = j.at("sweeps").get<std::size_t>();
    if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<std::size_t>();
    if (j.contains("thin")) c.thin = j.at("thin").get<std::size_t>();
    if (j.contains("paths")) c.paths = j.at("paths").get<std::size_t>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::size_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(config_to_json(c).dump()));
  return buf;
}

inline void validate(const ExperimentConfig& c) {
  if (c.dim < 1) throw ValidationError("dim must be >= 1");
  if (c.kernel && c.kernel->dim() != c.dim) throw ValidationError("kernel dimension differs from --dim");
  if (!(c.beta >= 0.0) || !(c.h >= 0.0)) throw ValidationError("beta and field must be >= 0");
  if (c.beta > kHighTemperatureGuard && !c.allow_high_beta)
    throw ValidationError("beta above the high-temperature guard; pass --allow-high-beta to override");
  if (c.box_n.empty()) throw ValidationError("at least one box size is required");
  for (int n : c.box_n)
    if (n < 0) throw ValidationError("box sizes must be >= 0");
  if (c.samples < 2) throw ValidationError("samples must be >= 2");
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
}

// ---- output tables

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV with 17 significant digits; every row carries config_hash and seed.
inline std::string to_csv(const Table& t, const std::string& hash, std::uint64_t seed) {
  std::ostringstream os;
  for (const auto& c : t.columns) os << c << ',';
  os << "config_hash,seed\n";
  for (const auto& row : t.rows) {
    for (const auto& cell : row) {
      if (const auto* i = std::get_if<std::int64_t>(&cell)) os << *i;
      else if (const auto* d = std::get_if<double>(&cell)) os << format_double(*d);
      else os << std::get<std::string>(cell);
      os << ',';
    }
    os << hash << ',' << seed << '\n';
  }
  return os.str();
}

inline nlohmann::json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json();
  return std::get<std::string>(c);
}

inline std::string to_json_text(const Table& t, const std::string& kind, const std::string& hash, std::uint64_t seed) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    r["config_hash"] = hash;
    r["seed"] = seed;
    rows.push_back(std::move(r));
  }
  nlohmann::json j = {{"experiment", kind}, {"config_hash", hash}, {"seed", seed}, {"rows", rows}};
  return j.dump(2) + "\n";
}

inline std::string render(const Table& t, const std::string& format, const std::string& kind,
                          const std::string& hash, std::uint64_t seed) {
  if (format == "csv") return to_csv(t, hash, seed);
  if (format == "json") return to_json_text(t, kind, hash, seed);
  throw ValidationError("unknown output format: " + format);
}

// ---- experiments

inline std::string size_tag(const std::string& kind, int n) { return kind + "/N=" + std::to_string(n); }

// p_N for each disorder sample s with seed derive_seed(seed, tag, s).
inline std::vector<double> sample_free_energies(const LatticeBox& box, const KernelSpec& kernel, double beta,
                                                double h, std::size_t samples, std::uint64_t seed,
                                                const std::string& tag, int workers) {
  check_enumeration_size(box, kLogZSiteLimit);
  const std::vector<double> qn = box.pair_count() ? pair_kernel(box, kernel) : std::vector<double>{};
  const std::vector<double> f(box.site_count(), h);
  const double n = static_cast<double>(box.site_count());
  return parallel_map(samples, workers, [&](std::size_t s) {
    const auto dis = sample_disorder(box, derive_seed(seed, tag, s));
    const CouplingMatrix J = box.pair_count() ? coupling_matrix(box, dis.g, qn, beta) : CouplingMatrix(box.site_count());
    return log_partition(J, f) / n;
  });
}

struct ConvergenceRow {
  int N = 0;
  double mean_pN = 0.0;
  double se = 0.0;
  double abs_error = 0.0;
};

struct ConvergenceResult {
  double p_analytic = 0.0;
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;     // log |error| against log N
  bool monotone = false;  // each error <= previous + combined SE
};

inline ConvergenceResult run_convergence_experiment(const ExperimentConfig& c) {
  validate(c);
  const KernelSpec kernel = c.kernel_spec();
  ConvergenceResult out;
  out.p_analytic = solve_analytic(c.beta, c.h, kernel.gamma0()).p_value;
  std::vector<double> xs, ys;
  for (int N : c.box_n) {
    const LatticeBox box(c.dim, N);
    const auto p = sample_free_energies(box, kernel, c.beta, c.h, c.samples, c.seed, size_tag("convergence", N),
                                        c.workers);
    const auto ms = mean_se(p);
    out.rows.push_back({N, ms.mean, ms.se, std::abs(ms.mean - out.p_analytic)});
    xs.push_back(N);
    ys.push_back(out.rows.back().abs_error);
  }
  out.slope = loglog_slope(xs, ys);
  out.monotone = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& a = out.rows[i - 1];
    const auto& b = out.rows[i];
    if (b.abs_error > a.abs_error + std::hypot(a.se, b.se)) out.monotone = false;
  }
  return out;
}

inline Table to_table(const ConvergenceResult& r, const ExperimentConfig& c) {
  Table t{{"N", "side", "samples", "mean_pN", "se", "p_analytic", "abs_error", "loglog_slope", "monotone"}, {}};
  for (const auto& row : r.rows)
    t.rows.push_back({std::int64_t{row.N}, std::int64_t{2 * row.N + 1}, static_cast<std::int64_t>(c.samples),
                      row.mean_pN, row.se, r.p_analytic, row.abs_error, r.slope,
                      std::int64_t{r.monotone ? 1 : 0}});
  return t;
}

struct CltResult {
  int N = 0;
  SummaryStats stats;
  AnalyticSolution analytic;
  std::vector<double> y;
};

// Y_N = side^{d/2} (p_N - p(beta, h)) over independent disorder samples.
inline CltResult run_clt_experiment(const ExperimentConfig& c) {
  validate(c);
  const KernelSpec kernel = c.kernel_spec();
  CltResult out;
  out.N = c.box_n.front();
  out.analytic = solve_analytic(c.beta, c.h, kernel.gamma0());
  const LatticeBox box(c.dim, out.N);
  const auto p = sample_free_energies(box, kernel, c.beta, c.h, c.samples, c.seed, size_tag("clt", out.N), c.workers);
  const double scale = std::sqrt(static_cast<double>(box.site_count()));
  out.y.reserve(p.size());
  for (double v : p) out.y.push_back(scale * (v - out.analytic.p_value));
  out.stats = summarize(out.y);
  return out;
}

inline Table to_table(const CltResult& r, const ExperimentConfig&) {
  const auto& s = r.stats;
  Table t{{"N", "n", "mean", "variance", "skewness", "excess_kurtosis", "se_mean", "se_variance", "ks_distance",
           "degenerate", "tau", "tau_hat", "p_analytic"},
          {}};
  t.rows.push_back({std::int64_t{r.N}, static_cast<std::int64_t>(s.n), s.mean, s.variance, s.skewness,
                    s.excess_kurtosis, s.se_mean, s.se_variance, s.ks_distance, std::int64_t{s.degenerate ? 1 : 0},
                    r.analytic.tau, r.analytic.tau_hat, r.analytic.p_value});
  return t;
}

struct DecayRow {
  int N = 0;
  std::string method;  // "exact" or "mcmc"
  std::size_t samples = 0;
  double weighted = 0.0;
  double se = 0.0;
};

struct DecayResult {
  double r = 0.0;
  std::vector<DecayRow> rows;
  double slope = 0.0;
};

// Disorder average of gamma_0 nu((R - r)^2) + sum_{k != 0} gamma_k nu(|R_k|^2).
// Exact enumeration up to kOverlapSiteLimit sites, two-replica heat bath
// beyond; the SE is over disorder samples.
inline DecayResult run_overlap_decay_experiment(const ExperimentConfig& c) {
  validate(c);
  const KernelSpec kernel = c.kernel_spec();
  DecayResult out;
  out.r = solve_r(c.beta, c.h, kernel.gamma0()).value;
  std::vector<double> xs, ys;
  for (int N : c.box_n) {
    const LatticeBox box(c.dim, N);
    const bool exact = box.site_count() <= kOverlapSiteLimit;
    const std::size_t m = exact ? c.samples : c.mcmc_samples;
    const std::string tag = size_tag("overlap-decay", N);
    const auto w = parallel_map(m, c.workers, [&](std::size_t s) {
      const std::uint64_t sseed = derive_seed(c.seed, tag, s);
      const auto dis = sample_disorder(box, sseed);
      if (exact) return overlap_moments_exact(dis, kernel, c.beta, c.h, out.r).weighted;
      return run_replica_chain(dis, kernel, c.beta, c.h, out.r, c.sweeps, c.burn_in, c.thin,
                               derive_seed(sseed, "mcmc"))
          .moments.weighted;
    });
    const auto ms = mean_se(w);
    out.rows.push_back({N, exact ? "exact" : "mcmc", m, ms.mean, ms.se});
    xs.push_back(N);
    ys.push_back(ms.mean);
  }
  out.slope = loglog_slope(xs, ys);
  return out;
}

inline Table to_table(const DecayResult& r, const ExperimentConfig&) {
  Table t{{"N", "side", "method", "samples", "weighted_moment", "se", "r", "loglog_slope"}, {}};
  for (const auto& row : r.rows)
    t.rows.push_back({std::int64_t{row.N}, std::int64_t{2 * row.N + 1}, row.method,
                      static_cast<std::int64_t>(row.samples), row.weighted, row.se, r.r, r.slope});
  return t;
}

inline DerivativeResidual run_derivative_check(const ExperimentConfig& c) {
  validate(c);
  return beta_derivative_residual(LatticeBox(c.dim, c.box_n.front()), c.kernel_spec(), c.beta, c.h, c.samples, c.seed);
}

inline Table to_table(const DerivativeResidual& r, const ExperimentConfig& c) {
  Table t{{"N", "samples", "beta", "residual", "std_error", "lhs", "rhs"}, {}};
  t.rows.push_back({std::int64_t{c.box_n.front()}, static_cast<std::int64_t>(r.samples), c.beta, r.residual,
                    r.std_error, r.lhs, r.rhs});
  return t;
}

struct PathRecord {
  std::size_t path_id = 0;
  double t = 0.0;
  double logZ = 0.0;
  double Y = 0.0;
};

// Path p uses sample_path(box, grid, derive_seed(seed, "interp", p)).
inline std::vector<PathRecord> run_interp_paths(const ExperimentConfig& c) {
  validate(c);
  const KernelSpec kernel = c.kernel_spec();
  const LatticeBox box(c.dim, c.box_n.front());
  check_enumeration_size(box, kLogZSiteLimit);
  const auto grid = uniform_grid(c.grid);
  const double r = solve_r(c.beta, c.h, kernel.gamma0()).value;
  std::vector<double> p_t(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) p_t[l] = interpolated_free_energy(c.beta, c.h, kernel.gamma0(), grid[l]);
  const auto per_path = parallel_map(c.paths, c.workers, [&](std::size_t p) {
    const auto path = sample_path(box, grid, derive_seed(c.seed, "interp", p));
    std::vector<PathRecord> recs;
    for (std::size_t l = 0; l < grid.size(); ++l) {
      const double lz = log_partition_at(path, l, kernel, c.beta, c.h, r);
      recs.push_back({p, grid[l], lz, fluctuation(box, lz, p_t[l])});
    }
    return recs;
  });
  std::vector<PathRecord> out;
  for (const auto& v : per_path) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline Table to_table(const std::vector<PathRecord>& recs, const ExperimentConfig&) {
  Table t{{"path_id", "t", "logZ", "Y_N"}, {}};
  for (const auto& r : recs) t.rows.push_back({static_cast<std::int64_t>(r.path_id), r.t, r.logZ, r.Y});
  return t;
}

struct InterpRow {
  double t = 0.0;
  double mean_pN = 0.0;
  double se_pN = 0.0;
  double p_analytic = 0.0;
  double mean_Y = 0.0;
  double se_Y = 0.0;
};

inline std::vector<InterpRow> run_interp_check(const ExperimentConfig& c) {
  const auto recs = run_interp_paths(c);
  const LatticeBox box(c.dim, c.box_n.front());
  const double n = static_cast<double>(box.site_count());
  const double gamma0 = c.kernel_spec().gamma0();
  std::vector<InterpRow> rows;
  for (std::size_t l = 0; l < c.grid; ++l) {
    std::vector<double> p, y;
    for (std::size_t k = l; k < recs.size(); k += c.grid) {
      p.push_back(recs[k].logZ / n);
      y.push_back(recs[k].Y);
    }
    const auto mp = mean_se(p), my = mean_se(y);
    const double t = recs[l].t;
    rows.push_back({t, mp.mean, mp.se, interpolated_free_energy(c.beta, c.h, gamma0, t), my.mean, my.se});
  }
  return rows;
}

inline Table to_table(const std::vector<InterpRow>& rows, const ExperimentConfig&) {
  Table t{{"t", "mean_pN", "se_pN", "p_analytic", "mean_Y", "se_Y"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.t, r.mean_pN, r.se_pN, r.p_analytic, r.mean_Y, r.se_Y});
  return t;
}

// Runs the configured experiment and renders it in `format`.
inline std::string run_experiment(const ExperimentConfig& c, const std::string& format = "csv") {
  const std::string hash = config_hash(c);
  const std::string kind = to_string(c.kind);
  switch (c.kind) {
    case ExperimentKind::Convergence: return render(to_table(run_convergence_experiment(c), c), format, kind, hash, c.seed);
    case ExperimentKind::Clt: return render(to_table(run_clt_experiment(c), c), format, kind, hash, c.seed);
    case ExperimentKind::OverlapDecay: return render(to_table(run_overlap_decay_experiment(c), c), format, kind, hash, c.seed);
    case ExperimentKind::DerivativeCheck: return render(to_table(run_derivative_check(c), c), format, kind, hash, c.seed);
    case ExperimentKind::InterpCheck: return render(to_table(run_interp_check(c), c), format, kind, hash, c.seed);
  }
  throw ValidationError("unknown experiment kind");
}

}  // namespace locsk
