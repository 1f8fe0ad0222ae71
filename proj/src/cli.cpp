#include "dppmix/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "dppmix/analysis.hpp"
#include "dppmix/errors.hpp"
#include "dppmix/sampler_cov.hpp"
#include "dppmix/sampler_nocov.hpp"

namespace dppmix {

namespace fs = std::filesystem;

WindowPolicy window_policy(const RunConfig& config, const Dataset& data) {
  if (config.window.lo) {
    WindowPolicy p;
    p.rect = {Interval{*config.window.lo, *config.window.hi}};
    p.truncation = config.window.truncation;
    for (double y : data.y) {
      if (!p.rect[0].contains(y)) {
        throw ConfigError("window [" + format_double(p.rect[0].lo) + ", " + format_double(p.rect[0].hi) +
                          "] does not contain response " + format_double(y));
      }
    }
    return p;
  }
  return WindowPolicy::from_data(data.y, config.window.expand, config.window.truncation);
}

Dataset load_run_data(const RunConfig& config) {
  if (config.data.file.empty()) return Dataset{};
  Dataset d = load_dataset(config.data);
  if (config.kind == ModelKind::Covariates && d.n() == 0) throw DataError("the covariate model needs data rows");
  if (d.n() == 0 && !config.prior_only) throw DataError("data file '" + config.data.file.string() + "' has no rows");
  return d;
}

Trace fit_chain(const RunConfig& config, const Dataset& data, int chain) {
  McmcSchedule schedule = config.schedule;
  schedule.seed = config.schedule.seed + static_cast<std::uint64_t>(chain);
  const WindowPolicy policy = window_policy(config, data);
  if (config.kind == ModelKind::NoCovariates) {
    std::vector<double> y = config.prior_only ? std::vector<double>{} : data.y;
    NocovSampler sampler(std::move(y), config.hyper, policy, schedule);
    return sampler.run();
  }
  CovData cd{Eigen::Map<const Eigen::VectorXd>(data.y.data(), data.n()), data.x};
  const CovHyperparams cov = make_cov_hyperparams(config, data.x);
  CovSampler sampler(std::move(cd), config.hyper, cov, policy, schedule,
                     config.prior_only ? Likelihood::Flat : Likelihood::Data);
  return sampler.run();
}

std::vector<Trace> fit_chains(const RunConfig& config, const Dataset& data) {
  const auto n = static_cast<std::size_t>(config.chains);
  std::vector<Trace> traces(n);
  std::vector<std::exception_ptr> errors(n);
  if (n == 1) {
    traces[0] = fit_chain(config, data, 0);
    return traces;
  }
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < n; ++c) {
    workers.emplace_back([&, c] {
      try {
        traces[c] = fit_chain(config, data, static_cast<int>(c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return traces;
}

namespace {

void line(std::ostringstream& out, const std::string& key, double value) {
  out << key << " = " << format_double(value) << "\n";
}

template <class T>
void line(std::ostringstream& out, const std::string& key, const T& value) {
  out << key << " = " << value << "\n";
}

std::vector<double> make_grid(const RunConfig& config, const Trace& trace) {
  const double lo = config.output.grid_lo ? *config.output.grid_lo : trace.window.front().lo;
  const double hi = config.output.grid_hi ? *config.output.grid_hi : trace.window.front().hi;
  const int m = config.output.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (m - 1);
  return grid;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) total += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return total;
}

}  // namespace

Report make_report(const Trace& trace, const Dataset& data, const RunConfig& config) {
  if (trace.size() == 0) throw DataError("trace has no kept samples");
  const bool cov = trace.kind == ModelKind::Covariates;
  const bool with_data = !config.prior_only && data.n() > 0;
  if (with_data && data.n() != trace.n_items) {
    throw DataError("trace has " + std::to_string(trace.n_items) + " items but the data has " +
                    std::to_string(data.n()));
  }
  Report r;
  std::ostringstream s;
  s << "# dppmix summary\n";
  line(s, "model", cov ? "cov" : "nocov");
  line(s, "samples", trace.size());
  line(s, "n_items", trace.n_items);
  line(s, "window_lo", trace.window.front().lo);
  line(s, "window_hi", trace.window.front().hi);
  line(s, "truncation", trace.truncation);

  const KSummary ks = k_summary(trace);
  line(s, "k_mean", ks.mean);
  line(s, "k_variance", ks.variance);
  line(s, "k_mode", ks.mode);
  double rho_mean = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) rho_mean += trace.rho_at(i);
  line(s, "rho_mean", rho_mean / static_cast<double>(trace.size()));

  std::ostringstream pmf;
  pmf << "k,probability\n";
  for (std::size_t k = 0; k < ks.pmf.size(); ++k) pmf << k << "," << format_double(ks.pmf[k]) << "\n";
  r.k_pmf = pmf.str();

  if (with_data) {
    CovData cd;
    if (cov) cd = CovData{Eigen::Map<const Eigen::VectorXd>(data.y.data(), data.n()), data.x};
    auto lp = [&](Ordinate o) { return cov ? lpml(trace, cd, o) : lpml(trace, data.y, o); };
    auto sq = [&](Prediction p) { return cov ? mse(trace, cd, p) : mse(trace, data.y, p); };
    if (trace.size() >= 2) {
      const LpmlResult mixture = lp(Ordinate::Mixture);
      const LpmlResult allocated = lp(Ordinate::Allocated);
      line(s, "lpml_mixture", mixture.lpml);
      line(s, "lpml_allocated", allocated.lpml);
      line(s, "lpml_flagged_items", allocated.flagged.size());
    }
    line(s, "mse_marginal", sq(Prediction::Marginal));
    line(s, "mse_allocated", sq(Prediction::Allocated));

    const PartitionEstimate part = binder_partition(trace);
    line(s, "binder_loss", part.loss);
    line(s, "binder_groups", part.n_groups);
    line(s, "binder_sample", part.sample);
    std::ostringstream p;
    p << "item,label\n";
    for (std::size_t i = 0; i < part.labels.size(); ++i) p << (i + 1) << "," << part.labels[i] << "\n";
    r.partition = p.str();
  }

  const std::vector<double> grid = make_grid(config, trace);
  PredictiveBand band;
  std::ostringstream pred;
  if (cov) {
    const Eigen::VectorXd xbar = data.x.colwise().mean().transpose();
    band = predictive_density(trace, grid, xbar);
    pred << "# x =";
    for (Eigen::Index j = 0; j < xbar.size(); ++j) pred << " " << format_double(xbar(j));
    pred << "\n";
  } else {
    band = predictive_density(trace, grid);
  }
  pred << "y,mean,lower,upper\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pred << format_double(band.grid[i]) << "," << format_double(band.mean[i]) << "," << format_double(band.lower[i])
         << "," << format_double(band.upper[i]) << "\n";
  }
  r.predictive = pred.str();
  line(s, "predictive_integral", trapezoid(band.grid, band.mean));

  for (const auto& [name, stats] : trace.moves) {
    s << "accept_" << name << " = " << format_double(stats.rate()) << " (" << stats.accepted << "/" << stats.attempted
      << ")\n";
  }
  r.summary = s.str();
  return r;
}

void write_report(const Report& report, const fs::path& dir) {
  write_text_file(dir / "summary.txt", report.summary);
  write_text_file(dir / "k_pmf.csv", report.k_pmf);
  write_text_file(dir / "predictive.csv", report.predictive);
  if (!report.partition.empty()) write_text_file(dir / "partition.csv", report.partition);
}

PriorSimResult prior_sim(const RunConfig& config, const WindowPolicy& policy) {
  const Hyperparams& hyper = config.hyper;
  Rng rng(config.schedule.seed);
  PriorSimResult r;
  r.draws = config.prior_draws;
  const bool cached = hyper.fixed_rho && hyper.nu.is_fixed();
  std::vector<double> phi;
  double phi_sum = 0.0;
  auto load = [&](double rho, double nu) {
    const DppWindow w = make_window(hyper, policy, rho, nu);
    phi.assign(w.phi_values().begin(), w.phi_values().end());
    phi_sum = 0.0;
    for (double v : phi) phi_sum += v;
  };
  if (cached) load(*hyper.fixed_rho, hyper.nu.support[0]);

  double sum = 0.0, sum_sq = 0.0, expected = 0.0;
  long positive = 0;
  double sum_pos = 0.0, sum_sq_pos = 0.0;
  for (long d = 0; d < r.draws; ++d) {
    if (!cached) {
      const double nu = hyper.nu.support[static_cast<std::size_t>(rng.index(static_cast<int>(hyper.nu.support.size())))];
      const double rho = hyper.fixed_rho ? *hyper.fixed_rho : rho_offset(hyper, nu) + rng.gamma(hyper.a_rho, hyper.b_rho);
      load(rho, nu);
    }
    int k = 0;
    for (double v : phi) k += rng.bernoulli(v) ? 1 : 0;
    if (static_cast<std::size_t>(k) >= r.counts.size()) r.counts.resize(static_cast<std::size_t>(k) + 1, 0);
    ++r.counts[static_cast<std::size_t>(k)];
    sum += k;
    sum_sq += static_cast<double>(k) * k;
    expected += phi_sum;
    if (k > 0) {
      ++positive;
      sum_pos += k;
      sum_sq_pos += static_cast<double>(k) * k;
    }
  }
  const double n = static_cast<double>(r.draws);
  r.mean = sum / n;
  r.variance = sum_sq / n - r.mean * r.mean;
  r.se_mean = std::sqrt(r.variance / n);
  r.expected_mean = expected / n;
  if (positive > 0) {
    r.mean_positive = sum_pos / static_cast<double>(positive);
    r.variance_positive = sum_sq_pos / static_cast<double>(positive) - r.mean_positive * r.mean_positive;
  }
  return r;
}

std::string format_prior_summary(const PriorSimResult& r) {
  std::ostringstream s;
  s << "# dppmix prior simulation\n";
  line(s, "draws", r.draws);
  line(s, "k_mean", r.mean);
  line(s, "k_variance", r.variance);
  line(s, "k_mean_se", r.se_mean);
  line(s, "k_mean_expected", r.expected_mean);
  line(s, "k_mean_given_positive", r.mean_positive);
  line(s, "k_variance_given_positive", r.variance_positive);
  return s.str();
}

std::string format_prior_pmf(const PriorSimResult& r) {
  std::ostringstream s;
  s << "k,probability\n";
  for (std::size_t k = 0; k < r.counts.size(); ++k) {
    s << k << "," << format_double(static_cast<double>(r.counts[k]) / static_cast<double>(r.draws)) << "\n";
  }
  return s.str();
}

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  bool prior_only = false;
  std::string out;
};

RunConfig effective_config(const Overrides& o) {
  RunConfig c = load_config(o.config, false);
  if (o.seed) c.schedule.seed = *o.seed;
  if (o.chains) c.chains = *o.chains;
  if (o.prior_only) c.prior_only = true;
  if (!o.out.empty()) {
    c.output.dir = o.out;
  } else if (const char* env = std::getenv(kOutputEnvVar); env && *env) {
    c.output.dir = env;
  }
  c.validate();
  return c;
}

std::string error_label(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return "config";
    case ErrorKind::Data:
      return "data";
    case ErrorKind::Numerical:
      return "numerical";
  }
  return "internal";
}

std::string one_line(std::string text) {
  for (char& ch : text) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return text;
}

void run_fit(const Overrides& o, std::ostream& out) {
  const RunConfig config = effective_config(o);
  const Dataset data = load_run_data(config);
  window_policy(config, data);  // fail on a bad window before creating anything
  const fs::path dir = config.output.dir;
  fs::create_directories(dir);

  std::vector<Trace> traces = fit_chains(config, data);
  Trace merged = traces.front();
  if (traces.size() > 1) {
    for (std::size_t c = 0; c < traces.size(); ++c) {
      const fs::path chain_dir = dir / ("chain_" + std::to_string(c + 1));
      write_trace(traces[c], chain_dir);
      write_report(make_report(traces[c], data, config), chain_dir);
      if (c > 0) merged.merge(traces[c]);
    }
  }
  write_trace(merged, dir);
  const Report report = make_report(merged, data, config);
  write_report(report, dir);
  write_text_file(dir / "run.ini", to_ini(config));
  const KSummary ks = k_summary(merged);
  out << "fit: " << merged.size() << " samples, posterior mean K " << format_double(ks.mean) << ", output "
      << dir.string() << "\n";
}

void run_prior_sim(const Overrides& o, std::ostream& out) {
  const RunConfig config = effective_config(o);
  const Dataset data = load_run_data(config);
  const WindowPolicy policy = window_policy(config, data);
  const PriorSimResult r = prior_sim(config, policy);
  const fs::path dir = config.output.dir;
  write_text_file(dir / "prior_summary.txt", format_prior_summary(r));
  write_text_file(dir / "k_prior.csv", format_prior_pmf(r));
  write_text_file(dir / "run.ini", to_ini(config));
  out << "prior-sim: " << r.draws << " draws, prior mean K " << format_double(r.mean) << " (se "
      << format_double(r.se_mean) << "), output " << dir.string() << "\n";
}

void run_analyze(const std::string& fit_dir, const std::string& config_path, const std::string& out_dir,
                 std::ostream& out) {
  const fs::path dir(fit_dir);
  if (!fs::is_directory(dir)) throw DataError("fit output directory '" + fit_dir + "' does not exist");
  const Trace trace = read_trace(dir);
  const RunConfig config = load_config(config_path.empty() ? dir / "run.ini" : fs::path(config_path));
  const Dataset data = load_run_data(config);
  if (trace.kind != config.kind) throw DataError("trace model does not match the config");
  const fs::path target = out_dir.empty() ? dir / "analysis" : fs::path(out_dir);
  write_report(make_report(trace, data, config), target);
  out << "analyze: " << trace.size() << " samples, output " << target.string() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repulsive mixture models with determinantal point process priors", "dppmix"};
  app.require_subcommand(1);

  Overrides fit_opts, prior_opts;
  auto add_common = [](CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "INI configuration file")->required();
    sub->add_option("--seed", o.seed, "random seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory (overrides DPPMIX_OUT and the config)");
  };
  CLI::App* fit = app.add_subcommand("fit", "run the MCMC sampler and write traces and summaries");
  add_common(fit, fit_opts);
  fit->add_option("--chains", fit_opts.chains, "number of independent chains")->check(CLI::PositiveNumber);
  fit->add_flag("--prior-only", fit_opts.prior_only, "ignore the responses and sample the prior");

  CLI::App* prior = app.add_subcommand("prior-sim", "Monte Carlo prior distribution of the number of components");
  add_common(prior, prior_opts);

  std::string fit_dir, analyze_config, analyze_out;
  CLI::App* analyze = app.add_subcommand("analyze", "recompute summaries from a stored fit");
  analyze->add_option("dir", fit_dir, "directory written by fit")->required();
  analyze->add_option("--config", analyze_config, "configuration (default: <dir>/run.ini)");
  analyze->add_option("--out", analyze_out, "output directory (default: <dir>/analysis)");

  std::vector<const char*> argv{"dppmix"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: config: " << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorKind::Config);
  }

  try {
    if (fit->parsed()) run_fit(fit_opts, out);
    else if (prior->parsed()) run_prior_sim(prior_opts, out);
    else run_analyze(fit_dir, analyze_config, analyze_out, out);
  } catch (const Error& e) {
    err << "error: " << error_label(e.kind()) << ": " << one_line(e.what()) << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: data: " << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorKind::Data);
  } catch (const std::exception& e) {
    err << "error: numerical: " << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorKind::Numerical);
  }
  return 0;
}

}  // namespace dppmix
