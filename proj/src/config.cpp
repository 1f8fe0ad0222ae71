#include "dppmix/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "dppmix/errors.hpp"

namespace dppmix {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKnownKeys{
    "model.kind",         "model.family",       "model.rj_acceptance", "data.file",         "data.response",
    "data.covariates",    "data.scale",         "prior.delta",         "prior.a0",          "prior.b0",
    "prior.a_rho",        "prior.b_rho",        "prior.epsilon",       "prior.s",           "prior.nu",
    "prior.rho",          "prior.alpha",        "prior.rho_fraction",  "cov.g_scale",       "cov.zeta",
    "cov.lambda0_scale",  "cov.aux_gamma0_scale", "cov.aux_xi0",       "cov.aux_nu0",       "mcmc.burnin",
    "mcmc.thin",          "mcmc.keep",          "mcmc.seed",           "mcmc.adapt_window", "mcmc.chains",
    "mcmc.prior_only",    "window.lo",          "window.hi",           "window.expand",     "window.truncation",
    "output.dir",         "output.grid_points", "output.grid_lo",      "output.grid_hi",    "prior_sim.draws"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    return parse_double(trim(text));
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a number: '" + text + "'");
  }
}

long to_long(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError("'" + key + "' must be an integer");
  return static_cast<long>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("'" + key + "' must be true or false");
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' is outside a section");
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!kKnownKeys.count(full)) throw ConfigError("unknown config key '" + full + "'");
      }
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }
  void number(const std::string& key, double& out) const {
    if (auto v = get(key)) out = to_double(key, *v);
  }
  void number(const std::string& key, std::optional<double>& out) const {
    if (auto v = get(key)) out = to_double(key, *v);
  }
  template <class Int>
  void integer(const std::string& key, Int& out) const {
    if (auto v = get(key)) out = static_cast<Int>(to_long(key, *v));
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

void RunConfig::validate() const {
  hyper.validate();
  schedule.validate();
  if (chains < 1) throw ConfigError("chains must be at least 1");
  if (window.truncation < 1) throw ConfigError("window truncation must be at least 1");
  if (!(window.expand >= 0.0)) throw ConfigError("window expansion must be nonnegative");
  if (window.lo.has_value() != window.hi.has_value()) throw ConfigError("window lo and hi must be given together");
  if (window.lo && !(*window.lo < *window.hi)) throw ConfigError("window lo must be below hi");
  if (output.grid_points < 2) throw ConfigError("grid_points must be at least 2");
  if (output.grid_lo.has_value() != output.grid_hi.has_value()) {
    throw ConfigError("grid_lo and grid_hi must be given together");
  }
  if (output.grid_lo && !(*output.grid_lo < *output.grid_hi)) throw ConfigError("grid_lo must be below grid_hi");
  if (!(data.scale > 0.0)) throw ConfigError("data scale must be positive");
  if (prior_draws < 1) throw ConfigError("prior_sim draws must be positive");
  if (kind == ModelKind::Covariates) {
    if (data.covariates.empty()) throw ConfigError("the covariate model needs [data] covariates");
    if (!hyper.nu.is_fixed()) throw ConfigError("the covariate model uses a fixed nu");
    if (!(cov.g_scale > 0.0 && cov.zeta > 0.0 && cov.lambda0_scale > 0.0 && cov.aux_gamma0_scale > 0.0)) {
      throw ConfigError("covariate hyperparameters must be positive");
    }
  }
  if (data.file.empty() && !prior_only) throw ConfigError("[data] file is required unless running prior-only");
  if (data.file.empty() && !window.lo) throw ConfigError("runs without data need an explicit window");
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, bool check) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const Reader r(tree);
  RunConfig c;

  if (auto v = r.get("model.kind")) {
    if (*v == "nocov") c.kind = ModelKind::NoCovariates;
    else if (*v == "cov") c.kind = ModelKind::Covariates;
    else throw ConfigError("model kind must be nocov or cov, got '" + *v + "'");
  }
  if (auto v = r.get("model.family")) {
    try {
      c.hyper.family = parse_spectral_family(*v);
    } catch (const Error&) {
      throw ConfigError("unknown spectral family '" + *v + "'");
    }
  }
  if (auto v = r.get("model.rj_acceptance")) {
    if (*v == "exact") c.hyper.rj_acceptance = RjAcceptance::Exact;
    else if (*v == "published") c.hyper.rj_acceptance = RjAcceptance::Published;
    else throw ConfigError("rj_acceptance must be exact or published");
  }

  if (auto v = r.get("data.file"); v && !v->empty()) {
    std::filesystem::path p(*v);
    c.data.file = p.is_absolute() ? p : (base_dir / p).lexically_normal();
  }
  if (auto v = r.get("data.response")) c.data.response = *v;
  if (auto v = r.get("data.covariates")) c.data.covariates = split_list(*v);
  r.number("data.scale", c.data.scale);

  r.number("prior.delta", c.hyper.delta);
  r.number("prior.a0", c.hyper.a0);
  r.number("prior.b0", c.hyper.b0);
  r.number("prior.a_rho", c.hyper.a_rho);
  r.number("prior.b_rho", c.hyper.b_rho);
  r.number("prior.epsilon", c.hyper.epsilon);
  r.number("prior.s", c.hyper.s);
  r.number("prior.alpha", c.hyper.alpha);
  if (auto v = r.get("prior.nu")) {
    std::vector<double> support;
    for (const auto& item : split_list(*v)) support.push_back(to_double("prior.nu", item));
    if (support.empty()) throw ConfigError("prior.nu is empty");
    c.hyper.nu = NuPrior::discrete(std::move(support));
  }
  r.number("prior.rho", c.hyper.fixed_rho);
  std::optional<double> rho_fraction;
  r.number("prior.rho_fraction", rho_fraction);
  if (rho_fraction) {
    if (c.hyper.fixed_rho) throw ConfigError("give either prior.rho or prior.rho_fraction, not both");
    if (!(*rho_fraction > 0.0 && *rho_fraction < 1.0)) throw ConfigError("rho_fraction must lie in (0, 1)");
    const SpectralModel m = c.hyper.spectral_model(1.0, c.hyper.nu.support[0]);
    c.hyper.fixed_rho = *rho_fraction * m.rho_max();
  }

  r.number("cov.g_scale", c.cov.g_scale);
  r.number("cov.zeta", c.cov.zeta);
  r.number("cov.lambda0_scale", c.cov.lambda0_scale);
  r.number("cov.aux_gamma0_scale", c.cov.aux_gamma0_scale);
  r.number("cov.aux_xi0", c.cov.aux_xi0);
  r.number("cov.aux_nu0", c.cov.aux_nu0);

  r.integer("mcmc.burnin", c.schedule.n_burnin);
  r.integer("mcmc.thin", c.schedule.n_thin);
  r.integer("mcmc.keep", c.schedule.n_keep);
  r.integer("mcmc.adapt_window", c.schedule.adapt_window);
  r.integer("mcmc.chains", c.chains);
  if (auto v = r.get("mcmc.seed")) {
    const long seed = to_long("mcmc.seed", *v);
    if (seed < 0) throw ConfigError("mcmc.seed must be nonnegative");
    c.schedule.seed = static_cast<std::uint64_t>(seed);
  }
  if (auto v = r.get("mcmc.prior_only")) c.prior_only = to_bool("mcmc.prior_only", *v);

  r.number("window.lo", c.window.lo);
  r.number("window.hi", c.window.hi);
  r.number("window.expand", c.window.expand);
  r.integer("window.truncation", c.window.truncation);

  if (auto v = r.get("output.dir")) {
    std::filesystem::path p(*v);
    c.output.dir = p.is_absolute() ? p : (base_dir / p).lexically_normal();
  }
  r.integer("output.grid_points", c.output.grid_points);
  r.number("output.grid_lo", c.output.grid_lo);
  r.number("output.grid_hi", c.output.grid_hi);
  r.integer("prior_sim.draws", c.prior_draws);

  if (check) c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool check) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in, std::filesystem::absolute(path).parent_path(), check);
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream out;
  auto num = [](double v) { return format_double(v); };
  out << "[model]\n";
  out << "kind = " << (c.kind == ModelKind::NoCovariates ? "nocov" : "cov") << "\n";
  out << "family = " << to_string(c.hyper.family) << "\n";
  out << "rj_acceptance = " << (c.hyper.rj_acceptance == RjAcceptance::Exact ? "exact" : "published") << "\n";
  out << "\n[data]\n";
  if (!c.data.file.empty()) out << "file = " << std::filesystem::absolute(c.data.file).string() << "\n";
  out << "response = " << c.data.response << "\n";
  if (!c.data.covariates.empty()) {
    out << "covariates = ";
    for (std::size_t i = 0; i < c.data.covariates.size(); ++i) out << (i ? "," : "") << c.data.covariates[i];
    out << "\n";
  }
  out << "scale = " << num(c.data.scale) << "\n";
  out << "\n[prior]\n";
  out << "delta = " << num(c.hyper.delta) << "\n";
  out << "a0 = " << num(c.hyper.a0) << "\n";
  out << "b0 = " << num(c.hyper.b0) << "\n";
  out << "a_rho = " << num(c.hyper.a_rho) << "\n";
  out << "b_rho = " << num(c.hyper.b_rho) << "\n";
  out << "epsilon = " << num(c.hyper.epsilon) << "\n";
  out << "s = " << num(c.hyper.s) << "\n";
  out << "alpha = " << num(c.hyper.alpha) << "\n";
  out << "nu = ";
  for (std::size_t i = 0; i < c.hyper.nu.support.size(); ++i) out << (i ? "," : "") << num(c.hyper.nu.support[i]);
  out << "\n";
  if (c.hyper.fixed_rho) out << "rho = " << num(*c.hyper.fixed_rho) << "\n";
  out << "\n[cov]\n";
  out << "g_scale = " << num(c.cov.g_scale) << "\n";
  out << "zeta = " << num(c.cov.zeta) << "\n";
  out << "lambda0_scale = " << num(c.cov.lambda0_scale) << "\n";
  out << "aux_gamma0_scale = " << num(c.cov.aux_gamma0_scale) << "\n";
  if (c.cov.aux_xi0) out << "aux_xi0 = " << num(*c.cov.aux_xi0) << "\n";
  if (c.cov.aux_nu0) out << "aux_nu0 = " << num(*c.cov.aux_nu0) << "\n";
  out << "\n[mcmc]\n";
  out << "burnin = " << c.schedule.n_burnin << "\n";
  out << "thin = " << c.schedule.n_thin << "\n";
  out << "keep = " << c.schedule.n_keep << "\n";
  out << "seed = " << c.schedule.seed << "\n";
  out << "adapt_window = " << c.schedule.adapt_window << "\n";
  out << "chains = " << c.chains << "\n";
  out << "prior_only = " << (c.prior_only ? "true" : "false") << "\n";
  out << "\n[window]\n";
  if (c.window.lo) out << "lo = " << num(*c.window.lo) << "\nhi = " << num(*c.window.hi) << "\n";
  out << "expand = " << num(c.window.expand) << "\n";
  out << "truncation = " << c.window.truncation << "\n";
  out << "\n[output]\n";
  out << "dir = " << std::filesystem::absolute(c.output.dir).string() << "\n";
  out << "grid_points = " << c.output.grid_points << "\n";
  if (c.output.grid_lo) out << "grid_lo = " << num(*c.output.grid_lo) << "\ngrid_hi = " << num(*c.output.grid_hi) << "\n";
  out << "\n[prior_sim]\n";
  out << "draws = " << c.prior_draws << "\n";
  return out.str();
}

CovHyperparams make_cov_hyperparams(const RunConfig& config, const Eigen::MatrixXd& x) {
  const int p = static_cast<int>(x.cols());
  CovHyperparams h = CovHyperparams::defaults(p, config.hyper);
  h.g_scale = config.cov.g_scale;
  h.zeta = config.cov.zeta;
  h.lambda0 = config.cov.lambda0_scale * Eigen::MatrixXd::Identity(p, p);
  h.aux_gamma0 = config.cov.aux_gamma0_scale * Eigen::MatrixXd::Identity(p + 1, p + 1);
  if (config.cov.aux_xi0) h.aux_xi0 = *config.cov.aux_xi0;
  if (config.cov.aux_nu0) h.aux_nu0 = *config.cov.aux_nu0;
  h.finalize(x);
  h.validate(p);
  return h;
}

}  // namespace dppmix
