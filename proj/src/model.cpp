#include "dppmix/model.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "dppmix/densities.hpp"
#include "dppmix/errors.hpp"

namespace dppmix {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void Hyperparams::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(delta > 0.0, "delta must be positive");
  require(a0 > 0.0 && b0 > 0.0, "a0 and b0 must be positive");
  require(a_rho > 0.0 && b_rho > 0.0, "a_rho and b_rho must be positive");
  require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
  require(epsilon > 0.0, "epsilon must be positive");
  require(epsilon < s, "epsilon must be smaller than s");
  require(!nu.support.empty(), "nu support must be nonempty");
  for (double v : nu.support) require(v > 0.0 && std::isfinite(v), "nu support values must be positive");
  if (family != SpectralFamily::PowerExponential) {
    require(fixed_rho.has_value(), "non-PES spectral families need a fixed rho");
    require(alpha > 0.0, "alpha must be positive");
  }
  if (fixed_rho) {
    require(*fixed_rho > 0.0, "fixed rho must be positive");
    for (double v : nu.support) spectral_model(*fixed_rho, v).validate();
  }
}

SpectralModel Hyperparams::spectral_model(double rho, double nu_value) const {
  switch (family) {
    case SpectralFamily::PowerExponential:
      return SpectralModel::power_exponential(rho, nu_value, s);
    case SpectralFamily::WhittleMatern:
      return SpectralModel::whittle_matern(rho, alpha, nu_value);
    case SpectralFamily::GeneralizedCauchy:
      return SpectralModel::generalized_cauchy(rho, alpha, nu_value);
  }
  return {};
}

double rho_offset(const Hyperparams& hyper, double nu) { return m_threshold(hyper.s, hyper.epsilon, nu); }

double log_prior_rho(double rho, double nu, const Hyperparams& hyper) {
  const double offset = rho_offset(hyper, nu);
  if (!(rho > offset)) return kNegInf;
  return log_gamma_pdf(rho - offset, hyper.a_rho, hyper.b_rho);
}

// ---------------------------------------------------------------------------

CovHyperparams CovHyperparams::defaults(int p, const Hyperparams& base) {
  CovHyperparams h;
  h.beta0 = Eigen::VectorXd::Zero(p);
  h.gamma0 = Eigen::VectorXd::Zero(p);
  h.lambda0 = Eigen::MatrixXd::Identity(p, p);
  h.sigma0 = Eigen::MatrixXd::Identity(p, p);
  h.aux_gamma0 = 10.0 * Eigen::MatrixXd::Identity(p + 1, p + 1);
  h.aux_xi0 = base.a0;
  h.aux_nu0 = base.b0;
  return h;
}

void CovHyperparams::finalize(const Eigen::MatrixXd& design) {
  const Eigen::MatrixXd xtx = design.transpose() * design;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (design.cols() == 0 || !lu.isInvertible()) {
    throw DataError("design matrix X^T X is singular; the g-prior is undefined");
  }
  sigma0 = g_scale * lu.inverse();
  sigma0 = 0.5 * (sigma0 + sigma0.transpose());
}

void CovHyperparams::validate(int p) const {
  auto pd = [](const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    return llt.info() == Eigen::Success;
  };
  if (!(g_scale > 0.0)) throw ConfigError("g-prior scale must be positive");
  if (beta0.size() != p || gamma0.size() != p) throw ConfigError("beta0 / gamma0 must have length p");
  if (!gamma0.isZero(0.0)) throw ConfigError("gamma0 must be the zero vector");
  if (lambda0.rows() != p || !pd(lambda0)) throw ConfigError("Lambda0 must be p x p positive definite");
  if (sigma0.rows() != p || !pd(sigma0)) throw ConfigError("Sigma0 must be p x p positive definite");
  if (aux_gamma0.rows() != p + 1 || !pd(aux_gamma0)) {
    throw ConfigError("auxiliary Gamma0 must be (p+1) x (p+1) positive definite");
  }
  if (!(aux_xi0 > 0.0 && aux_nu0 > 0.0)) throw ConfigError("auxiliary xi0, nu0 must be positive");
  if (!(zeta > 0.0)) throw ConfigError("zeta must be positive");
}

bool operator==(const CovMixtureState& a, const CovMixtureState& b) {
  auto same_vecs = [](const std::vector<Eigen::VectorXd>& x, const std::vector<Eigen::VectorXd>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != y[i].size() || x[i] != y[i]) return false;
    }
    return true;
  };
  return a.mu == b.mu && a.sigma2 == b.sigma2 && same_vecs(a.gamma, b.gamma) && same_vecs(a.beta, b.beta) &&
         a.labels == b.labels && a.rho == b.rho && a.nu == b.nu;
}

// ---------------------------------------------------------------------------

namespace {

void check_common(std::vector<Violation>& out, int k, const std::vector<double>& mu,
                  const std::vector<double>& sigma2, const std::vector<int>& labels, double rho, double nu,
                  const Hyperparams& hyper, const DppWindow& window, int n_items) {
  auto add = [&](const char* code, const std::string& msg) { out.push_back({code, msg}); };
  if (k < 1) add("empty_mixture", "K must be at least 1");
  if (static_cast<int>(sigma2.size()) != k) add("size_mismatch", "sigma2 length differs from K");
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!std::isfinite(mu[j])) {
      add("location_not_finite", "mu[" + std::to_string(j) + "] is not finite");
    } else if (!window.rectangle()[0].contains(mu[j])) {
      add("location_outside_window", "mu[" + std::to_string(j) + "] lies outside R");
    }
  }
  for (std::size_t j = 0; j < sigma2.size(); ++j) {
    if (!(sigma2[j] > 0.0) || !std::isfinite(sigma2[j])) {
      add("variance_not_positive", "sigma2[" + std::to_string(j) + "] must be positive");
    }
  }
  if (static_cast<int>(labels.size()) != n_items) add("label_count", "labels length differs from n");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      add("label_out_of_range", "label of item " + std::to_string(i) + " is not a component");
      break;
    }
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) add("rho_domain", "rho must be positive");
  if (!hyper.fixed_rho && hyper.family == SpectralFamily::PowerExponential && !(rho > rho_offset(hyper, nu))) {
    add("rho_below_offset", "rho must exceed M(s, eps, nu)");
  }
  bool nu_ok = false;
  for (double v : hyper.nu.support) nu_ok = nu_ok || v == nu;
  if (!nu_ok) add("nu_support", "nu is not in the prior support");
}

}  // namespace

std::vector<Violation> validate_state(const MixtureState& state, const Hyperparams& hyper,
                                      const DppWindow& window, int n_items) {
  std::vector<Violation> out;
  const int k = state.k();
  check_common(out, k, state.mu, state.sigma2, state.labels, state.rho, state.nu, hyper, window, n_items);
  if (static_cast<int>(state.w.size()) != k) {
    out.push_back({"size_mismatch", "w length differs from K"});
  } else {
    double total = 0.0;
    bool nonneg = true;
    for (double v : state.w) {
      total += v;
      nonneg = nonneg && v >= 0.0;
    }
    if (!nonneg || std::abs(total - 1.0) > 1e-12) {
      out.push_back({"weights_not_simplex", "weights must be nonnegative and sum to 1"});
    }
  }
  return out;
}

std::vector<Violation> validate_state(const CovMixtureState& state, const Hyperparams& hyper,
                                      const DppWindow& window, int n_items) {
  std::vector<Violation> out;
  const int k = state.k();
  check_common(out, k, state.mu, state.sigma2, state.labels, state.rho, state.nu, hyper, window, n_items);
  if (static_cast<int>(state.gamma.size()) != k || static_cast<int>(state.beta.size()) != k) {
    out.push_back({"size_mismatch", "gamma / beta count differs from K"});
    return out;
  }
  if (k >= 1 && !state.beta[0].isZero(0.0)) {
    out.push_back({"reference_beta_nonzero", "beta of component 1 must be the zero vector"});
  }
  for (int j = 0; j < k; ++j) {
    if (!state.beta[static_cast<std::size_t>(j)].allFinite() || !state.gamma[static_cast<std::size_t>(j)].allFinite()) {
      out.push_back({"coefficients_not_finite", "gamma / beta must be finite"});
      break;
    }
  }
  return out;
}

MixtureState sample_prior_state(const Hyperparams& hyper, const Rectangle& rect, int truncation, int n_items,
                                Rng& rng) {
  MixtureState st;
  st.nu = hyper.nu.support[static_cast<std::size_t>(rng.index(static_cast<int>(hyper.nu.support.size())))];
  st.rho = hyper.fixed_rho ? *hyper.fixed_rho : rho_offset(hyper, st.nu) + rng.gamma(hyper.a_rho, hyper.b_rho);
  const DppWindow window(hyper.spectral_model(st.rho, st.nu), rect, truncation);
  const int k = window.sample_count(rng);
  const Interval& iv = rect[0];
  for (int j = 0; j < k; ++j) {
    st.mu.push_back(iv.lo + iv.width() * rng.uniform());
    st.sigma2.push_back(rng.inv_gamma(hyper.a0, hyper.b0));
  }
  st.w = rng.dirichlet(std::vector<double>(static_cast<std::size_t>(k), hyper.delta));
  st.labels.resize(static_cast<std::size_t>(n_items));
  std::vector<double> logw(st.w.size());
  for (std::size_t j = 0; j < logw.size(); ++j) logw[j] = std::log(st.w[j]);
  for (int& l : st.labels) l = rng.categorical_log(logw);
  return st;
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i] + 1);
  }
  return out;
}

std::string join(const std::vector<Eigen::VectorXd>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    for (Eigen::Index j = 0; j < v[i].size(); ++j) {
      if (j) out += ',';
      out += format_double(v[i][j]);
    }
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> out;
  for (auto tok : split(s, ',')) out.push_back(parse_double(tok));
  return out;
}

std::vector<int> parse_labels(std::string_view s) {
  std::vector<int> out;
  for (auto tok : split(s, ',')) out.push_back(static_cast<int>(parse_double(tok)) - 1);
  return out;
}

std::vector<Eigen::VectorXd> parse_vectors(std::string_view s) {
  std::vector<Eigen::VectorXd> out;
  for (auto row : split(s, ';')) {
    const auto vals = parse_doubles(row);
    out.emplace_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return out;
}

// key=value lines.
std::vector<std::pair<std::string_view, std::string_view>> parse_fields(std::string_view text) {
  std::vector<std::pair<std::string_view, std::string_view>> out;
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("malformed state line");
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

}  // namespace

std::string serialize(const MixtureState& st) {
  std::ostringstream os;
  os << "rho=" << format_double(st.rho) << "\nnu=" << format_double(st.nu) << "\nmu=" << join(st.mu)
     << "\nsigma2=" << join(st.sigma2) << "\nw=" << join(st.w) << "\nlabels=" << join(st.labels) << "\n";
  return os.str();
}

std::string serialize(const CovMixtureState& st) {
  std::ostringstream os;
  os << "rho=" << format_double(st.rho) << "\nnu=" << format_double(st.nu) << "\nmu=" << join(st.mu)
     << "\nsigma2=" << join(st.sigma2) << "\ngamma=" << join(st.gamma) << "\nbeta=" << join(st.beta)
     << "\nlabels=" << join(st.labels) << "\n";
  return os.str();
}

MixtureState deserialize_mixture_state(std::string_view text) {
  MixtureState st;
  for (auto [key, value] : parse_fields(text)) {
    if (key == "rho") st.rho = parse_double(value);
    else if (key == "nu") st.nu = parse_double(value);
    else if (key == "mu") st.mu = parse_doubles(value);
    else if (key == "sigma2") st.sigma2 = parse_doubles(value);
    else if (key == "w") st.w = parse_doubles(value);
    else if (key == "labels") st.labels = parse_labels(value);
    else throw DataError("unknown state field '" + std::string(key) + "'");
  }
  return st;
}

CovMixtureState deserialize_cov_state(std::string_view text) {
  CovMixtureState st;
  for (auto [key, value] : parse_fields(text)) {
    if (key == "rho") st.rho = parse_double(value);
    else if (key == "nu") st.nu = parse_double(value);
    else if (key == "mu") st.mu = parse_doubles(value);
    else if (key == "sigma2") st.sigma2 = parse_doubles(value);
    else if (key == "gamma") st.gamma = parse_vectors(value);
    else if (key == "beta") st.beta = parse_vectors(value);
    else if (key == "labels") st.labels = parse_labels(value);
    else throw DataError("unknown state field '" + std::string(key) + "'");
  }
  return st;
}

}  // namespace dppmix
