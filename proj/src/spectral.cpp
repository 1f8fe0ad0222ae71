#include "dppmix/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dppmix/errors.hpp"

namespace dppmix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log of the PES exponent coefficient c in phi(x) = s^d exp(-c |x|^nu).
double pes_log_coefficient(const SpectralModel& m) {
  const double d = m.dim;
  return m.nu * std::log(m.s * std::sqrt(kPi)) +
         (m.nu / d) * (std::lgamma(d / m.nu + 1.0) - std::log(m.rho) - std::lgamma(d / 2.0 + 1.0));
}

std::string describe(const SpectralModel& m) {
  std::ostringstream os;
  os << to_string(m.family) << "(rho=" << m.rho << ", nu=" << m.nu;
  if (m.family == SpectralFamily::PowerExponential) {
    os << ", s=" << m.s;
  } else {
    os << ", alpha=" << m.alpha;
  }
  os << ", d=" << m.dim << ")";
  return os.str();
}

}  // namespace

std::string_view to_string(SpectralFamily family) {
  switch (family) {
    case SpectralFamily::PowerExponential:
      return "pes";
    case SpectralFamily::WhittleMatern:
      return "whittle_matern";
    case SpectralFamily::GeneralizedCauchy:
      return "generalized_cauchy";
  }
  return "unknown";
}

SpectralFamily parse_spectral_family(std::string_view name) {
  if (name == "pes" || name == "power_exponential") return SpectralFamily::PowerExponential;
  if (name == "whittle_matern" || name == "matern") return SpectralFamily::WhittleMatern;
  if (name == "generalized_cauchy" || name == "cauchy") return SpectralFamily::GeneralizedCauchy;
  throw ConfigError("unknown spectral family '" + std::string(name) + "'");
}

SpectralModel SpectralModel::power_exponential(double rho, double nu, double s, int dim) {
  return {SpectralFamily::PowerExponential, rho, nu, s, 0.0, dim};
}

SpectralModel SpectralModel::whittle_matern(double rho, double alpha, double nu, int dim) {
  return {SpectralFamily::WhittleMatern, rho, nu, 0.0, alpha, dim};
}

SpectralModel SpectralModel::generalized_cauchy(double rho, double alpha, double nu, int dim) {
  return {SpectralFamily::GeneralizedCauchy, rho, nu, 0.0, alpha, dim};
}

double SpectralModel::rho_max() const {
  const double d = dim;
  switch (family) {
    case SpectralFamily::PowerExponential:
      return std::numeric_limits<double>::infinity();
    case SpectralFamily::WhittleMatern:
      return std::pow(alpha, -d) *
             std::exp(std::lgamma(nu) - std::lgamma(nu + d / 2.0)) /
             (std::pow(2.0, d) * std::pow(kPi, d / 2.0));
    case SpectralFamily::GeneralizedCauchy:
      return std::pow(alpha, -d) * std::exp(std::lgamma(nu + d / 2.0) - std::lgamma(nu)) /
             std::pow(kPi, d / 2.0);
  }
  return 0.0;
}

void SpectralModel::validate() const {
  const bool ok_common = dim >= 1 && std::isfinite(rho) && rho > 0.0 && std::isfinite(nu) && nu > 0.0;
  if (!ok_common) throw DomainError("invalid spectral parameters: " + describe(*this));
  if (family == SpectralFamily::PowerExponential) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("PES ceiling s must lie in (0,1): " + describe(*this));
    return;
  }
  if (!(alpha > 0.0 && std::isfinite(alpha))) {
    throw DomainError("scale alpha must be positive: " + describe(*this));
  }
  if (!(rho < rho_max())) {
    throw DomainError("rho must be below rho_max = " + std::to_string(rho_max()) + ": " + describe(*this));
  }
}

double SpectralModel::radial(double r) const {
  const double d = dim;
  switch (family) {
    case SpectralFamily::PowerExponential: {
      if (r == 0.0) return std::pow(s, d);
      return std::pow(s, d) * std::exp(-std::exp(pes_log_coefficient(*this) + nu * std::log(r)));
    }
    case SpectralFamily::WhittleMatern: {
      const double t = 2.0 * kPi * alpha * r;
      const double log_c = std::log(rho) + std::lgamma(nu + d / 2.0) + d * std::log(2.0 * alpha * std::sqrt(kPi)) -
                           std::lgamma(nu);
      return std::exp(log_c - (nu + d / 2.0) * std::log1p(t * t));
    }
    case SpectralFamily::GeneralizedCauchy: {
      const double t = 2.0 * kPi * alpha * r;
      const double log_c =
          std::log(rho) + d * std::log(std::sqrt(kPi) * alpha) + (1.0 - nu) * std::log(2.0) - std::lgamma(nu + d / 2.0);
      if (t == 0.0) return std::exp(log_c + (nu - 1.0) * std::log(2.0) + std::lgamma(nu));
      if (t > 700.0) return 0.0;
      return std::exp(log_c + nu * std::log(t)) * std::cyl_bessel_k(nu, t);
    }
  }
  return 0.0;
}

double phi_eval(const SpectralModel& model, std::span<const double> x) {
  model.validate();
  if (static_cast<int>(x.size()) != model.dim) throw DomainError("frequency dimension mismatch");
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return model.radial(std::sqrt(sq));
}

double m_threshold(double s, double eps, double nu) {
  if (!(s > 0.0 && s < 1.0) || !(eps > 0.0) || !(nu > 0.0)) {
    throw DomainError("m_threshold requires 0 < eps < s < 1 and nu > 0");
  }
  if (!(eps < s)) throw DomainError("m_threshold requires eps < s (got eps >= s)");
  return 2.0 * s * std::tgamma(1.0 / nu + 1.0) * std::sqrt(kPi) /
         (std::tgamma(1.5) * std::pow(std::log(s / eps), 1.0 / nu));
}

// ---------------------------------------------------------------------------

DppWindow::DppWindow(const SpectralModel& model, Rectangle rect, int truncation)
    : model_(model), rect_(std::move(rect)), truncation_(truncation) {
  model_.validate();
  if (truncation_ < 1) throw DomainError("truncation order must be >= 1");
  if (static_cast<int>(rect_.size()) != model_.dim) throw DomainError("window dimension mismatch");
  volume_ = 1.0;
  for (const Interval& iv : rect_) {
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw DomainError("degenerate window interval");
    }
    volume_ *= iv.width();
  }
  log_volume_ = std::log(volume_);

  const int d = model_.dim;
  const int side = 2 * truncation_ + 1;
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) count *= static_cast<std::size_t>(side);
  lattice_.resize(count * static_cast<std::size_t>(d));
  phi_.resize(count);
  ratio_.resize(count);

  std::vector<int> k(static_cast<std::size_t>(d), -truncation_);
  d_app_ = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double sq = 0.0;
    for (int j = 0; j < d; ++j) {
      lattice_[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] = k[static_cast<std::size_t>(j)];
      sq += static_cast<double>(k[static_cast<std::size_t>(j)]) * k[static_cast<std::size_t>(j)];
    }
    const double phi = model_.radial(std::sqrt(sq));
    if (!(phi >= 0.0 && phi < 1.0)) {
      throw DomainError("spectral density leaves [0,1) on the lattice; the DPP density does not exist");
    }
    phi_[i] = phi;
    ratio_[i] = phi / (1.0 - phi);
    d_app_ += -std::log1p(-phi);  // log(1 + phi/(1-phi))
    // odometer increment
    for (int j = d - 1; j >= 0; --j) {
      if (++k[static_cast<std::size_t>(j)] <= truncation_) break;
      k[static_cast<std::size_t>(j)] = -truncation_;
    }
  }

  c_zero_ = 0.0;
  for (double r : ratio_) c_zero_ += r;

  if (d == 1) {
    int last = 0;
    for (int kk = 0; kk <= truncation_; ++kk) {
      if (ratio_[static_cast<std::size_t>(truncation_ + kk)] > 0.0) last = kk;
    }
    half_ratio_.assign(ratio_.begin() + truncation_, ratio_.begin() + truncation_ + last + 1);
  }
}

double DppWindow::c_app(double t) const {
  if (model_.dim != 1) throw DomainError("scalar c_app requires d = 1");
  // a_0 + 2 sum_k a_k cos(2 pi k t) by the Chebyshev recurrence.
  const double c1 = std::cos(2.0 * kPi * t);
  double prev = 1.0;
  double cur = c1;
  double acc = half_ratio_[0];
  for (std::size_t kk = 1; kk < half_ratio_.size(); ++kk) {
    acc += 2.0 * half_ratio_[kk] * cur;
    const double next = 2.0 * c1 * cur - prev;
    prev = cur;
    cur = next;
  }
  return acc;
}

double DppWindow::c_app(std::span<const double> t) const {
  const int d = model_.dim;
  if (static_cast<int>(t.size()) != d) throw DomainError("displacement dimension mismatch");
  if (d == 1) return c_app(t[0]);
  double acc = 0.0;
  for (std::size_t i = 0; i < ratio_.size(); ++i) {
    if (ratio_[i] == 0.0) continue;
    double dot = 0.0;
    for (int j = 0; j < d; ++j) {
      dot += lattice_[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(j)];
    }
    acc += ratio_[i] * std::cos(2.0 * kPi * dot);
  }
  return acc;
}

double DppWindow::to_unit(double x, int axis) const {
  const Interval& iv = rect_[static_cast<std::size_t>(axis)];
  return (x - iv.center()) / iv.width();
}

std::vector<double> DppWindow::to_unit(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = to_unit(xs[i]);
  return out;
}

Eigen::MatrixXd DppWindow::kernel_matrix(const Eigen::MatrixXd& unit_points) const {
  const Eigen::Index n = unit_points.rows();
  const int d = model_.dim;
  Eigen::MatrixXd c(n, n);
  std::vector<double> t(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = c_zero_;
    for (Eigen::Index j = 0; j < i; ++j) {
      for (int a = 0; a < d; ++a) t[static_cast<std::size_t>(a)] = unit_points(i, a) - unit_points(j, a);
      c(i, j) = c(j, i) = c_app(t);
    }
  }
  return c;
}

Eigen::MatrixXd DppWindow::kernel_matrix(std::span<const double> unit_points) const {
  const auto n = static_cast<Eigen::Index>(unit_points.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = c_zero_;
    for (Eigen::Index j = 0; j < i; ++j) {
      c(i, j) = c(j, i) = c_app(unit_points[static_cast<std::size_t>(i)] - unit_points[static_cast<std::size_t>(j)]);
    }
  }
  return c;
}

namespace {

double log_det_spd(const Eigen::MatrixXd& c) {
  if (c.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() == Eigen::Success) {
    const auto& l = llt.matrixLLT();
    double out = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) out += std::log(l(i, i));
    if (std::isfinite(out)) return 2.0 * out;
  }
  // Round-off can defeat the Cholesky factorisation close to singularity.
  const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(c).determinant();
  if (!(det > 0.0) || !std::isfinite(det)) return kNegInf;
  return std::log(det);
}

}  // namespace

double DppWindow::log_det_kernel(const Eigen::MatrixXd& unit_points) const {
  return log_det_spd(kernel_matrix(unit_points));
}

double DppWindow::log_det_kernel(std::span<const double> unit_points) const {
  return log_det_spd(kernel_matrix(unit_points));
}

void DppWindow::check_inside_unit(const Eigen::MatrixXd& unit_points) const {
  if (unit_points.cols() != model_.dim) throw DomainError("point dimension mismatch");
  for (Eigen::Index i = 0; i < unit_points.size(); ++i) {
    const double v = unit_points.data()[i];
    if (!(v >= -0.5 && v <= 0.5)) throw DomainError("point outside the unit window S");
  }
}

double DppWindow::log_density_unit(const Eigen::MatrixXd& unit_points) const {
  check_inside_unit(unit_points);
  if (unit_points.rows() == 0) return kNegInf;
  return 1.0 - d_app_ + log_det_kernel(unit_points);
}

double DppWindow::log_density_unit(std::span<const double> unit_points) const {
  if (model_.dim != 1) throw DomainError("span overload requires d = 1");
  for (double v : unit_points) {
    if (!(v >= -0.5 && v <= 0.5)) throw DomainError("point outside the unit window S");
  }
  if (unit_points.empty()) return kNegInf;
  return 1.0 - d_app_ + log_det_kernel(unit_points);
}

double DppWindow::log_density_rect(const Eigen::MatrixXd& points) const {
  if (points.cols() != model_.dim) throw DomainError("point dimension mismatch");
  Eigen::MatrixXd unit(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index a = 0; a < points.cols(); ++a) {
      if (!rect_[static_cast<std::size_t>(a)].contains(points(i, a))) {
        throw DomainError("point outside the window R");
      }
      unit(i, a) = to_unit(points(i, a), static_cast<int>(a));
    }
  }
  const double n = static_cast<double>(points.rows());
  return -n * log_volume_ + (volume_ - 1.0) + log_density_unit(unit);
}

double DppWindow::log_density_rect(std::span<const double> points) const {
  if (model_.dim != 1) throw DomainError("span overload requires d = 1");
  for (double x : points) {
    if (!rect_[0].contains(x)) throw DomainError("point outside the window R");
  }
  const auto unit = to_unit(points);
  const double n = static_cast<double>(points.size());
  return -n * log_volume_ + (volume_ - 1.0) + log_density_unit(unit);
}

CountMoments DppWindow::count_moments() const {
  CountMoments m;
  for (double p : phi_) {
    m.mean += p;
    m.variance += p * (1.0 - p);
  }
  return m;
}

std::vector<double> DppWindow::count_pmf(int max_count) const {
  // Poisson-binomial recursion over the Bernoulli(phi(k)) terms.
  std::vector<double> pmf(static_cast<std::size_t>(max_count) + 1, 0.0);
  pmf[0] = 1.0;
  int reach = 0;
  for (double p : phi_) {
    if (p == 0.0) continue;
    reach = std::min(reach + 1, max_count);
    for (int m = reach; m >= 1; --m) {
      pmf[static_cast<std::size_t>(m)] =
          pmf[static_cast<std::size_t>(m)] * (1.0 - p) + pmf[static_cast<std::size_t>(m - 1)] * p;
    }
    pmf[0] *= (1.0 - p);
  }
  return pmf;
}

CountMoments DppWindow::conditional_count_moments() const {
  const auto pmf = count_pmf(static_cast<int>(phi_.size()));
  const double p0 = pmf[0];
  if (!(p0 < 1.0)) throw DomainError("degenerate prior: N(S) = 0 almost surely");
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 1; k < pmf.size(); ++k) {
    m1 += static_cast<double>(k) * pmf[k];
    m2 += static_cast<double>(k * k) * pmf[k];
  }
  m1 /= (1.0 - p0);
  m2 /= (1.0 - p0);
  return {m1, m2 - m1 * m1};
}

int DppWindow::sample_count(Rng& rng) const {
  bool any = false;
  for (double p : phi_) any = any || p > 0.0;
  if (!any) throw DomainError("degenerate prior: every phi(k) is zero, cannot condition on K >= 1");
  for (;;) {
    int count = 0;
    for (double p : phi_) {
      if (p > 0.0 && rng.uniform() < p) ++count;
    }
    if (count >= 1) return count;
  }
}

double schur_factor(const DppWindow& window, std::span<const double> unit_points, int k) {
  const auto n = static_cast<Eigen::Index>(unit_points.size());
  if (n == 1) return window.c_app_zero();
  std::vector<double> rest;
  rest.reserve(unit_points.size() - 1);
  Eigen::VectorXd b(n - 1);
  Eigen::Index r = 0;
  const double xk = unit_points[static_cast<std::size_t>(k)];
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == k) continue;
    rest.push_back(unit_points[static_cast<std::size_t>(j)]);
    b[r++] = window.c_app(xk - unit_points[static_cast<std::size_t>(j)]);
  }
  const Eigen::MatrixXd c_rest = window.kernel_matrix(rest);
  Eigen::LLT<Eigen::MatrixXd> llt(c_rest);
  double quad;
  if (llt.info() == Eigen::Success) {
    quad = b.dot(llt.solve(b));
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c_rest);
    if (!lu.isInvertible()) return 0.0;
    quad = b.dot(lu.solve(b));
  }
  const double out = window.c_app_zero() - quad;
  return out > 0.0 && std::isfinite(out) ? out : 0.0;
}

}  // namespace dppmix
