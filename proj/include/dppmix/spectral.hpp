#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dppmix/random.hpp"

namespace dppmix {

enum class SpectralFamily { PowerExponential, WhittleMatern, GeneralizedCauchy };

std::string_view to_string(SpectralFamily family);
SpectralFamily parse_spectral_family(std::string_view name);

// Isotropic spectral density of a stationary DPP kernel.
//
// PowerExponential uses (rho, nu, s); WhittleMatern and GeneralizedCauchy use
// (rho, alpha, nu) and require rho < rho_max(). Every valid model satisfies
// 0 <= phi(x) < 1 for all frequencies x.
struct SpectralModel {
  SpectralFamily family = SpectralFamily::PowerExponential;
  double rho = 1.0;
  double nu = 2.0;
  double s = 0.5;
  double alpha = 0.1;
  int dim = 1;

  static SpectralModel power_exponential(double rho, double nu, double s = 0.5, int dim = 1);
  static SpectralModel whittle_matern(double rho, double alpha, double nu, int dim = 1);
  static SpectralModel generalized_cauchy(double rho, double alpha, double nu, int dim = 1);

  // Upper bound on rho for the Whittle-Matern / Cauchy families; +inf for PES.
  double rho_max() const;

  // Throws DomainError when the parameters leave the family's domain.
  void validate() const;

  // phi at a frequency of Euclidean norm r. No validation.
  double radial(double r) const;
};

// Validated evaluation at a frequency vector (size must equal model.dim).
double phi_eval(const SpectralModel& model, std::span<const double> x);

// Smallest rho (PES, d = 1) with phi(2) > eps.
double m_threshold(double s, double eps, double nu);

struct Interval {
  double lo = -0.5;
  double hi = 0.5;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

using Rectangle = std::vector<Interval>;

inline Rectangle unit_rectangle(int dim) { return Rectangle(static_cast<std::size_t>(dim)); }

struct CountMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Truncated spectral approximation of a DPP restricted to a rectangle R.
//
// Caches phi(k) and phi(k)/(1 - phi(k)) on the lattice {-N..N}^d together with
// D_app = sum_k log(1 + phi(k)/(1 - phi(k))). Immutable once built, so a window
// can be shared between chains. Points passed to the *_unit functions live in
// S = [-1/2, 1/2]^d; the *_rect functions take points in R and rescale.
class DppWindow {
 public:
  DppWindow(const SpectralModel& model, Rectangle rect, int truncation);

  const SpectralModel& model() const { return model_; }
  const Rectangle& rectangle() const { return rect_; }
  int truncation() const { return truncation_; }
  int dim() const { return model_.dim; }
  double d_app() const { return d_app_; }
  double volume() const { return volume_; }
  double log_volume() const { return log_volume_; }

  // Lattice point i occupies lattice()[i*dim .. i*dim + dim).
  std::span<const int> lattice() const { return lattice_; }
  std::span<const double> phi_values() const { return phi_; }
  std::span<const double> kernel_weights() const { return ratio_; }

  // Kernel value at displacement t (each |t_j| <= 1 in unit coordinates).
  double c_app(std::span<const double> t) const;
  double c_app(double t) const;
  double c_app_zero() const { return c_zero_; }

  // Affine map R -> S for one coordinate / one point.
  double to_unit(double x, int axis = 0) const;
  std::vector<double> to_unit(std::span<const double> xs) const;  // d = 1

  // Kernel matrix of unit points given as rows of an n x d matrix.
  Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& unit_points) const;
  Eigen::MatrixXd kernel_matrix(std::span<const double> unit_points) const;  // d = 1

  // log det of the kernel matrix; -inf when it is numerically not positive.
  double log_det_kernel(const Eigen::MatrixXd& unit_points) const;
  double log_det_kernel(std::span<const double> unit_points) const;

  // log f_app on S; -inf for the empty configuration.
  double log_density_unit(const Eigen::MatrixXd& unit_points) const;
  double log_density_unit(std::span<const double> unit_points) const;
  // log f_app on R.
  double log_density_rect(const Eigen::MatrixXd& points) const;
  double log_density_rect(std::span<const double> points) const;

  // Unconditional moments of N(S) (sum of independent Bernoulli(phi(k))).
  CountMoments count_moments() const;
  // Exact pmf of N(S) on {0..max_count} by convolution of the Bernoulli terms.
  std::vector<double> count_pmf(int max_count) const;
  // Moments of N(S) conditioned on N(S) >= 1.
  CountMoments conditional_count_moments() const;
  // One draw of N(S) conditioned on N(S) >= 1 by rejection.
  int sample_count(Rng& rng) const;

 private:
  void check_inside_unit(const Eigen::MatrixXd& unit_points) const;

  SpectralModel model_;
  Rectangle rect_;
  int truncation_;
  std::vector<int> lattice_;
  std::vector<double> phi_;
  std::vector<double> ratio_;
  // d = 1 only: ratio_ at k = 0..N_eff, used by the cosine recurrence.
  std::vector<double> half_ratio_;
  double d_app_ = 0.0;
  double c_zero_ = 0.0;
  double volume_ = 1.0;
  double log_volume_ = 0.0;
};

// Schur complement C(x_k, x_k) - b C_{-k}^{-1} b^T for unit points (d = 1).
// Equals det C(all) / det C(all but k); c_app(0) when there is one point.
// Returns 0 when the reduced matrix is numerically singular.
double schur_factor(const DppWindow& window, std::span<const double> unit_points, int k);

}  // namespace dppmix
