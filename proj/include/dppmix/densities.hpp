#pragma once

#include <Eigen/Dense>
#include <span>

namespace dppmix {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

double log_normal_pdf(double x, double mean, double var);
// Shape/rate parameterisation.
double log_gamma_pdf(double x, double shape, double rate);
double log_inv_gamma_pdf(double x, double shape, double rate);
double log_beta_pdf(double x, double a, double b);
// Symmetric Dirichlet(delta, ..., delta) on the simplex.
double log_dirichlet_sym_pdf(std::span<const double> w, double delta);
double log_mvnormal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov);

double log_sum_exp(std::span<const double> values);

}  // namespace dppmix
