#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "dppmix/model.hpp"
#include "dppmix/random.hpp"
#include "dppmix/spectral.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

struct McmcSchedule {
  long n_burnin = 5000;
  long n_thin = 10;
  long n_keep = 5000;
  std::uint64_t seed = 1;
  int adapt_window = 50;  // batch length for adaptive Metropolis steps

  void validate() const;
};

// Rectangle R and truncation order used to build DPP windows.
struct WindowPolicy {
  Rectangle rect;
  int truncation = 50;

  // Data range widened by `expand` times the range on each side.
  static WindowPolicy from_data(std::span<const double> values, double expand = 0.2, int truncation = 50);
};

DppWindow make_window(const Hyperparams& hyper, const WindowPolicy& policy, double rho, double nu);

// Random-walk scale tuned in batches toward a target acceptance rate.
// Adaptation only happens while record() is told to adapt, so freezing the
// scale after burn-in is a matter of passing adapt = false.
class AdaptiveScale {
 public:
  explicit AdaptiveScale(double initial = 1.0, double target = 0.234, int batch = 50)
      : log_scale_(std::log(initial)), target_(target), batch_(batch) {}

  double scale() const { return std::exp(log_scale_); }
  void record(bool accepted, bool adapt);

 private:
  double log_scale_;
  double target_;
  int batch_;
  int in_batch_ = 0;
  int accepted_in_batch_ = 0;
  long batches_ = 0;
};

// Log of det[C](mu) * exp(-D_app) * pi(rho, nu): the (rho, nu) full conditional
// up to a constant. -inf outside the prior support.
double log_rho_nu_target(std::span<const double> mu, const DppWindow& window, const Hyperparams& hyper);

// Log MH ratio for moving rho to `proposed_rho` with nu fixed, including the
// Jacobian of the log(rho - offset) random walk.
double log_rho_acceptance(std::span<const double> mu, double rho, double nu, double proposed_rho,
                          const DppWindow& current, const Hyperparams& hyper, const WindowPolicy& policy);

// One adaptive random-walk step on log(rho - offset); rebuilds `window` on
// acceptance. No-op (returns false) when rho is fixed.
bool update_rho(std::span<const double> mu, double& rho, double nu, DppWindow& window, const Hyperparams& hyper,
                const WindowPolicy& policy, AdaptiveScale& scale, bool adapt, Rng& rng);

// Independent uniform proposal on the discrete nu support with rho - offset
// held fixed. No-op when nu is fixed.
bool update_nu(std::span<const double> mu, double& rho, double& nu, DppWindow& window, const Hyperparams& hyper,
               const WindowPolicy& policy, Rng& rng);

// One random-walk Metropolis step for location k. `log_lik` returns the log
// likelihood of the items in component k at a candidate location. Proposals
// outside R are rejected.
template <class LogLik>
bool update_location(std::vector<double>& mu, int k, const DppWindow& window, double step, LogLik&& log_lik,
                     Rng& rng);

}  // namespace dppmix

#include "dppmix/detail/mcmc_impl.hpp"
