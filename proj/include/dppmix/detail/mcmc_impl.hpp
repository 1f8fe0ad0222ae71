#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace dppmix {

template <class LogLik>
bool update_location(std::vector<double>& mu, int k, const DppWindow& window, double step, LogLik&& log_lik,
                     Rng& rng) {
  const double current = mu[static_cast<std::size_t>(k)];
  const double proposal = current + step * rng.normal();
  if (!window.rectangle()[0].contains(proposal)) return false;

  std::vector<double> unit = window.to_unit(mu);
  const double schur_old = schur_factor(window, unit, k);
  unit[static_cast<std::size_t>(k)] = window.to_unit(proposal);
  const double schur_new = schur_factor(window, unit, k);
  if (!(schur_new > 0.0)) return false;

  double log_ratio = log_lik(proposal) - log_lik(current);
  // A zero-density current configuration accepts any admissible move.
  log_ratio += schur_old > 0.0 ? std::log(schur_new) - std::log(schur_old)
                               : std::numeric_limits<double>::infinity();
  if (std::log(rng.uniform()) < log_ratio) {
    mu[static_cast<std::size_t>(k)] = proposal;
    return true;
  }
  return false;
}

}  // namespace dppmix
