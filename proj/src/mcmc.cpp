#include "dppmix/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dppmix/errors.hpp"

namespace dppmix {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void McmcSchedule::validate() const {
  if (n_burnin < 0) throw ConfigError("burn-in must be nonnegative");
  if (n_thin < 1) throw ConfigError("thinning must be at least 1");
  if (n_keep < 1) throw ConfigError("number of kept samples must be at least 1");
  if (adapt_window < 1) throw ConfigError("adaptation window must be at least 1");
}

WindowPolicy WindowPolicy::from_data(std::span<const double> values, double expand, int truncation) {
  if (values.empty()) throw DataError("cannot derive a window from an empty dataset; set it explicitly");
  if (!(expand >= 0.0)) throw ConfigError("window expansion must be nonnegative");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  double range = hi - lo;
  if (!(range > 0.0)) range = std::max(1.0, std::abs(lo));
  WindowPolicy p;
  p.rect = {Interval{lo - expand * range, hi + expand * range}};
  if (!(p.rect[0].lo < p.rect[0].hi)) p.rect[0] = Interval{lo - range, hi + range};
  p.truncation = truncation;
  return p;
}

DppWindow make_window(const Hyperparams& hyper, const WindowPolicy& policy, double rho, double nu) {
  return DppWindow(hyper.spectral_model(rho, nu), policy.rect, policy.truncation);
}

void AdaptiveScale::record(bool accepted, bool adapt) {
  if (!adapt) return;
  ++in_batch_;
  if (accepted) ++accepted_in_batch_;
  if (in_batch_ < batch_) return;
  ++batches_;
  const double rate = static_cast<double>(accepted_in_batch_) / static_cast<double>(in_batch_);
  const double delta = std::min(0.1, 1.0 / std::sqrt(static_cast<double>(batches_)));
  log_scale_ += rate > target_ ? delta : -delta;
  in_batch_ = 0;
  accepted_in_batch_ = 0;
}

double log_rho_nu_target(std::span<const double> mu, const DppWindow& window, const Hyperparams& hyper) {
  const SpectralModel& m = window.model();
  const double log_prior = hyper.fixed_rho ? 0.0 : log_prior_rho(m.rho, m.nu, hyper);
  if (!std::isfinite(log_prior)) return kNegInf;
  const auto unit = window.to_unit(mu);
  return window.log_det_kernel(unit) - window.d_app() + log_prior;
}

double log_rho_acceptance(std::span<const double> mu, double rho, double nu, double proposed_rho,
                          const DppWindow& current, const Hyperparams& hyper, const WindowPolicy& policy) {
  const double offset = rho_offset(hyper, nu);
  if (!(proposed_rho > offset)) return kNegInf;
  if (proposed_rho == rho) return 0.0;
  const DppWindow proposed = make_window(hyper, policy, proposed_rho, nu);
  return log_rho_nu_target(mu, proposed, hyper) - log_rho_nu_target(mu, current, hyper) +
         std::log(proposed_rho - offset) - std::log(rho - offset);
}

bool update_rho(std::span<const double> mu, double& rho, double nu, DppWindow& window, const Hyperparams& hyper,
                const WindowPolicy& policy, AdaptiveScale& scale, bool adapt, Rng& rng) {
  if (hyper.fixed_rho) return false;
  const double offset = rho_offset(hyper, nu);
  const double proposed = offset + (rho - offset) * std::exp(scale.scale() * rng.normal());
  bool accepted = false;
  if (proposed > offset && std::isfinite(proposed)) {
    const DppWindow candidate = make_window(hyper, policy, proposed, nu);
    const double log_ratio = log_rho_nu_target(mu, candidate, hyper) - log_rho_nu_target(mu, window, hyper) +
                             std::log(proposed - offset) - std::log(rho - offset);
    if (std::log(rng.uniform()) < log_ratio) {
      window = candidate;
      rho = proposed;
      accepted = true;
    }
  }
  scale.record(accepted, adapt);
  return accepted;
}

bool update_nu(std::span<const double> mu, double& rho, double& nu, DppWindow& window, const Hyperparams& hyper,
               const WindowPolicy& policy, Rng& rng) {
  if (hyper.nu.is_fixed()) return false;
  const auto& support = hyper.nu.support;
  const double proposed_nu = support[static_cast<std::size_t>(rng.index(static_cast<int>(support.size())))];
  if (proposed_nu == nu) return true;
  const double proposed_rho =
      hyper.fixed_rho ? rho : rho_offset(hyper, proposed_nu) + (rho - rho_offset(hyper, nu));
  const DppWindow candidate = make_window(hyper, policy, proposed_rho, proposed_nu);
  const double log_ratio = log_rho_nu_target(mu, candidate, hyper) - log_rho_nu_target(mu, window, hyper);
  if (std::log(rng.uniform()) < log_ratio) {
    window = candidate;
    rho = proposed_rho;
    nu = proposed_nu;
    return true;
  }
  return false;
}

}  // namespace dppmix
