#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dppmix/mcmc.hpp"
#include "dppmix/model.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

struct DataSpec {
  std::filesystem::path file;  // empty: no data (prior-only runs)
  std::string response = "y";
  std::vector<std::string> covariates;
  double scale = 1.0;          // responses are multiplied by this
};

struct WindowSpec {
  std::optional<double> lo;
  std::optional<double> hi;
  double expand = 0.2;
  int truncation = 50;
};

struct OutputSpec {
  std::filesystem::path dir = "dppmix-out";
  int grid_points = 200;
  std::optional<double> grid_lo;
  std::optional<double> grid_hi;
};

// Scalars from which CovHyperparams are built once p is known.
struct CovSpec {
  double g_scale = 100.0;
  double zeta = 0.1;
  double lambda0_scale = 1.0;
  double aux_gamma0_scale = 10.0;
  std::optional<double> aux_xi0;
  std::optional<double> aux_nu0;
};

struct RunConfig {
  ModelKind kind = ModelKind::NoCovariates;
  DataSpec data;
  Hyperparams hyper;
  CovSpec cov;
  McmcSchedule schedule;
  int chains = 1;
  bool prior_only = false;
  WindowSpec window;
  OutputSpec output;
  long prior_draws = 1000000;

  // Throws ConfigError on the first invalid setting.
  void validate() const;
};

// Sections: [model] [data] [prior] [cov] [mcmc] [window] [output] [prior_sim].
// Relative data paths are resolved against `base_dir`. With check = false the
// caller must call validate() after applying its own overrides.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, bool check = true);
RunConfig load_config(const std::filesystem::path& path, bool check = true);

// Canonical INI text of a configuration (absolute data path); parsing it back
// yields the same configuration.
std::string to_ini(const RunConfig& config);

CovHyperparams make_cov_hyperparams(const RunConfig& config, const Eigen::MatrixXd& x);

}  // namespace dppmix
