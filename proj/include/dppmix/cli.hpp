#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dppmix/config.hpp"
#include "dppmix/io.hpp"
#include "dppmix/mcmc.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

// Environment variable that overrides the configured output directory
// (the --out flag still wins).
inline constexpr const char* kOutputEnvVar = "DPPMIX_OUT";

// Explicit window if configured (it must contain every response), otherwise
// the response range widened by the expansion factor.
WindowPolicy window_policy(const RunConfig& config, const Dataset& data);

// Data named by the config; an empty dataset when none is configured.
Dataset load_run_data(const RunConfig& config);

// Chain c uses seed + c.
Trace fit_chain(const RunConfig& config, const Dataset& data, int chain);
// Runs config.chains chains concurrently and returns them in chain order.
std::vector<Trace> fit_chains(const RunConfig& config, const Dataset& data);

// Text of every analysis output derived from a trace. fit and analyze both go
// through this so their files agree byte for byte.
struct Report {
  std::string summary;     // key = value lines
  std::string k_pmf;       // k,probability
  std::string partition;   // item,label (empty without data)
  std::string predictive;  // y,mean,lower,upper
};

Report make_report(const Trace& trace, const Dataset& data, const RunConfig& config);
void write_report(const Report& report, const std::filesystem::path& dir);

struct PriorSimResult {
  long draws = 0;
  std::vector<long> counts;  // counts[k] = number of draws with K = k
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double expected_mean = 0.0;  // average of sum_k phi(k), the Rao-Blackwell estimate
  double mean_positive = 0.0;  // moments given K >= 1
  double variance_positive = 0.0;
};

// (rho, nu) from the prior, then K as a sum of independent Bernoulli(phi(k)).
PriorSimResult prior_sim(const RunConfig& config, const WindowPolicy& policy);
std::string format_prior_summary(const PriorSimResult& result);
std::string format_prior_pmf(const PriorSimResult& result);

// Entry point of the command line tool. Returns the process exit code:
// 0 success, 1 configuration error, 2 data error, 3 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dppmix
