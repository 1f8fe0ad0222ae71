#pragma once

#include <vector>

#include "dppmix/random.hpp"
#include "dppmix/sampler_cov.hpp"

namespace dppmix {

// Velocities (km/s) of 82 galaxies in the Corona Borealis region.
const std::vector<double>& galaxy_velocities();
// Same data in units of 1000 km/s.
std::vector<double> galaxy_data();

struct LabeledSample {
  std::vector<double> y;
  std::vector<int> labels;  // 0-based true component
};

// Equal-weight mixture of eight normals with means -10 + 20k/7 (k = 0..7)
// and common variance 0.05.
LabeledSample simulate_eight_components(int n, Rng& rng);

struct LabeledCovSample {
  CovData data;
  std::vector<int> labels;
};

// Three-component gating + regression mixture with two standard normal
// covariates. Component 0 is the reference with zero gating vector.
LabeledCovSample simulate_three_cov_components(int n, Rng& rng);

// True parameters used by simulate_three_cov_components.
CovMixtureState three_cov_truth();

}  // namespace dppmix
