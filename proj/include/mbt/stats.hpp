#pragma once

#include <vector>

#include "mbt/coverage.hpp"
#include "mbt/engine.hpp"
#include "mbt/suite.hpp"

namespace mbt::lab {

struct DegenerateVariance : MbtError {
  explicit DegenerateVariance(const std::string& side)
      : MbtError("pearson: zero variance in " + side) {}
};

struct PoolTooSmall : MbtError {
  size_t pool = 0;
  size_t wanted = 0;
  PoolTooSmall(size_t pool_, size_t wanted_)
      : MbtError("subsample of " + std::to_string(wanted_) + " cases from a pool of " +
                 std::to_string(pool_)),
        pool(pool_),
        wanted(wanted_) {}
};

struct Correlation {
  double r = 0.0;
  double t = 0.0;  // r * sqrt((n-2) / (1 - r^2)); +-inf when |r| == 1
  double p = 1.0;  // two-sided, Student's t with n-2 dof; clamped into (0, 1]
  size_t n = 0;
};

// Product-moment correlation with significance. Needs at least three paired
// samples and nonzero variance on both sides. At |r| == 1 the t statistic is
// infinite and p underflows; it is reported as the smallest positive normal
// double so that p stays strictly positive.
Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};

// Mean with a confidence interval under a normality assumption:
// mean +- z * s / sqrt(n), z the standard-normal quantile at (1+level)/2
// (z ~ 2.326 for the default level). Needs at least two samples and
// 0 < level < 1. The sample is treated as approximately normal by design;
// no Student correction is applied.
MeanCi mean_ci(const std::vector<double>& values, double level = 0.98);

// Model C/D coverage of one replayed case: strict run over the recorded
// inputs with a condition recorder attached. Replay errors leave the map at
// whatever was observed up to the failing tick.
cov::Map case_coverage(const Engine& eng, const cov::Universe& u, const gen::TestCase& tc,
                       long long fuel = 100000);

// Union of the per-case maps (cases replay independently from the initial
// state, so cumulative coverage is exactly the pointwise OR).
cov::Map suite_coverage(const Engine& eng, const cov::Universe& u, const gen::Suite& s,
                        long long fuel = 100000);

// The subsampled-coverage experiment: `reps` independent seeded draws of `n`
// cases without replacement from the pool; per draw the cumulative C/D ratio;
// mean_ci over the draws. Throws PoolTooSmall when n exceeds the pool (or is
// zero), and MbtError when reps < 2.
MeanCi subsample_coverage(const Engine& eng, const cov::Universe& u, const gen::Suite& pool,
                          size_t n, int reps, uint64_t seed, double level = 0.98,
                          long long fuel = 100000);

}  // namespace mbt::lab
