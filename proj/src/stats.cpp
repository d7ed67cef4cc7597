#include "mbt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace mbt::lab {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw MbtError("pearson: sample lengths differ");
  if (xs.size() < 3) throw MbtError("pearson: needs at least 3 paired samples");
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) throw DegenerateVariance("xs");
  if (syy == 0.0) throw DegenerateVariance("ys");

  Correlation c;
  c.n = xs.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(c.n - 2);
  const double rest = 1.0 - c.r * c.r;
  if (rest <= 0.0) {
    c.t = std::copysign(std::numeric_limits<double>::infinity(), c.r);
    c.p = std::numeric_limits<double>::min();
    return c;
  }
  c.t = c.r * std::sqrt(dof / rest);
  boost::math::students_t_distribution<double> dist(dof);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(c.t)));
  c.p = std::clamp(p, std::numeric_limits<double>::min(), 1.0);
  return c;
}

MeanCi mean_ci(const std::vector<double>& values, double level) {
  if (values.size() < 2) throw MbtError("mean_ci: needs at least 2 samples");
  if (!(level > 0.0) || !(level < 1.0)) throw MbtError("mean_ci: level must lie in (0, 1)");
  MeanCi out;
  out.mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    ss += d * d;
  }
  const double n = static_cast<double>(values.size());
  const double s = std::sqrt(ss / (n - 1.0));
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(),
                                         (1.0 + level) / 2.0);
  out.half_width = z * s / std::sqrt(n);
  return out;
}

cov::Map case_coverage(const Engine& eng, const cov::Universe& u, const gen::TestCase& tc,
                       long long fuel) {
  cov::Map m = cov::make_map(u);
  cov::Recorder rec(u, m);
  StepOptions opt;
  opt.mode = StepMode::Strict;
  opt.fuel = fuel;
  opt.observer = &rec.observer();
  SystemState st = eng.initial_state();
  try {
    for (const auto& step : tc.steps) eng.step(st, step.inputs, opt);
  } catch (const MbtError&) {
    // Replay against a model the case was not recorded for may get stuck;
    // the ticks that did run still count.
  }
  return m;
}

cov::Map suite_coverage(const Engine& eng, const cov::Universe& u, const gen::Suite& s,
                        long long fuel) {
  cov::Map acc = cov::make_map(u);
  for (const auto& tc : s.cases) acc = cov::merge(acc, case_coverage(eng, u, tc, fuel));
  return acc;
}

MeanCi subsample_coverage(const Engine& eng, const cov::Universe& u, const gen::Suite& pool,
                          size_t n, int reps, uint64_t seed, double level, long long fuel) {
  if (n == 0 || n > pool.cases.size()) throw PoolTooSmall(pool.cases.size(), n);
  if (reps < 2) throw MbtError("subsample_coverage: needs at least 2 repetitions");

  std::vector<cov::Map> per_case;
  per_case.reserve(pool.cases.size());
  for (const auto& tc : pool.cases) per_case.push_back(case_coverage(eng, u, tc, fuel));

  std::vector<double> ratios;
  ratios.reserve(static_cast<size_t>(reps));
  Rng master(seed);
  for (int rep = 0; rep < reps; ++rep) {
    Rng draw = master.fork(static_cast<uint64_t>(rep));
    std::vector<size_t> idx(pool.cases.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    draw.shuffle(idx);
    cov::Map acc = cov::make_map(u);
    for (size_t i = 0; i < n; ++i) acc = cov::merge(acc, per_case[idx[i]]);
    ratios.push_back(cov::cd_ratio(acc, u).value());
  }
  return mean_ci(ratios, level);
}

}  // namespace mbt::lab
