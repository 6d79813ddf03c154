#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "equiflow/net.hpp"
#include "equiflow/rng.hpp"
#include "equiflow/sampler.hpp"

using namespace equiflow;

namespace {

// u(t, x) = x: exact flow x0 -> e * x0; Euler gives (1 + 1/nfe)^nfe * x0
class ExpField : public FlowField {
 public:
  explicit ExpField(int d) : d_(d) {}
  int traj_dim() const override { return d_; }
  int obs_dim() const override { return 0; }
  void eval(double, const double* x, const double*, double* out) const override {
    for (int i = 0; i < d_; ++i) out[i] = x[i];
  }

 private:
  int d_;
};

class NanField : public FlowField {
 public:
  int traj_dim() const override { return 2; }
  int obs_dim() const override { return 0; }
  void eval(double t, const double* x, const double*,
            double* out) const override {
    out[0] = t > 0.4 ? std::numeric_limits<double>::quiet_NaN() : x[0];
    out[1] = x[1];
  }
};

// u(t, x) = nfe * (c - x) with nfe = 1 collapses every prior onto c in one
// Euler step: all candidates become identical, forcing selection ties.
class CollapseField : public FlowField {
 public:
  CollapseField(int d, double c) : d_(d), c_(c) {}
  int traj_dim() const override { return d_; }
  int obs_dim() const override { return 0; }
  void eval(double, const double* x, const double*, double* out) const override {
    for (int i = 0; i < d_; ++i) out[i] = c_ - x[i];
  }

 private:
  int d_;
  double c_;
};

}  // namespace

TEST_CASE("euler integration of u = x matches the compound-growth closed form") {
  ExpField field(3);
  double x0[3] = {1.0, -2.0, 0.5};
  double x1[3];
  for (int nfe : {1, 4, 16}) {
    integrate(field, nullptr, x0, nfe, x1);
    double factor = std::pow(1.0 + 1.0 / nfe, nfe);
    for (int i = 0; i < 3; ++i)
      CHECK(x1[i] == doctest::Approx(factor * x0[i]).epsilon(1e-12));
  }
}

TEST_CASE("integration error decays at first order in the step size") {
  ExpField field(1);
  double x0 = 1.0, x1;
  std::vector<double> log_nfe, log_err;
  for (int nfe : {2, 4, 8, 16, 32, 64}) {
    integrate(field, nullptr, &x0, nfe, &x1);
    log_nfe.push_back(std::log((double)nfe));
    log_err.push_back(std::log(std::abs(x1 - std::exp(1.0))));
  }
  // least-squares slope of log err vs log nfe
  double mx = 0, my = 0, sxx = 0, sxy = 0;
  int n = (int)log_nfe.size();
  for (int i = 0; i < n; ++i) {
    mx += log_nfe[i] / n;
    my += log_err[i] / n;
  }
  for (int i = 0; i < n; ++i) {
    sxx += (log_nfe[i] - mx) * (log_nfe[i] - mx);
    sxy += (log_nfe[i] - mx) * (log_err[i] - my);
  }
  double slope = -sxy / sxx;
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("non-finite states abort with the offending step index") {
  NanField field;
  double x0[2] = {1.0, 1.0}, x1[2];
  CHECK_THROWS_AS(integrate(field, nullptr, x0, 10, x1), IntegrationError);
  try {
    integrate(field, nullptr, x0, 10, x1);
  } catch (const IntegrationError& e) {
    CHECK(e.step == 5);  // first step whose velocity was evaluated past 0.4
  }
}

TEST_CASE("first prediction cycle and every reset-period-th one are random") {
  ExpField field(4);  // chunk of 2 steps, step_dim 2
  SamplerConfig cfg;
  cfg.nfe = 2;
  cfg.m_candidates = 3;
  cfg.n = 2;
  cfg.n1 = 1;
  cfg.reset_period = 10;
  RolloutState state(99);
  int randoms = 0;
  const int cycles = 100;
  for (int c = 0; c < cycles; ++c) {
    PredictResult r = predict(field, nullptr, state, cfg, 2);
    CHECK(r.chunk.size() == 4);
    if (r.random_mode) {
      ++randoms;
      CHECK(c % cfg.reset_period == 0);
      CHECK(r.overlap_dist.empty());
    } else {
      REQUIRE(r.overlap_dist.size() == 3);
      // selection is the argmin, ties to the lowest index
      for (int i = 0; i < 3; ++i)
        CHECK(r.overlap_dist[r.selected] <= r.overlap_dist[i]);
      for (int i = 0; i < r.selected; ++i)
        CHECK(r.overlap_dist[i] > r.overlap_dist[r.selected]);
    }
  }
  CHECK(randoms == cycles / cfg.reset_period);
}

TEST_CASE("identical candidates tie and the lowest index wins") {
  // c = 0 makes the Euler step x + (0 - x) land on exactly zero for every
  // prior, so candidates tie bit for bit
  CollapseField field(2, 0.0);
  SamplerConfig cfg;
  cfg.nfe = 1;
  cfg.m_candidates = 5;
  cfg.n = 2;
  cfg.n1 = 1;
  cfg.reset_period = 1000;
  RolloutState state(7);
  predict(field, nullptr, state, cfg, 1);  // seeds prev_chunk
  for (int c = 0; c < 5; ++c) {
    PredictResult r = predict(field, nullptr, state, cfg, 1);
    CHECK_FALSE(r.random_mode);
    CHECK(r.selected == 0);
    for (double d : r.overlap_dist) CHECK(d == r.overlap_dist[0]);
  }
}

TEST_CASE("selection minimizes distance to the previous chunk's tail") {
  ExpField field(6);  // n = 3 steps of dim 2
  SamplerConfig cfg;
  cfg.nfe = 4;
  cfg.m_candidates = 4;
  cfg.n = 3;
  cfg.n1 = 2;
  cfg.reset_period = 1 << 30;
  RolloutState state(31);
  PredictResult first = predict(field, nullptr, state, cfg, 2);
  std::vector<double> prev = first.chunk;
  PredictResult second = predict(field, nullptr, state, cfg, 2);
  REQUIRE_FALSE(second.random_mode);
  // overlap window: candidate steps [0, n - n1) vs previous steps [n1, n)
  const int overlap = cfg.n - cfg.n1;  // 1 step
  double want = 0.0;
  for (int i = 0; i < overlap * 2; ++i) {
    double d = second.chunk[i] - prev[(size_t)cfg.n1 * 2 + i];
    want += d * d;
  }
  CHECK(second.overlap_dist[second.selected] ==
        doctest::Approx(std::sqrt(want)).epsilon(1e-12));
}

namespace {

class ConstField : public FlowField {
 public:
  int traj_dim() const override { return 2; }
  int obs_dim() const override { return 0; }
  void eval(double, const double*, const double*, double* out) const override {
    out[0] = 1.5;
    out[1] = -0.5;
  }
};

}  // namespace

TEST_CASE("smoothness metric vanishes only for a constant velocity field") {
  ConstField flat;
  Rng rng(5);
  SmoothnessReport r = smoothness_metric(flat, nullptr, 16, rng);
  CHECK(r.mean == 0.0);
  CHECK(r.stddev == 0.0);
  ExpField linear(2);
  Rng rng2(5);
  SmoothnessReport r2 = smoothness_metric(linear, nullptr, 16, rng2);
  CHECK(r2.mean > 0.0);
}
