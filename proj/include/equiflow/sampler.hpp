#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "equiflow/group.hpp"
#include "equiflow/net.hpp"
#include "equiflow/rng.hpp"

namespace equiflow {

struct SamplerConfig {
  int nfe = 5;
  int m_candidates = 5;
  int n = 16;            // chunk length
  int n1 = 8;            // executed prefix
  int reset_period = 10; // random selection every this many prediction cycles
};

struct IntegrationError : std::runtime_error {
  int step;
  IntegrationError(int s, const std::string& what)
      : std::runtime_error(what), step(s) {}
};

// Explicit Euler over t in [0,1] with uniform steps 1/nfe:
//   x_{k+1} = x_k + (1/nfe) u(k/nfe, x_k | o)
// Throws IntegrationError (with the offending step) on non-finite state.
void integrate(const FlowField& field, const double* o, const double* x0,
               int nfe, double* x1);

// || integrate(g.o, g.x0) - g.integrate(o, x0) ||_inf  -- the discrete version
// of flow equivariance. Should be ~1e-12 for exactly equivariant nets.
double equivariant_rollout_check(const FlowField& field,
                                 const RepSpec& traj_rep,
                                 const RepSpec& obs_rep, const double* o,
                                 const double* x0, const GroupElement& g,
                                 int nfe);

struct RolloutState {
  bool has_prev = false;
  std::vector<double> prev_chunk;  // n * step_dim
  long cycle_count = 0;
  Rng rng;

  explicit RolloutState(std::uint64_t seed = 0) : rng(seed) {}
};

struct PredictResult {
  std::vector<double> chunk;  // selected candidate, n * step_dim
  int selected = 0;
  bool random_mode = false;
  std::vector<double> overlap_dist;  // per candidate; empty in random mode
};

// Batched candidate generation + overlap-distance selection with periodic
// reset. Candidates are integrated from independent priors; the overlap
// window compares the candidate's first n-n1 steps against the previous
// chunk's last n-n1 steps. Ties break to the lowest candidate index.
PredictResult predict(const FlowField& field, const double* o,
                      RolloutState& state, const SamplerConfig& cfg,
                      int step_dim);

struct SmoothnessReport {
  double mean = 0.0;
  double stddev = 0.0;
};

// Mean/std of ||u(t_{k+1}, x_{k+1}) - u(t_k, x_k)|| along one sampled flow
// trajectory at n_timesteps uniform times.
SmoothnessReport smoothness_metric(const FlowField& field, const double* o,
                                   int n_timesteps, Rng& rng);

}  // namespace equiflow
