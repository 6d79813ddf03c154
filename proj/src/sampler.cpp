#include "equiflow/sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace equiflow {

void integrate(const FlowField& field, const double* o, const double* x0,
               int nfe, double* x1) {
  if (nfe < 1) throw std::invalid_argument("integrate: nfe must be >= 1");
  const int d = field.traj_dim();
  std::vector<double> x(x0, x0 + d), u(d);
  const double h = 1.0 / nfe;
  for (int k = 0; k < nfe; ++k) {
    field.eval(k * h, x.data(), o, u.data());
    for (int j = 0; j < d; ++j) {
      x[j] += h * u[j];
      if (!std::isfinite(x[j]))
        throw IntegrationError(k, "integrate: non-finite state at step " +
                                      std::to_string(k));
    }
  }
  std::copy(x.begin(), x.end(), x1);
}

double equivariant_rollout_check(const FlowField& field,
                                 const RepSpec& traj_rep,
                                 const RepSpec& obs_rep, const double* o,
                                 const double* x0, const GroupElement& g,
                                 int nfe) {
  const int d = field.traj_dim();
  std::vector<double> go(field.obs_dim()), gx0(d), a(d), b(d), ga(d);
  act(obs_rep, g, o, go.data());
  act(traj_rep, g, x0, gx0.data());
  integrate(field, o, x0, nfe, a.data());
  integrate(field, go.data(), gx0.data(), nfe, b.data());
  act(traj_rep, g, a.data(), ga.data());
  double dev = 0.0;
  for (int j = 0; j < d; ++j) dev = std::max(dev, std::abs(b[j] - ga[j]));
  return dev;
}

PredictResult predict(const FlowField& field, const double* o,
                      RolloutState& state, const SamplerConfig& cfg,
                      int step_dim) {
  const int d = field.traj_dim();
  if (d != cfg.n * step_dim)
    throw std::invalid_argument("predict: traj_dim != n * step_dim");
  const int m = cfg.m_candidates;

  std::vector<std::vector<double>> candidates(m);
  std::vector<double> x0(d);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) x0[j] = state.rng.normal();
    candidates[i].resize(d);
    integrate(field, o, x0.data(), cfg.nfe, candidates[i].data());
  }

  PredictResult res;
  bool reset_cycle = cfg.reset_period > 0 &&
                     state.cycle_count % cfg.reset_period == 0;
  if (!state.has_prev || reset_cycle) {
    res.random_mode = true;
    res.selected = (int)state.rng.below((std::uint64_t)m);
  } else {
    const int overlap = cfg.n - cfg.n1;
    res.overlap_dist.resize(m);
    double best = std::numeric_limits<double>::infinity();
    res.selected = 0;
    for (int i = 0; i < m; ++i) {
      double sq = 0.0;
      // candidate steps [0, n-n1) vs previous chunk steps [n1, n)
      for (int s = 0; s < overlap; ++s)
        for (int j = 0; j < step_dim; ++j) {
          double diff = candidates[i][(size_t)s * step_dim + j] -
                        state.prev_chunk[(size_t)(cfg.n1 + s) * step_dim + j];
          sq += diff * diff;
        }
      res.overlap_dist[i] = std::sqrt(sq);
      if (res.overlap_dist[i] < best) {
        best = res.overlap_dist[i];
        res.selected = i;
      }
    }
  }
  res.chunk = candidates[res.selected];
  state.prev_chunk = res.chunk;
  state.has_prev = true;
  state.cycle_count += 1;
  return res;
}

SmoothnessReport smoothness_metric(const FlowField& field, const double* o,
                                   int n_timesteps, Rng& rng) {
  if (n_timesteps < 2)
    throw std::invalid_argument("smoothness_metric: need n_timesteps >= 2");
  const int d = field.traj_dim();
  std::vector<double> x(d), u_prev(d), u(d);
  for (int j = 0; j < d; ++j) x[j] = rng.normal();
  const double h = 1.0 / n_timesteps;
  std::vector<double> changes;
  changes.reserve(n_timesteps - 1);
  for (int k = 0; k < n_timesteps; ++k) {
    field.eval(k * h, x.data(), o, u.data());
    if (k > 0) {
      double sq = 0.0;
      for (int j = 0; j < d; ++j) {
        double diff = u[j] - u_prev[j];
        sq += diff * diff;
      }
      changes.push_back(std::sqrt(sq));
    }
    for (int j = 0; j < d; ++j) x[j] += h * u[j];
    std::swap(u, u_prev);
  }
  SmoothnessReport rep;
  for (double c : changes) rep.mean += c;
  rep.mean /= changes.size();
  for (double c : changes) rep.stddev += (c - rep.mean) * (c - rep.mean);
  rep.stddev = std::sqrt(rep.stddev / changes.size());
  return rep;
}

}  // namespace equiflow
