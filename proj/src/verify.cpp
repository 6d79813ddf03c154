#include "equiflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace equiflow {

TwoSampleReport energy_permutation_test(const std::vector<double>& a,
                                        const std::vector<double>& b, int dim,
                                        Rng& rng, int n_permutations,
                                        double quantile) {
  const int na = (int)(a.size() / dim);
  const int nb = (int)(b.size() / dim);
  const int n = na + nb;
  if (na < 2 || nb < 2)
    throw std::invalid_argument("energy_permutation_test: need >= 2 per side");

  // pooled samples, then one pairwise distance matrix for all permutations
  std::vector<double> pool;
  pool.reserve(a.size() + b.size());
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  std::vector<double> dist((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) {
        double d = pool[(size_t)i * dim + k] - pool[(size_t)j * dim + k];
        s += d * d;
      }
      dist[(size_t)i * n + j] = dist[(size_t)j * n + i] = std::sqrt(s);
    }

  auto energy = [&](const std::vector<int>& idx) {
    // first na indices form side A, the rest side B
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j)
        ab += dist[(size_t)idx[i] * n + idx[na + j]];
    for (int i = 0; i < na; ++i)
      for (int j = i + 1; j < na; ++j) aa += dist[(size_t)idx[i] * n + idx[j]];
    for (int i = 0; i < nb; ++i)
      for (int j = i + 1; j < nb; ++j)
        bb += dist[(size_t)idx[na + i] * n + idx[na + j]];
    return 2.0 * ab / ((double)na * nb) - 2.0 * aa / ((double)na * na) -
           2.0 * bb / ((double)nb * nb);
  };

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  TwoSampleReport rep;
  rep.statistic = energy(idx);

  std::vector<double> null_stats(n_permutations);
  int ge = 0;
  for (int p = 0; p < n_permutations; ++p) {
    for (int i = n - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.below((std::uint64_t)i + 1)]);
    null_stats[p] = energy(idx);
    if (null_stats[p] >= rep.statistic) ++ge;
  }
  std::sort(null_stats.begin(), null_stats.end());
  int q = std::clamp((int)std::ceil(quantile * n_permutations) - 1, 0,
                     n_permutations - 1);
  rep.threshold = null_stats[q];
  rep.p_value = (double)(ge + 1) / (n_permutations + 1);
  rep.rejected = rep.statistic > rep.threshold;
  return rep;
}

TwoSampleReport check_distributional_equivariance(
    const FlowField& field, const RepSpec& traj_rep, const RepSpec& obs_rep,
    const std::vector<double>& obs, const GroupElement& g, int nfe,
    int n_samples, Rng& rng, int n_permutations) {
  const int d = field.traj_dim();
  std::vector<double> g_obs(obs.size());
  act(obs_rep, g, obs.data(), g_obs.data());

  std::vector<double> side_a((size_t)n_samples * d);
  std::vector<double> side_b((size_t)n_samples * d);
  std::vector<double> x0(d), xs(d);
  for (int i = 0; i < n_samples; ++i) {
    for (int k = 0; k < d; ++k) x0[k] = rng.normal();
    integrate(field, obs.data(), x0.data(), nfe, xs.data());
    act(traj_rep, g, xs.data(), side_a.data() + (size_t)i * d);
  }
  for (int i = 0; i < n_samples; ++i) {
    for (int k = 0; k < d; ++k) x0[k] = rng.normal();
    integrate(field, g_obs.data(), x0.data(), nfe,
              side_b.data() + (size_t)i * d);
  }
  return energy_permutation_test(side_a, side_b, d, rng, n_permutations);
}

namespace {

// Shared Monte-Carlo core: paired estimates of the marginal and conditional
// one-step velocity-change objectives along the same interpolation samples.
// Pairing works because x_t = (1-t) x0 + t x1 is itself a marginal draw.
struct GapStats {
  double marginal = 0.0, conditional = 0.0, gap = 0.0, gap_se = 0.0;
};

GapStats gap_mc(const GaussianFlowOracle& oracle, double t, double dt,
                int n_samples, Rng& rng) {
  const int d = oracle.dim();
  std::vector<double> fm(d), fc(d);
  oracle.flow_map(t, dt, fm.data(), fc.data());

  std::vector<double> x0(d), x1(d), xt(d), xt2(d), ut(d), ut2(d), psi(d),
      upsi(d);
  double sum_m = 0.0, sum_c = 0.0, sum_g = 0.0, sum_g2 = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    oracle.sample_prior(rng, x0.data());
    oracle.sample_data(rng, x1.data());
    for (int k = 0; k < d; ++k) {
      xt[k] = (1.0 - t) * x0[k] + t * x1[k];
      xt2[k] = (1.0 - t - dt) * x0[k] + (t + dt) * x1[k];
      psi[k] = fm[k] * xt[k] + fc[k];
    }
    oracle.eval(t, xt.data(), nullptr, ut.data());
    oracle.eval(t + dt, xt2.data(), nullptr, ut2.data());
    oracle.eval(t + dt, psi.data(), nullptr, upsi.data());
    double m = 0.0, c = 0.0;
    for (int k = 0; k < d; ++k) {
      double dm = upsi[k] - ut[k];
      double dc = ut2[k] - ut[k];
      m += dm * dm;
      c += dc * dc;
    }
    sum_m += m;
    sum_c += c;
    sum_g += c - m;
    sum_g2 += (c - m) * (c - m);
  }
  GapStats s;
  s.marginal = sum_m / n_samples;
  s.conditional = sum_c / n_samples;
  s.gap = sum_g / n_samples;
  double var = sum_g2 / n_samples - s.gap * s.gap;
  s.gap_se = std::sqrt(std::max(var, 0.0) / n_samples);
  return s;
}

}  // namespace

FaboReport check_fabo_bound(const GaussianFlowOracle& oracle, double t,
                            double dt, int n_samples, Rng& rng) {
  GapStats s = gap_mc(oracle, t, dt, n_samples, rng);
  FaboReport rep;
  rep.t = t;
  rep.dt = dt;
  rep.marginal = s.marginal;
  rep.conditional = s.conditional;
  rep.gap = s.gap;
  rep.gap_se = s.gap_se;

  // dt^2 * sum_i A_ii^2 Var[(x1 - x0)_i | x_t]; evaluating the coefficients
  // at the interval midpoint cancels the O(dt) discretization term.
  const int d = oracle.dim();
  double tm = t + 0.5 * dt;
  std::vector<double> a(d), b(d), v(d);
  oracle.coeffs(tm, a.data(), b.data());
  oracle.cond_var(tm, v.data());
  double pred = 0.0;
  for (int k = 0; k < d; ++k) pred += a[k] * a[k] * v[k];
  rep.predicted_gap = dt * dt * pred;

  rep.bound_holds = rep.marginal <= rep.conditional + 3.0 * rep.gap_se;
  return rep;
}

SandwichReport check_error_sandwich(const GaussianFlowOracle& oracle, double t,
                                    double dt, int n_samples, Rng& rng) {
  GapStats s = gap_mc(oracle, t, dt, n_samples, rng);
  const int d = oracle.dim();
  double tm = t + 0.5 * dt;
  std::vector<double> a(d), b(d), v(d);
  oracle.coeffs(tm, a.data(), b.data());
  oracle.cond_var(tm, v.data());
  double fro2 = 0.0;
  for (int k = 0; k < d; ++k) fro2 += a[k] * a[k];
  double vmin = *std::min_element(v.begin(), v.end());
  double vmax = *std::max_element(v.begin(), v.end());

  SandwichReport rep;
  rep.lower = vmin * fro2;
  rep.upper = vmax * fro2;
  rep.value = s.gap / (dt * dt);
  rep.se = s.gap_se / (dt * dt);
  rep.holds = rep.lower - 3.0 * rep.se <= rep.value &&
              rep.value <= rep.upper + 3.0 * rep.se;
  return rep;
}

double field_equivariance_defect(const FlowField& field,
                                 const RepSpec& traj_rep,
                                 const RepSpec& obs_rep, int n_probes,
                                 Rng& rng) {
  const int d = field.traj_dim();
  const int od = field.obs_dim();
  std::vector<double> x(d), o(od), gx(d), go(od), fx(d), fgx(d), gfx(d);
  double worst = 0.0;
  for (int p = 0; p < n_probes; ++p) {
    double t = rng.uniform();
    for (int k = 0; k < d; ++k) x[k] = rng.normal();
    for (int k = 0; k < od; ++k) o[k] = rng.normal();
    field.eval(t, x.data(), o.data(), fx.data());
    for (int k = 0; k < traj_rep.order; ++k) {
      GroupElement g(k, GroupSpec{traj_rep.order});
      act(traj_rep, g, x.data(), gx.data());
      if (od > 0) act(obs_rep, g, o.data(), go.data());
      field.eval(t, gx.data(), go.data(), fgx.data());
      act(traj_rep, g, fx.data(), gfx.data());
      for (int i = 0; i < d; ++i)
        worst = std::max(worst, std::abs(fgx[i] - gfx[i]));
    }
  }
  return worst;
}

}  // namespace equiflow
