#pragma once

#include <cstdint>
#include <vector>

#include "equiflow/group.hpp"
#include "equiflow/net.hpp"
#include "equiflow/rng.hpp"
#include "equiflow/sampler.hpp"
#include "equiflow/toybench.hpp"

namespace equiflow {

// Energy-distance two-sample permutation test. `a` and `b` are flat
// row-major sample matrices (na x dim, nb x dim). The pairwise distance
// matrix is computed once; permutations only shuffle labels.
struct TwoSampleReport {
  double statistic = 0.0;  // energy distance of the observed split
  double threshold = 0.0;  // null quantile from permutations
  double p_value = 1.0;
  bool rejected = false;  // statistic above threshold => distributions differ
};

TwoSampleReport energy_permutation_test(const std::vector<double>& a,
                                        const std::vector<double>& b, int dim,
                                        Rng& rng, int n_permutations = 200,
                                        double quantile = 0.95);

// Compare samples of g . sample(o, prior) against sample(g . o, prior): for
// an equivariant sampler the two sets are draws from the same distribution,
// so the test should fail to reject.
TwoSampleReport check_distributional_equivariance(
    const FlowField& field, const RepSpec& traj_rep, const RepSpec& obs_rep,
    const std::vector<double>& obs, const GroupElement& g, int nfe,
    int n_samples, Rng& rng, int n_permutations = 200);

// Monte-Carlo check that the conditional-pair objective upper-bounds the
// marginal one-step velocity change of the true flow. The marginal side
// transports x_t by the exact affine flow map of the Gaussian oracle; the
// conditional side moves along shared interpolation paths.
struct FaboReport {
  double t = 0.0;
  double dt = 0.0;
  double marginal = 0.0;     // E ||u(t+dt, psi(x)) - u(t, x)||^2
  double conditional = 0.0;  // E ||u(t+dt, x_{t+dt}) - u(t, x_t)||^2
  double gap = 0.0;          // conditional - marginal
  double gap_se = 0.0;       // 1-sigma MC error of the gap
  double predicted_gap = 0.0;  // dt^2 * tr Var[A (x1 - x0) | x_t]
  bool bound_holds = false;    // marginal <= conditional + 3 sigma
};

FaboReport check_fabo_bound(const GaussianFlowOracle& oracle, double t,
                            double dt, int n_samples, Rng& rng);

// Two-sided pinch of gap / dt^2 for the affine oracle:
//   mu1 ||A||_F^2 <= gap / dt^2 <= mu2 ||A||_F^2
// with mu1/mu2 the extreme eigenvalues of the conditional covariance.
struct SandwichReport {
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;  // measured gap / dt^2
  double se = 0.0;
  bool holds = false;
};

SandwichReport check_error_sandwich(const GaussianFlowOracle& oracle, double t,
                                    double dt, int n_samples, Rng& rng);

// max_g max over probe inputs of ||f(g.x) - g.f(x)||_inf for a trainable
// field, exercising every group element.
double field_equivariance_defect(const FlowField& field,
                                 const RepSpec& traj_rep,
                                 const RepSpec& obs_rep, int n_probes,
                                 Rng& rng);

}  // namespace equiflow
