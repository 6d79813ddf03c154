#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "equiflow/group.hpp"
#include "equiflow/net.hpp"
#include "equiflow/rng.hpp"
#include "equiflow/sampler.hpp"
#include "equiflow/train.hpp"

namespace equiflow {

// Rotation helpers for the 10D action rep. 6D vectors store the first two
// rows of a rotation matrix interleaved by column, (R00,R10,R01,R11,R02,R12),
// so planar rotations act as rho1^3.
void rot_to_6d(const double* R, double* v6);          // R row-major 3x3
void gram_schmidt_6d(const double* v6, double* R);    // 6D -> rotation matrix
double rot_geodesic_angle(const double* Ra, const double* Rb);
void rot_slerp_toward(const double* R, const double* R_goal, double frac,
                      double* out);

// A desk-scale rotationally symmetric task. Environments are value types;
// states and actions are plain rep-typed vectors so group actions apply
// directly in tests.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::string name() const = 0;
  virtual RepSpec state_rep() const = 0;
  virtual RepSpec obs_step_rep() const = 0;
  virtual RepSpec action_rep() const = 0;
  virtual int horizon() const = 0;
  virtual int obs_hist() const = 0;  // m
  virtual void reset(Rng& rng, double* state) const = 0;
  // Start-state distribution used when recording demonstrations. Defaults to
  // the evaluation distribution; tasks may restrict it to a canonical
  // workspace sector so orientation coverage must come from the policy's
  // structure rather than the data.
  virtual void reset_demo(Rng& rng, double* state) const { reset(rng, state); }
  virtual void step(const double* state, const double* action,
                    double* next) const = 0;
  virtual void observe(const double* state, int step_idx,
                       double* obs_step) const = 0;
  virtual bool success(const double* state) const = 0;
  // Scripted expert. Deliberately not equivariant: it carries a small fixed
  // lab-frame bias, so the training data does not hand the symmetry to the
  // policy for free.
  virtual void expert_action(const double* state, double* action) const = 0;

  int state_dim() const { return state_rep().total_dim(); }
  int action_dim() const { return action_rep().total_dim(); }
  int obs_step_dim() const { return obs_step_rep().total_dim(); }
  int obs_dim() const { return obs_hist() * obs_step_dim(); }
  RepSpec obs_rep() const { return obs_step_rep().repeated(obs_hist()); }
};

// "reach2d": planar point agent with a hidden arc-direction mode, goal on an
// annulus. "pose10d": kinematic point with full 10D pose actions.
std::unique_ptr<Env> make_env(const std::string& name, int group_order);

// Chunk-producing policy for episodic evaluation. The expert variant reads
// the privileged state; learned policies only read the observation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int chunk_steps() const = 0;
  virtual void predict_chunk(const double* state, const double* obs,
                             double* chunk) = 0;
};

class ExpertPolicy : public Policy {
 public:
  ExpertPolicy(const Env& env, int n) : env_(env), n_(n) {}
  int chunk_steps() const override { return n_; }
  void predict_chunk(const double* state, const double* obs,
                     double* chunk) override;

 private:
  const Env& env_;
  int n_;
};

// Receding-horizon wrapper around a learned velocity field.
class FlowPolicy : public Policy {
 public:
  FlowPolicy(const FlowField& field, SamplerConfig cfg, int step_dim,
             std::uint64_t seed)
      : field_(field), cfg_(cfg), step_dim_(step_dim), state_(seed) {}
  int chunk_steps() const override { return cfg_.n; }
  void predict_chunk(const double* state, const double* obs,
                     double* chunk) override;

 private:
  const FlowField& field_;
  SamplerConfig cfg_;
  int step_dim_;
  RolloutState state_;
};

struct EpisodeResult {
  bool success = false;
  bool aborted = false;  // policy emitted non-finite actions
  int steps = 0;
  std::vector<double> executed;  // steps * action_dim
};

// Receding-horizon loop: execute the first n1 steps of each predicted chunk
// until success or the horizon runs out.
EpisodeResult run_episode(const Env& env, Policy& policy, int n1,
                          std::uint64_t seed);

struct SuccessRate {
  double rate = 0.0;
  double stderr_ = 0.0;  // 1-sigma binomial
  int episodes = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>(std::uint64_t)>;

SuccessRate success_rate(const Env& env, const PolicyFactory& make_policy,
                         int n1, int n_episodes, std::uint64_t seed);

/// Demonstration dataset: (observation history, n-step expert action chunk)
// pairs recorded along expert rollouts.
struct DemoDataset {
  std::string env;
  int order = 8;      // u
  int obs_hist = 2;   // m
  int steps = 16;     // n
  std::uint64_t seed = 0;
  int obs_dim = 0;
  int traj_dim = 0;
  std::vector<double> obs, traj;

  int count() const {
    return obs_dim == 0 ? 0 : (int)(obs.size() / obs_dim);
  }
  void save(const std::string& path) const;
  static DemoDataset load(const std::string& path);
};

DemoDataset make_demo_dataset(const Env& env, int n_demos, std::uint64_t seed,
                              int n_steps);

// Uniformly sample a training batch from the dataset.
FlowBatch make_batch(const DemoDataset& data, int batch_size, double dt,
                     Rng& rng);

// Closed-form marginal velocity field of the linear-interpolation path from
/// N(0, I) to N(mu, diag(sigma2)): u*(t, x) = A(t) x + b(t) with diagonal
// A(t). The one tractable case, used as the verification oracle.
class GaussianFlowOracle : public FlowField {
 public:
  GaussianFlowOracle(std::vector<double> mu, std::vector<double> sigma2);

  int dim() const { return (int)mu_.size(); }
  int traj_dim() const override { return dim(); }
  int obs_dim() const override { return 0; }

  // per-dimension affine coefficients of u*(t, .)
  void coeffs(double t, double* a, double* b) const;
  void eval(double t, const double* x, const double* o,
            double* out) const override;
  // Var[x1 - x0 | x_t], per dimension (constant in x for Gaussians)
  void cond_var(double t, double* v) const;
  void marginal(double t, double* mean, double* var) const;
  // Exact flow map from t0 to t0+dt as x -> m*x + c per dimension (RK4 on
  // the affine coefficients).
  void flow_map(double t0, double dt, double* m, double* c,
                int substeps = 200) const;
  void sample_prior(Rng& rng, double* x) const;
  void sample_data(Rng& rng, double* x) const;

  const std::vector<double>& mean_data() const { return mu_; }
  const std::vector<double>& var_data() const { return s2_; }

 private:
  std::vector<double> mu_, s2_;
};

}  // namespace equiflow
