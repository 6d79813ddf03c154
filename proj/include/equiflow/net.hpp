#pragma once

#include <memory>
#include <vector>

#include "equiflow/group.hpp"
#include "equiflow/rng.hpp"

namespace equiflow {

// Smooth ELU-style nonlinearity. Applied coordinatewise on regular-rep
// channels, where the group action is a coordinate permutation, so
// equivariance is automatic.
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// A linear map L with L(g.v) = g.L(v) for all g in C_u, enforced by
// construction. Free parameters per (out-block, in-block) pair:
//   triv->triv  1 (scalar)
//   std->std    2 (a*I + b*J, scaled rotations)
//   reg->reg    u (circulant kernel, cyclic convolution)
//   triv->reg   1 (constant-vector intertwiner)
//   reg->triv   1 (mean intertwiner)
//   std->reg    2 (frequency-1 isotypic columns of the regular rep)
//   reg->std    2 (frequency-1 projection)
//   triv<->std  0 (inequivalent irreps, forced zero)
// Biases, when enabled, live only on trivial-isotypic output components
// (trivial blocks, and the constant vector of regular blocks).
class EquivariantLinear {
 public:
  EquivariantLinear(RepSpec in_type, RepSpec out_type, bool bias = true);

  int param_count() const { return n_params_; }
  const RepSpec& in_type() const { return in_type_; }
  const RepSpec& out_type() const { return out_type_; }

  // y is overwritten.
  void forward(const double* p, const double* x, double* y) const;
  // dx is overwritten; dp is accumulated.
  void backward(const double* p, const double* x, const double* dy,
                double* dx, double* dp) const;

  // Uniform +-sqrt(1/fan_in) on weight slots, zero on bias slots.
  void init_params(Rng& rng, double* p) const;

 private:
  enum class Op { TT, SS, RR, TR, RT, SR, RS };
  struct BlockOp {
    Op op;
    int in_off, out_off, p_off;
  };
  RepSpec in_type_, out_type_;
  int u_;
  bool bias_;
  int n_params_ = 0;
  int weight_params_ = 0;  // params before the bias slots
  std::vector<BlockOp> ops_;
  std::vector<std::pair<int, int>> bias_slots_;  // (out_off, kind: 0 triv, 1 reg)
  std::vector<double> cos_, sin_;                // cos/sin(2*pi*j/u)
};

// Activation storage for one forward pass; owned by the caller so several
// passes (e.g. the two FABO evaluations) can be differentiated independently.
struct Tape {
  virtual ~Tape() = default;
};

// Read-only velocity field interface u(t, x | o); what the sampler needs.
class FlowField {
 public:
  virtual ~FlowField() = default;
  virtual int traj_dim() const = 0;
  virtual int obs_dim() const = 0;
  virtual void eval(double t, const double* x, const double* o,
                    double* out) const = 0;
};

// A field with parameters and reverse-mode gradients.
class TrainableField : public FlowField {
 public:
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& grads() { return grads_; }
  void zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }
  int param_count() const { return (int)params_.size(); }

  virtual std::unique_ptr<Tape> make_tape() const = 0;
  virtual void forward(Tape& tape, double t, const double* x, const double* o,
                       double* out) const = 0;
  // Accumulates d<upstream, forward>/d_theta into grads(). Requires a tape
  // filled by forward().
  virtual void backward(Tape& tape, const double* upstream) = 0;
  virtual void init_params(Rng& rng) = 0;
  virtual bool equivariant() const = 0;

 protected:
  std::vector<double> params_, grads_;
};

struct NetConfig {
  int order = 8;        // group order u
  int steps = 16;       // action steps per chunk (n)
  RepSpec obs_rep;      // full observation rep, history included
  RepSpec action_rep;   // per-step action rep
  int d_obs = 8;        // regular channels out of the observation encoder
  int d_act = 8;
  int time_freqs = 8;   // sinusoidal time features: 2*time_freqs rho0 channels
  std::vector<int> hidden = {16, 32, 32};
};

// Sinusoidal features of t, pure rho0 type: sin/cos(pi*(k+1)*t).
void time_features(double t, int freqs, double* out);

// The equivariant velocity field u_theta(t, x_t | o): encoders lift inputs to
// regular channels, a residual equivariant MLP mixes them, a projection maps
// back to the per-step action rep.
class VelocityField : public TrainableField {
 public:
  explicit VelocityField(NetConfig cfg);

  int traj_dim() const override { return traj_rep_.total_dim(); }
  int obs_dim() const override { return cfg_.obs_rep.total_dim(); }
  const RepSpec& traj_rep() const { return traj_rep_; }
  const RepSpec& obs_rep() const { return cfg_.obs_rep; }
  const NetConfig& config() const { return cfg_; }
  bool equivariant() const override { return true; }

  void eval(double t, const double* x, const double* o,
            double* out) const override;
  std::unique_ptr<Tape> make_tape() const override;
  void forward(Tape& tape, double t, const double* x, const double* o,
               double* out) const override;
  void backward(Tape& tape, const double* upstream) override;
  void init_params(Rng& rng) override;

 private:
  struct TapeImpl;
  NetConfig cfg_;
  RepSpec traj_rep_;
  std::vector<EquivariantLinear> layers_;  // enc_obs, enc_act, core..., dec
  std::vector<int> offsets_;               // param offset per layer
  std::vector<bool> residual_;             // per core layer
  int n_core_ = 0;
};

// Non-equivariant baseline of matched size behind the same interface
// (plain MLP on the concatenated [t-features, x, o] vector).
class DenseField : public TrainableField {
 public:
  DenseField(int traj_dim, int obs_dim, int time_freqs,
             std::vector<int> hidden);

  int traj_dim() const override { return traj_dim_; }
  int obs_dim() const override { return obs_dim_; }
  bool equivariant() const override { return false; }

  void eval(double t, const double* x, const double* o,
            double* out) const override;
  std::unique_ptr<Tape> make_tape() const override;
  void forward(Tape& tape, double t, const double* x, const double* o,
               double* out) const override;
  void backward(Tape& tape, const double* upstream) override;
  void init_params(Rng& rng) override;

  const std::vector<int>& hidden() const { return hidden_; }

 private:
  struct TapeImpl;
  int traj_dim_, obs_dim_, time_freqs_;
  std::vector<int> hidden_;
  std::vector<int> in_dims_, out_dims_, offsets_;
};

// Pick a hidden width so a two-layer DenseField roughly matches
// target_params.
int matched_dense_width(int traj_dim, int obs_dim, int time_freqs,
                        int target_params);

}  // namespace equiflow
