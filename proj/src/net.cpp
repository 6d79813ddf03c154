#include "equiflow/net.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace equiflow {

EquivariantLinear::EquivariantLinear(RepSpec in_type, RepSpec out_type, bool bias)
    : in_type_(std::move(in_type)),
      out_type_(std::move(out_type)),
      u_(in_type_.order),
      bias_(bias) {
  if (in_type_.order != out_type_.order)
    throw std::invalid_argument("equivariant_linear: group order mismatch");
  cos_.resize(u_);
  sin_.resize(u_);
  for (int j = 0; j < u_; ++j) {
    cos_[j] = std::cos(2.0 * M_PI * j / u_);
    sin_[j] = std::sin(2.0 * M_PI * j / u_);
  }
  int p = 0;
  int out_off = 0;
  for (BlockType ob : out_type_.blocks) {
    int in_off = 0;
    for (BlockType ib : in_type_.blocks) {
      Op op;
      int np = 0;
      bool present = true;
      if (ib == BlockType::Trivial && ob == BlockType::Trivial) { op = Op::TT; np = 1; }
      else if (ib == BlockType::Standard && ob == BlockType::Standard) { op = Op::SS; np = 2; }
      else if (ib == BlockType::Regular && ob == BlockType::Regular) { op = Op::RR; np = u_; }
      else if (ib == BlockType::Trivial && ob == BlockType::Regular) { op = Op::TR; np = 1; }
      else if (ib == BlockType::Regular && ob == BlockType::Trivial) { op = Op::RT; np = 1; }
      else if (ib == BlockType::Standard && ob == BlockType::Regular) { op = Op::SR; np = 2; }
      else if (ib == BlockType::Regular && ob == BlockType::Standard) { op = Op::RS; np = 2; }
      else present = false;  // triv<->std: zero by Schur
      if (present) {
        ops_.push_back({op, in_off, out_off, p});
        p += np;
      }
      in_off += block_dim(ib, u_);
    }
    out_off += block_dim(ob, u_);
  }
  weight_params_ = p;
  if (bias_) {
    out_off = 0;
    for (BlockType ob : out_type_.blocks) {
      if (ob == BlockType::Trivial) bias_slots_.push_back({out_off, 0});
      else if (ob == BlockType::Regular) bias_slots_.push_back({out_off, 1});
      out_off += block_dim(ob, u_);
    }
    p += (int)bias_slots_.size();
  }
  n_params_ = p;
}

void EquivariantLinear::forward(const double* p, const double* x, double* y) const {
  int dout = out_type_.total_dim();
  std::fill(y, y + dout, 0.0);
  const int u = u_;
  for (const BlockOp& b : ops_) {
    const double* xi = x + b.in_off;
    double* yo = y + b.out_off;
    const double* w = p + b.p_off;
    switch (b.op) {
      case Op::TT: yo[0] += w[0] * xi[0]; break;
      case Op::SS:
        yo[0] += w[0] * xi[0] - w[1] * xi[1];
        yo[1] += w[1] * xi[0] + w[0] * xi[1];
        break;
      case Op::RR:
        for (int j = 0; j < u; ++j) {
          double acc = 0.0;
          for (int k = 0; k < u; ++k) acc += w[(j - k + u) % u] * xi[k];
          yo[j] += acc;
        }
        break;
      case Op::TR:
        for (int j = 0; j < u; ++j) yo[j] += w[0] * xi[0];
        break;
      case Op::RT: {
        double m = 0.0;
        for (int j = 0; j < u; ++j) m += xi[j];
        yo[0] += w[0] * m / u;
        break;
      }
      case Op::SR:
        for (int j = 0; j < u; ++j)
          yo[j] += (w[0] * cos_[j] + w[1] * sin_[j]) * xi[0] +
                   (w[0] * sin_[j] - w[1] * cos_[j]) * xi[1];
        break;
      case Op::RS: {
        double p0 = 0.0, p1 = 0.0;
        for (int j = 0; j < u; ++j) {
          p0 += cos_[j] * xi[j];
          p1 += sin_[j] * xi[j];
        }
        p0 *= 2.0 / u;
        p1 *= 2.0 / u;
        yo[0] += w[0] * p0 - w[1] * p1;
        yo[1] += w[1] * p0 + w[0] * p1;
        break;
      }
    }
  }
  if (bias_) {
    const double* pb = p + weight_params_;
    for (size_t i = 0; i < bias_slots_.size(); ++i) {
      auto [off, kind] = bias_slots_[i];
      if (kind == 0) y[off] += pb[i];
      else
        for (int j = 0; j < u; ++j) y[off + j] += pb[i];
    }
  }
}

void EquivariantLinear::backward(const double* p, const double* x,
                                 const double* dy, double* dx, double* dp) const {
  int din = in_type_.total_dim();
  std::fill(dx, dx + din, 0.0);
  const int u = u_;
  for (const BlockOp& b : ops_) {
    const double* xi = x + b.in_off;
    const double* dyo = dy + b.out_off;
    double* dxi = dx + b.in_off;
    const double* w = p + b.p_off;
    double* dw = dp + b.p_off;
    switch (b.op) {
      case Op::TT:
        dw[0] += dyo[0] * xi[0];
        dxi[0] += w[0] * dyo[0];
        break;
      case Op::SS:
        dw[0] += dyo[0] * xi[0] + dyo[1] * xi[1];
        dw[1] += -dyo[0] * xi[1] + dyo[1] * xi[0];
        dxi[0] += w[0] * dyo[0] + w[1] * dyo[1];
        dxi[1] += -w[1] * dyo[0] + w[0] * dyo[1];
        break;
      case Op::RR:
        for (int m = 0; m < u; ++m) {
          double acc = 0.0;
          for (int j = 0; j < u; ++j) acc += dyo[j] * xi[(j - m + u) % u];
          dw[m] += acc;
        }
        for (int k = 0; k < u; ++k) {
          double acc = 0.0;
          for (int j = 0; j < u; ++j) acc += w[(j - k + u) % u] * dyo[j];
          dxi[k] += acc;
        }
        break;
      case Op::TR: {
        double s = 0.0;
        for (int j = 0; j < u; ++j) s += dyo[j];
        dw[0] += s * xi[0];
        dxi[0] += w[0] * s;
        break;
      }
      case Op::RT: {
        double m = 0.0;
        for (int j = 0; j < u; ++j) m += xi[j];
        dw[0] += dyo[0] * m / u;
        for (int j = 0; j < u; ++j) dxi[j] += w[0] * dyo[0] / u;
        break;
      }
      case Op::SR: {
        double da = 0.0, db = 0.0, dx0 = 0.0, dx1 = 0.0;
        for (int j = 0; j < u; ++j) {
          double d = dyo[j];
          da += d * (cos_[j] * xi[0] + sin_[j] * xi[1]);
          db += d * (sin_[j] * xi[0] - cos_[j] * xi[1]);
          dx0 += d * (w[0] * cos_[j] + w[1] * sin_[j]);
          dx1 += d * (w[0] * sin_[j] - w[1] * cos_[j]);
        }
        dw[0] += da;
        dw[1] += db;
        dxi[0] += dx0;
        dxi[1] += dx1;
        break;
      }
      case Op::RS: {
        double p0 = 0.0, p1 = 0.0;
        for (int j = 0; j < u; ++j) {
          p0 += cos_[j] * xi[j];
          p1 += sin_[j] * xi[j];
        }
        p0 *= 2.0 / u;
        p1 *= 2.0 / u;
        dw[0] += dyo[0] * p0 + dyo[1] * p1;
        dw[1] += -dyo[0] * p1 + dyo[1] * p0;
        double dp0 = w[0] * dyo[0] + w[1] * dyo[1];
        double dp1 = -w[1] * dyo[0] + w[0] * dyo[1];
        for (int j = 0; j < u; ++j)
          dxi[j] += (2.0 / u) * (cos_[j] * dp0 + sin_[j] * dp1);
        break;
      }
    }
  }
  if (bias_) {
    double* dpb = dp + weight_params_;
    for (size_t i = 0; i < bias_slots_.size(); ++i) {
      auto [off, kind] = bias_slots_[i];
      if (kind == 0) dpb[i] += dy[off];
      else
        for (int j = 0; j < u; ++j) dpb[i] += dy[off + j];
    }
  }
}

void EquivariantLinear::init_params(Rng& rng, double* p) const {
  double bound = std::sqrt(1.0 / std::max(1, in_type_.total_dim()));
  for (int i = 0; i < weight_params_; ++i) p[i] = rng.uniform(-bound, bound);
  for (int i = weight_params_; i < n_params_; ++i) p[i] = 0.0;
}

void time_features(double t, int freqs, double* out) {
  for (int k = 0; k < freqs; ++k) {
    double w = M_PI * (k + 1) * t;
    out[2 * k] = std::sin(w);
    out[2 * k + 1] = std::cos(w);
  }
}

// ---------------------------------------------------------------------------
// VelocityField

struct VelocityField::TapeImpl : Tape {
  double t = 0.0;
  bool fresh = false;
  std::vector<double> x_in, o_in, tfeat;
  std::vector<double> obs_pre, act_pre;
  std::vector<double> z0;                       // core input (concat)
  std::vector<std::vector<double>> core_pre;    // per core layer, pre-nonlin
  std::vector<std::vector<double>> core_out;    // post nonlin (+ residual)
};

VelocityField::VelocityField(NetConfig cfg)
    : cfg_(std::move(cfg)),
      traj_rep_(cfg_.action_rep.repeated(cfg_.steps)) {
  const int u = cfg_.order;
  if (cfg_.obs_rep.order != u || cfg_.action_rep.order != u)
    throw std::invalid_argument("VelocityField: rep group order mismatch");
  if (cfg_.hidden.empty())
    throw std::invalid_argument("VelocityField: need at least one hidden layer");

  layers_.emplace_back(cfg_.obs_rep, rep_regular_channels(u, cfg_.d_obs));
  layers_.emplace_back(traj_rep_, rep_regular_channels(u, cfg_.d_act));

  RepSpec z_rep = rep_regular_channels(u, cfg_.d_obs + cfg_.d_act);
  for (int i = 0; i < 2 * cfg_.time_freqs; ++i)
    z_rep.blocks.push_back(BlockType::Trivial);

  int prev = -1;  // channels of previous core output; -1 = mixed z input
  RepSpec in_rep = z_rep;
  for (size_t i = 0; i < cfg_.hidden.size(); ++i) {
    int h = cfg_.hidden[i];
    layers_.emplace_back(in_rep, rep_regular_channels(u, h));
    residual_.push_back(prev == h);
    in_rep = rep_regular_channels(u, h);
    prev = h;
  }
  n_core_ = (int)cfg_.hidden.size();
  layers_.emplace_back(in_rep, traj_rep_);

  int total = 0;
  for (const auto& l : layers_) {
    offsets_.push_back(total);
    total += l.param_count();
  }
  params_.assign(total, 0.0);
  grads_.assign(total, 0.0);
}

std::unique_ptr<Tape> VelocityField::make_tape() const {
  auto t = std::make_unique<TapeImpl>();
  t->x_in.resize(traj_dim());
  t->o_in.resize(obs_dim());
  t->tfeat.resize(2 * cfg_.time_freqs);
  t->obs_pre.resize(layers_[0].out_type().total_dim());
  t->act_pre.resize(layers_[1].out_type().total_dim());
  t->z0.resize(t->obs_pre.size() + t->act_pre.size() + t->tfeat.size());
  t->core_pre.resize(n_core_);
  t->core_out.resize(n_core_);
  for (int i = 0; i < n_core_; ++i) {
    int d = layers_[2 + i].out_type().total_dim();
    t->core_pre[i].resize(d);
    t->core_out[i].resize(d);
  }
  return t;
}

void VelocityField::forward(Tape& tape, double t, const double* x,
                            const double* o, double* out) const {
  if (t < 0.0 || t > 1.0)
    throw std::domain_error("VelocityField: t outside [0,1]");
  auto& tp = dynamic_cast<TapeImpl&>(tape);
  tp.t = t;
  std::copy(x, x + traj_dim(), tp.x_in.begin());
  std::copy(o, o + obs_dim(), tp.o_in.begin());
  time_features(t, cfg_.time_freqs, tp.tfeat.data());

  const double* p = params_.data();
  layers_[0].forward(p + offsets_[0], tp.o_in.data(), tp.obs_pre.data());
  layers_[1].forward(p + offsets_[1], tp.x_in.data(), tp.act_pre.data());

  size_t off = 0;
  for (double v : tp.obs_pre) tp.z0[off++] = elu(v);
  for (double v : tp.act_pre) tp.z0[off++] = elu(v);
  for (double v : tp.tfeat) tp.z0[off++] = v;

  const double* in = tp.z0.data();
  for (int i = 0; i < n_core_; ++i) {
    layers_[2 + i].forward(p + offsets_[2 + i], in, tp.core_pre[i].data());
    auto& outv = tp.core_out[i];
    for (size_t j = 0; j < outv.size(); ++j) outv[j] = elu(tp.core_pre[i][j]);
    if (residual_[i])
      for (size_t j = 0; j < outv.size(); ++j) outv[j] += in[j];
    in = outv.data();
  }
  layers_.back().forward(p + offsets_.back(), in, out);
  tp.fresh = true;
}

void VelocityField::backward(Tape& tape, const double* upstream) {
  auto& tp = dynamic_cast<TapeImpl&>(tape);
  if (!tp.fresh)
    throw std::logic_error("VelocityField: backward without forward");
  const double* p = params_.data();
  double* g = grads_.data();

  const double* dec_in =
      n_core_ > 0 ? tp.core_out[n_core_ - 1].data() : tp.z0.data();
  std::vector<double> d_cur(layers_.back().in_type().total_dim());
  layers_.back().backward(p + offsets_.back(), dec_in, upstream, d_cur.data(),
                          g + offsets_.back());

  for (int i = n_core_ - 1; i >= 0; --i) {
    const double* in =
        i > 0 ? tp.core_out[i - 1].data() : tp.z0.data();
    // d_cur is the cotangent of core_out[i]
    std::vector<double> d_pre(tp.core_pre[i].size());
    for (size_t j = 0; j < d_pre.size(); ++j)
      d_pre[j] = d_cur[j] * elu_grad(tp.core_pre[i][j]);
    std::vector<double> d_in(layers_[2 + i].in_type().total_dim());
    layers_[2 + i].backward(p + offsets_[2 + i], in, d_pre.data(), d_in.data(),
                            g + offsets_[2 + i]);
    if (residual_[i])
      for (size_t j = 0; j < d_in.size(); ++j) d_in[j] += d_cur[j];
    d_cur = std::move(d_in);
  }

  // split the z0 cotangent back into the two encoders (time path has no params
  // upstream of the core, so its share is dropped)
  size_t n_obs = tp.obs_pre.size(), n_act = tp.act_pre.size();
  std::vector<double> d_obs(n_obs), d_act(n_act);
  for (size_t j = 0; j < n_obs; ++j)
    d_obs[j] = d_cur[j] * elu_grad(tp.obs_pre[j]);
  for (size_t j = 0; j < n_act; ++j)
    d_act[j] = d_cur[n_obs + j] * elu_grad(tp.act_pre[j]);
  std::vector<double> scratch_o(obs_dim()), scratch_x(traj_dim());
  layers_[0].backward(p + offsets_[0], tp.o_in.data(), d_obs.data(),
                      scratch_o.data(), g + offsets_[0]);
  layers_[1].backward(p + offsets_[1], tp.x_in.data(), d_act.data(),
                      scratch_x.data(), g + offsets_[1]);
}

void VelocityField::eval(double t, const double* x, const double* o,
                         double* out) const {
  auto tape = make_tape();
  forward(*tape, t, x, o, out);
}

void VelocityField::init_params(Rng& rng) {
  for (size_t i = 0; i < layers_.size(); ++i)
    layers_[i].init_params(rng, params_.data() + offsets_[i]);
}

// ---------------------------------------------------------------------------
// DenseField

struct DenseField::TapeImpl : Tape {
  bool fresh = false;
  std::vector<double> in;                     // [tfeat, x, o]
  std::vector<std::vector<double>> pre, act;  // per layer
};

DenseField::DenseField(int traj_dim, int obs_dim, int time_freqs,
                       std::vector<int> hidden)
    : traj_dim_(traj_dim),
      obs_dim_(obs_dim),
      time_freqs_(time_freqs),
      hidden_(std::move(hidden)) {
  int in_dim = 2 * time_freqs_ + traj_dim_ + obs_dim_;
  int prev = in_dim;
  int total = 0;
  for (int h : hidden_) {
    in_dims_.push_back(prev);
    out_dims_.push_back(h);
    offsets_.push_back(total);
    total += h * (prev + 1);
    prev = h;
  }
  in_dims_.push_back(prev);
  out_dims_.push_back(traj_dim_);
  offsets_.push_back(total);
  total += traj_dim_ * (prev + 1);
  params_.assign(total, 0.0);
  grads_.assign(total, 0.0);
}

std::unique_ptr<Tape> DenseField::make_tape() const {
  auto t = std::make_unique<TapeImpl>();
  t->in.resize(2 * time_freqs_ + traj_dim_ + obs_dim_);
  t->pre.resize(out_dims_.size());
  t->act.resize(out_dims_.size());
  for (size_t i = 0; i < out_dims_.size(); ++i) {
    t->pre[i].resize(out_dims_[i]);
    t->act[i].resize(out_dims_[i]);
  }
  return t;
}

void DenseField::forward(Tape& tape, double t, const double* x, const double* o,
                         double* out) const {
  if (t < 0.0 || t > 1.0)
    throw std::domain_error("DenseField: t outside [0,1]");
  auto& tp = dynamic_cast<TapeImpl&>(tape);
  time_features(t, time_freqs_, tp.in.data());
  std::copy(x, x + traj_dim_, tp.in.begin() + 2 * time_freqs_);
  std::copy(o, o + obs_dim_, tp.in.begin() + 2 * time_freqs_ + traj_dim_);

  const double* in = tp.in.data();
  size_t n_layers = out_dims_.size();
  for (size_t l = 0; l < n_layers; ++l) {
    const double* w = params_.data() + offsets_[l];
    const double* b = w + (size_t)out_dims_[l] * in_dims_[l];
    for (int i = 0; i < out_dims_[l]; ++i) {
      double acc = b[i];
      const double* wi = w + (size_t)i * in_dims_[l];
      for (int j = 0; j < in_dims_[l]; ++j) acc += wi[j] * in[j];
      tp.pre[l][i] = acc;
      tp.act[l][i] = (l + 1 < n_layers) ? elu(acc) : acc;
    }
    in = tp.act[l].data();
  }
  std::copy(tp.act.back().begin(), tp.act.back().end(), out);
  tp.fresh = true;
}

void DenseField::backward(Tape& tape, const double* upstream) {
  auto& tp = dynamic_cast<TapeImpl&>(tape);
  if (!tp.fresh) throw std::logic_error("DenseField: backward without forward");
  size_t n_layers = out_dims_.size();
  std::vector<double> d_out(upstream, upstream + traj_dim_);
  for (int l = (int)n_layers - 1; l >= 0; --l) {
    const double* in = l > 0 ? tp.act[l - 1].data() : tp.in.data();
    const double* w = params_.data() + offsets_[l];
    double* gw = grads_.data() + offsets_[l];
    double* gb = gw + (size_t)out_dims_[l] * in_dims_[l];
    std::vector<double> d_pre(out_dims_[l]);
    for (int i = 0; i < out_dims_[l]; ++i)
      d_pre[i] = (l + 1 < (int)n_layers) ? d_out[i] * elu_grad(tp.pre[l][i])
                                         : d_out[i];
    std::vector<double> d_in(in_dims_[l], 0.0);
    for (int i = 0; i < out_dims_[l]; ++i) {
      gb[i] += d_pre[i];
      const double* wi = w + (size_t)i * in_dims_[l];
      double* gwi = gw + (size_t)i * in_dims_[l];
      for (int j = 0; j < in_dims_[l]; ++j) {
        gwi[j] += d_pre[i] * in[j];
        d_in[j] += wi[j] * d_pre[i];
      }
    }
    d_out = std::move(d_in);
  }
}

void DenseField::eval(double t, const double* x, const double* o,
                      double* out) const {
  auto tape = make_tape();
  forward(*tape, t, x, o, out);
}

void DenseField::init_params(Rng& rng) {
  for (size_t l = 0; l < out_dims_.size(); ++l) {
    double bound = std::sqrt(1.0 / in_dims_[l]);
    double* w = params_.data() + offsets_[l];
    size_t nw = (size_t)out_dims_[l] * in_dims_[l];
    for (size_t i = 0; i < nw; ++i) w[i] = rng.uniform(-bound, bound);
    for (int i = 0; i < out_dims_[l]; ++i) w[nw + i] = 0.0;
  }
}

int matched_dense_width(int traj_dim, int obs_dim, int time_freqs,
                        int target_params) {
  int in_dim = 2 * time_freqs + traj_dim + obs_dim;
  // params(w) = w*(in+1) + w*(w+1) + traj*(w+1)
  int best = 1;
  for (int w = 1; w < 4096; ++w) {
    long p = (long)w * (in_dim + 1) + (long)w * (w + 1) +
             (long)traj_dim * (w + 1);
    if (p <= target_params) best = w;
    else break;
  }
  return best;
}

}  // namespace equiflow
