#include "equiflow/train.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace equiflow {

LambdaSchedule LambdaSchedule::parse(const std::string& name) {
  // "quadratic", "quadratic:0.5", "constant:0.5", "0"
  auto colon = name.find(':');
  std::string kind = name.substr(0, colon);
  double c = colon == std::string::npos ? 1.0 : std::stod(name.substr(colon + 1));
  if (kind == "quadratic") return quadratic(c);
  if (kind == "constant") return constant(c);
  throw std::invalid_argument("unknown lambda variant: " + name);
}

std::string LambdaSchedule::name() const {
  std::string kind = variant == Variant::Quadratic ? "quadratic" : "constant";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", scale);
  return kind + ":" + buf;
}

void conditional_path(const double* x0, const double* x1, double t, int dim,
                      double* out) {
  for (int i = 0; i < dim; ++i) out[i] = (1.0 - t) * x0[i] + t * x1[i];
}

void conditional_velocity(const double* x0, const double* x1, int dim,
                          double* out) {
  for (int i = 0; i < dim; ++i) out[i] = x1[i] - x0[i];
}

double cfm_loss(TrainableField& net, const FlowBatch& batch) {
  const int d = batch.traj_dim;
  std::vector<double> xt(d), u(d), upstream(d);
  auto tape = net.make_tape();
  double loss = 0.0;
  for (int i = 0; i < batch.size; ++i) {
    conditional_path(batch.x0_at(i), batch.x1_at(i), batch.t[i], d, xt.data());
    net.forward(*tape, batch.t[i], xt.data(), batch.obs_at(i), u.data());
    const double* x0 = batch.x0_at(i);
    const double* x1 = batch.x1_at(i);
    for (int j = 0; j < d; ++j) {
      double r = u[j] - (x1[j] - x0[j]);
      loss += r * r;
      upstream[j] = 2.0 * r / batch.size;
    }
    net.backward(*tape, upstream.data());
  }
  return loss / batch.size;
}

double fabo_loss(TrainableField& net, const FlowBatch& batch, bool rescale) {
  const int d = batch.traj_dim;
  const double dt = batch.dt;
  const double scale = rescale ? 1.0 / (dt * dt) : 1.0;
  std::vector<double> xt(d), xt2(d), u1(d), u2(d), up(d);
  auto tape1 = net.make_tape();
  auto tape2 = net.make_tape();
  double loss = 0.0;
  for (int i = 0; i < batch.size; ++i) {
    double t = batch.t[i];
    if (t + dt > 1.0 + 1e-12)
      throw std::domain_error("fabo_loss: t + dt > 1");
    const double* x0 = batch.x0_at(i);
    const double* x1 = batch.x1_at(i);
    conditional_path(x0, x1, t, d, xt.data());
    conditional_path(x0, x1, t + dt, d, xt2.data());
    net.forward(*tape1, t, xt.data(), batch.obs_at(i), u1.data());
    net.forward(*tape2, std::min(t + dt, 1.0), xt2.data(), batch.obs_at(i),
                u2.data());
    for (int j = 0; j < d; ++j) {
      double r = u1[j] - u2[j];
      loss += scale * r * r;
      up[j] = 2.0 * scale * r / batch.size;
    }
    net.backward(*tape1, up.data());
    for (int j = 0; j < d; ++j) up[j] = -up[j];
    net.backward(*tape2, up.data());
  }
  return loss / batch.size;
}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grads) {
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  ++step_count;
  double bc1 = 1.0 - std::pow(beta1, (double)step_count);
  double bc2 = 1.0 - std::pow(beta2, (double)step_count);
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    params[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * params[i]);
  }
}

namespace {

LossReport losses_impl(TrainableField& net, const FlowBatch& batch,
                       const TrainOptions& opts, bool with_grads) {
  const int d = batch.traj_dim;
  const double dt = batch.dt;
  const bool use_fabo = opts.lambda.scale != 0.0;
  const double fscale = opts.rescale_fabo ? 1.0 / (dt * dt) : 1.0;

  std::vector<double> xt(d), xt2(d), u1(d), u2(d), up1(d), up2(d);
  auto tape1 = net.make_tape();
  auto tape2 = net.make_tape();
  LossReport rep;
  for (int i = 0; i < batch.size; ++i) {
    double t = batch.t[i];
    const double* x0 = batch.x0_at(i);
    const double* x1 = batch.x1_at(i);
    const double* o = batch.obs_at(i);
    conditional_path(x0, x1, t, d, xt.data());
    net.forward(*tape1, t, xt.data(), o, u1.data());

    double lam = opts.lambda(t);
    rep.lambda_mean += lam;
    double cfm_i = 0.0;
    for (int j = 0; j < d; ++j) {
      double r = u1[j] - (x1[j] - x0[j]);
      cfm_i += r * r;
      up1[j] = 2.0 * r / batch.size;
    }
    rep.cfm += cfm_i;

    if (use_fabo) {
      if (t + dt > 1.0 + 1e-12)
        throw std::domain_error("train_step: t + dt > 1 with FABO active");
      conditional_path(x0, x1, t + dt, d, xt2.data());
      net.forward(*tape2, std::min(t + dt, 1.0), xt2.data(), o, u2.data());
      double fabo_i = 0.0;
      for (int j = 0; j < d; ++j) {
        double r = u1[j] - u2[j];
        fabo_i += fscale * r * r;
        double w = 2.0 * lam * fscale * r / batch.size;
        up1[j] += w;
        up2[j] = -w;
      }
      rep.fabo += fabo_i;
      rep.total += cfm_i + lam * fabo_i;
      if (with_grads) {
        net.backward(*tape1, up1.data());
        net.backward(*tape2, up2.data());
      }
    } else {
      rep.total += cfm_i;
      if (with_grads) net.backward(*tape1, up1.data());
    }
  }
  rep.cfm /= batch.size;
  rep.fabo /= batch.size;
  rep.total /= batch.size;
  rep.lambda_mean /= batch.size;
  return rep;
}

}  // namespace

LossReport train_step(TrainableField& net, const FlowBatch& batch, AdamW& opt,
                      const TrainOptions& opts) {
  net.zero_grads();
  LossReport rep = losses_impl(net, batch, opts, true);
  if (!std::isfinite(rep.total))
    throw std::runtime_error("train_step: non-finite loss");
  opt.step(net.params(), net.grads());
  return rep;
}

LossReport eval_losses(TrainableField& net, const FlowBatch& batch,
                       const TrainOptions& opts) {
  return losses_impl(net, batch, opts, false);
}

}  // namespace equiflow
