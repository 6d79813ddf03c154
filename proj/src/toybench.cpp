#include "equiflow/toybench.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace equiflow {

// ---------------------------------------------------------------------------
// rotation helpers

void rot_to_6d(const double* R, double* v6) {
  for (int j = 0; j < 3; ++j) {
    v6[2 * j] = R[0 * 3 + j];
    v6[2 * j + 1] = R[1 * 3 + j];
  }
}

void gram_schmidt_6d(const double* v6, double* R) {
  double r1[3] = {v6[0], v6[2], v6[4]};
  double r2[3] = {v6[1], v6[3], v6[5]};
  double n1 = std::sqrt(r1[0] * r1[0] + r1[1] * r1[1] + r1[2] * r1[2]);
  if (n1 < 1e-12) {
    r1[0] = 1.0;
    n1 = 1.0;
  }
  for (int i = 0; i < 3; ++i) r1[i] /= n1;
  double dot = r1[0] * r2[0] + r1[1] * r2[1] + r1[2] * r2[2];
  for (int i = 0; i < 3; ++i) r2[i] -= dot * r1[i];
  double n2 = std::sqrt(r2[0] * r2[0] + r2[1] * r2[1] + r2[2] * r2[2]);
  if (n2 < 1e-12) {
    // pick any unit vector orthogonal to r1
    double tmp[3] = {0.0, 1.0, 0.0};
    if (std::abs(r1[1]) > 0.9) {
      tmp[1] = 0.0;
      tmp[2] = 1.0;
    }
    double d = r1[0] * tmp[0] + r1[1] * tmp[1] + r1[2] * tmp[2];
    for (int i = 0; i < 3; ++i) r2[i] = tmp[i] - d * r1[i];
    n2 = std::sqrt(r2[0] * r2[0] + r2[1] * r2[1] + r2[2] * r2[2]);
  }
  for (int i = 0; i < 3; ++i) r2[i] /= n2;
  double r3[3] = {r1[1] * r2[2] - r1[2] * r2[1], r1[2] * r2[0] - r1[0] * r2[2],
                  r1[0] * r2[1] - r1[1] * r2[0]};
  for (int i = 0; i < 3; ++i) {
    R[0 * 3 + i] = r1[i];
    R[1 * 3 + i] = r2[i];
    R[2 * 3 + i] = r3[i];
  }
}

double rot_geodesic_angle(const double* Ra, const double* Rb) {
  // angle of Ra^T Rb
  double tr = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr += Ra[j * 3 + i] * Rb[j * 3 + i] * (i == j ? 0 : 0);
  tr = 0.0;
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += Ra[j * 3 + k] * Rb[j * 3 + k];
    tr += s;
  }
  double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

static void axis_angle_of(const double* R, double axis[3], double& angle) {
  double tr = R[0] + R[4] + R[8];
  double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  angle = std::acos(c);
  if (angle < 1e-9) {
    axis[0] = 1.0;
    axis[1] = axis[2] = 0.0;
    return;
  }
  double s = 2.0 * std::sin(angle);
  axis[0] = (R[7] - R[5]) / s;
  axis[1] = (R[2] - R[6]) / s;
  axis[2] = (R[3] - R[1]) / s;
  double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (n > 1e-12)
    for (int i = 0; i < 3; ++i) axis[i] /= n;
}

static void rodrigues(const double axis[3], double angle, double* R) {
  double c = std::cos(angle), s = std::sin(angle), v = 1.0 - c;
  double x = axis[0], y = axis[1], z = axis[2];
  R[0] = c + x * x * v;
  R[1] = x * y * v - z * s;
  R[2] = x * z * v + y * s;
  R[3] = y * x * v + z * s;
  R[4] = c + y * y * v;
  R[5] = y * z * v - x * s;
  R[6] = z * x * v - y * s;
  R[7] = z * y * v + x * s;
  R[8] = c + z * z * v;
}

void rot_slerp_toward(const double* R, const double* R_goal, double frac,
                      double* out) {
  // out = R * exp(frac * log(R^T R_goal))
  double rel[9];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += R[k * 3 + i] * R_goal[k * 3 + j];
      rel[i * 3 + j] = s;
    }
  double axis[3], angle;
  axis_angle_of(rel, axis, angle);
  double step[9];
  rodrigues(axis, frac * angle, step);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += R[i * 3 + k] * step[k * 3 + j];
      out[i * 3 + j] = s;
    }
}

// ---------------------------------------------------------------------------
// reach2d

namespace {

// state: [px, py, qx, qy, mode]; mode in {-1, +1} picks the arc direction of
// the expert and is hidden from the observation, so the demonstrated action
// distribution at reset is bimodal.
class Reach2dEnv : public Env {
 public:
  explicit Reach2dEnv(int order) : order_(order) {}

  std::string name() const override { return "reach2d"; }
  RepSpec state_rep() const override {
    using B = BlockType;
    return RepSpec(order_, {B::Standard, B::Standard, B::Trivial});
  }
  RepSpec obs_step_rep() const override {
    using B = BlockType;
    return RepSpec(order_, {B::Standard, B::Standard, B::Trivial});
  }
  RepSpec action_rep() const override {
    return RepSpec(order_, {BlockType::Standard});
  }
  int horizon() const override { return 20; }
  int obs_hist() const override { return 2; }

  void reset(Rng& rng, double* s) const override {
    reset_impl(rng, s, 2.0 * M_PI);
  }

  // demos come from one quarter of the workspace; evaluation uses the full
  // circle, so orientation generalization is not present in the data
  void reset_demo(Rng& rng, double* s) const override {
    reset_impl(rng, s, 0.5 * M_PI);
  }

  void step(const double* s, const double* a, double* next) const override {
    next[0] = s[0] + kStep * a[0];
    next[1] = s[1] + kStep * a[1];
    next[2] = s[2];
    next[3] = s[3];
    next[4] = s[4];
  }

  void observe(const double* s, int step_idx, double* o) const override {
    o[0] = s[0];
    o[1] = s[1];
    o[2] = s[2];
    o[3] = s[3];
    o[4] = (double)step_idx / horizon();
  }

  bool success(const double* s) const override {
    double dx = s[2] - s[0], dy = s[3] - s[1];
    return std::sqrt(dx * dx + dy * dy) < kRadius;
  }

  void expert_action(const double* s, double* a) const override {
    double ex = s[2] - s[0], ey = s[3] - s[1];
    double mode = s[4];
    // proportional pull + mode-dependent tangential arc whose strength grows
    // with distance (quadratic in e, so the map is genuinely nonlinear) +
    // a small fixed-frame bias
    double r = std::sqrt(ex * ex + ey * ey);
    double arc = kArc * mode * r;
    a[0] = kGain * ex + arc * (-ey) + kBias * std::min(r, 1.0);
    a[1] = kGain * ey + arc * ex;
  }

  void reset_impl(Rng& rng, double* s, double max_angle) const {
    double ang = rng.uniform(0.0, max_angle);
    double rad = rng.uniform(0.7, 1.0);
    s[0] = 0.05 * rng.normal();
    s[1] = 0.05 * rng.normal();
    s[2] = rad * std::cos(ang);
    s[3] = rad * std::sin(ang);
    s[4] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }

  static constexpr double kStep = 0.25;
  static constexpr double kRadius = 0.045;
  static constexpr double kGain = 1.0;
  static constexpr double kArc = 0.8;
  static constexpr double kBias = 0.05;

 private:
  int order_;
};

// state: [agent pose10, goal pose10]; pose10 = 6D orientation + xyz + gripper.
class Pose10dEnv : public Env {
 public:
  explicit Pose10dEnv(int order) : order_(order) {}

  std::string name() const override { return "pose10d"; }
  RepSpec state_rep() const override {
    RepSpec one = rep_action10(order_);
    return one.repeated(2);
  }
  RepSpec obs_step_rep() const override {
    RepSpec r = rep_action10(order_).repeated(2);
    r.blocks.push_back(BlockType::Trivial);  // phase
    return r;
  }
  RepSpec action_rep() const override { return rep_action10(order_); }
  int horizon() const override { return 32; }
  int obs_hist() const override { return 2; }

  void reset(Rng& rng, double* s) const override {
    double Ra[9], Rg[9];
    random_yaw_tilt(rng, Ra);
    random_yaw_tilt(rng, Rg);
    rot_to_6d(Ra, s);
    double ang = rng.uniform(0.0, 2.0 * M_PI);
    double rad = rng.uniform(0.6, 1.0);
    s[6] = 0.05 * rng.normal();
    s[7] = 0.05 * rng.normal();
    s[8] = 0.3 + 0.1 * rng.normal();  // z
    s[9] = 0.0;                       // gripper
    rot_to_6d(Rg, s + 10);
    s[16] = rad * std::cos(ang);
    s[17] = rad * std::sin(ang);
    s[18] = 0.5;
    s[19] = 1.0;
  }

  void step(const double* s, const double* a, double* next) const override {
    std::copy(s, s + 20, next);
    double R[9];
    gram_schmidt_6d(a, R);  // 6D continuity decode
    rot_to_6d(R, next);
    next[6] = s[6] + kStep * (a[6] - s[6]);
    next[7] = s[7] + kStep * (a[7] - s[7]);
    next[8] = s[8] + kStep * (a[8] - s[8]);
    next[9] = std::clamp(a[9], 0.0, 1.0);
  }

  void observe(const double* s, int step_idx, double* o) const override {
    std::copy(s, s + 20, o);
    o[20] = (double)step_idx / horizon();
  }

  bool success(const double* s) const override {
    double dx = s[16] - s[6], dy = s[17] - s[7], dz = s[18] - s[8];
    if (std::sqrt(dx * dx + dy * dy + dz * dz) >= kRadius) return false;
    double Ra[9], Rg[9];
    gram_schmidt_6d(s, Ra);
    gram_schmidt_6d(s + 10, Rg);
    return rot_geodesic_angle(Ra, Rg) < kAngle;
  }

  void expert_action(const double* s, double* a) const override {
    double Ra[9], Rg[9], Rcmd[9];
    gram_schmidt_6d(s, Ra);
    gram_schmidt_6d(s + 10, Rg);
    rot_slerp_toward(Ra, Rg, 0.35, Rcmd);
    rot_to_6d(Rcmd, a);
    double ex = s[16] - s[6], ey = s[17] - s[7];
    double r = std::sqrt(ex * ex + ey * ey);
    a[6] = s[16] + kBias * std::min(r, 1.0);  // lab-frame bias, not equivariant
    a[7] = s[17];
    a[8] = s[18];
    a[9] = s[19];
  }

  static constexpr double kStep = 0.3;
  static constexpr double kRadius = 0.12;
  static constexpr double kAngle = 0.25;
  static constexpr double kBias = 0.08;

 private:
  static void random_yaw_tilt(Rng& rng, double* R) {
    double yaw = rng.uniform(0.0, 2.0 * M_PI);
    double tilt = rng.uniform(-0.4, 0.4);
    double az[3] = {0, 0, 1}, ay[3] = {0, 1, 0};
    double Rz[9], Ry[9];
    rodrigues(az, yaw, Rz);
    rodrigues(ay, tilt, Ry);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) acc += Rz[i * 3 + k] * Ry[k * 3 + j];
        R[i * 3 + j] = acc;
      }
  }

  int order_;
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name, int group_order) {
  if (name == "reach2d") return std::make_unique<Reach2dEnv>(group_order);
  if (name == "pose10d") return std::make_unique<Pose10dEnv>(group_order);
  throw std::invalid_argument("unknown env: " + name);
}

// ---------------------------------------------------------------------------
// policies and episodes

void ExpertPolicy::predict_chunk(const double* state, const double* /*obs*/,
                                 double* chunk) {
  const int sd = env_.state_dim();
  const int ad = env_.action_dim();
  std::vector<double> s(state, state + sd), nxt(sd);
  for (int i = 0; i < n_; ++i) {
    env_.expert_action(s.data(), chunk + (size_t)i * ad);
    env_.step(s.data(), chunk + (size_t)i * ad, nxt.data());
    s.swap(nxt);
  }
}

void FlowPolicy::predict_chunk(const double* /*state*/, const double* obs,
                               double* chunk) {
  PredictResult res = predict(field_, obs, state_, cfg_, step_dim_);
  std::copy(res.chunk.begin(), res.chunk.end(), chunk);
}

EpisodeResult run_episode(const Env& env, Policy& policy, int n1,
                          std::uint64_t seed) {
  const int sd = env.state_dim();
  const int ad = env.action_dim();
  const int od = env.obs_step_dim();
  const int m = env.obs_hist();
  const int n = policy.chunk_steps();

  Rng rng(seed);
  std::vector<double> state(sd), next(sd);
  env.reset(rng, state.data());

  std::vector<double> obs_hist((size_t)m * od);
  std::vector<double> cur_obs(od);
  env.observe(state.data(), 0, cur_obs.data());
  for (int i = 0; i < m; ++i)
    std::copy(cur_obs.begin(), cur_obs.end(), obs_hist.begin() + (size_t)i * od);

  EpisodeResult res;
  std::vector<double> chunk((size_t)n * ad);
  int t = 0;
  while (t < env.horizon()) {
    policy.predict_chunk(state.data(), obs_hist.data(), chunk.data());
    for (double v : chunk)
      if (!std::isfinite(v)) {
        res.aborted = true;
        res.steps = t;
        return res;
      }
    for (int i = 0; i < n1 && t < env.horizon(); ++i, ++t) {
      const double* a = chunk.data() + (size_t)i * ad;
      env.step(state.data(), a, next.data());
      state.swap(next);
      res.executed.insert(res.executed.end(), a, a + ad);
      // shift observation history
      std::copy(obs_hist.begin() + od, obs_hist.end(), obs_hist.begin());
      env.observe(state.data(), t + 1, obs_hist.data() + (size_t)(m - 1) * od);
      if (env.success(state.data())) {
        res.success = true;
        res.steps = t + 1;
        return res;
      }
    }
  }
  res.steps = t;
  return res;
}

SuccessRate success_rate(const Env& env, const PolicyFactory& make_policy,
                         int n1, int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1)
    throw std::invalid_argument("success_rate: need n_episodes >= 1");
  SuccessRate out;
  out.episodes = n_episodes;
  int wins = 0;
  for (int i = 0; i < n_episodes; ++i) {
    auto policy = make_policy(seed + 1000003ULL * i);
    EpisodeResult r = run_episode(env, *policy, n1, seed + 7919ULL * i);
    if (r.success) ++wins;
  }
  out.rate = (double)wins / n_episodes;
  out.stderr_ = std::sqrt(out.rate * (1.0 - out.rate) / n_episodes);
  return out;
}

// ---------------------------------------------------------------------------
// datasets

static constexpr char kDatasetMagic[8] = {'E', 'Q', 'F', 'D', 'A', 'T', 'A', '1'};

void DemoDataset::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(kDatasetMagic, 8);
  auto w32 = [&](int v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto w64 = [&](std::uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); };
  w32((int)env.size());
  f.write(env.data(), (std::streamsize)env.size());
  w32(order);
  w32(obs_hist);
  w32(steps);
  w64(seed);
  w32(obs_dim);
  w32(traj_dim);
  w32(count());
  f.write(reinterpret_cast<const char*>(obs.data()),
          (std::streamsize)(obs.size() * sizeof(double)));
  f.write(reinterpret_cast<const char*>(traj.data()),
          (std::streamsize)(traj.size() * sizeof(double)));
}

DemoDataset DemoDataset::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kDatasetMagic, 8) != 0)
    throw std::runtime_error("bad dataset file: " + path);
  auto r32 = [&]() { int v; f.read(reinterpret_cast<char*>(&v), 4); return v; };
  auto r64 = [&]() { std::uint64_t v; f.read(reinterpret_cast<char*>(&v), 8); return v; };
  DemoDataset d;
  int name_len = r32();
  d.env.resize(name_len);
  f.read(d.env.data(), name_len);
  d.order = r32();
  d.obs_hist = r32();
  d.steps = r32();
  d.seed = r64();
  d.obs_dim = r32();
  d.traj_dim = r32();
  int count = r32();
  d.obs.resize((size_t)count * d.obs_dim);
  d.traj.resize((size_t)count * d.traj_dim);
  f.read(reinterpret_cast<char*>(d.obs.data()),
         (std::streamsize)(d.obs.size() * sizeof(double)));
  f.read(reinterpret_cast<char*>(d.traj.data()),
         (std::streamsize)(d.traj.size() * sizeof(double)));
  if (!f) throw std::runtime_error("truncated dataset file: " + path);
  return d;
}

DemoDataset make_demo_dataset(const Env& env, int n_demos, std::uint64_t seed,
                              int n_steps) {
  DemoDataset d;
  d.env = env.name();
  d.order = env.obs_step_rep().order;
  d.obs_hist = env.obs_hist();
  d.steps = n_steps;
  d.seed = seed;
  d.obs_dim = env.obs_dim();
  d.traj_dim = n_steps * env.action_dim();

  const int sd = env.state_dim();
  const int ad = env.action_dim();
  const int od = env.obs_step_dim();
  const int m = env.obs_hist();
  const int T = env.horizon();

  for (int demo = 0; demo < n_demos; ++demo) {
    Rng rng(seed + 1000003ULL * demo);
    std::vector<double> state(sd), next(sd);
    env.reset_demo(rng, state.data());
    // roll the expert for horizon + n steps so every start index has a full
    // future chunk
    int total = T + n_steps;
    std::vector<double> actions((size_t)total * ad);
    std::vector<double> obs_steps((size_t)(total + 1) * od);
    env.observe(state.data(), 0, obs_steps.data());
    for (int t = 0; t < total; ++t) {
      env.expert_action(state.data(), actions.data() + (size_t)t * ad);
      env.step(state.data(), actions.data() + (size_t)t * ad, next.data());
      state.swap(next);
      env.observe(state.data(), std::min(t + 1, T), obs_steps.data() + (size_t)(t + 1) * od);
    }
    for (int t = 0; t < T; ++t) {
      // observation history [t-m+1 .. t], clamped at episode start
      for (int h = 0; h < m; ++h) {
        int idx = std::max(0, t - (m - 1) + h);
        d.obs.insert(d.obs.end(), obs_steps.begin() + (size_t)idx * od,
                     obs_steps.begin() + (size_t)(idx + 1) * od);
      }
      d.traj.insert(d.traj.end(), actions.begin() + (size_t)t * ad,
                    actions.begin() + (size_t)(t + n_steps) * ad);
    }
  }
  return d;
}

FlowBatch make_batch(const DemoDataset& data, int batch_size, double dt,
                     Rng& rng) {
  if (data.count() == 0)
    throw std::runtime_error("make_batch: empty dataset");
  FlowBatch b;
  b.size = batch_size;
  b.traj_dim = data.traj_dim;
  b.obs_dim = data.obs_dim;
  b.dt = dt;
  b.x0.resize((size_t)batch_size * b.traj_dim);
  b.x1.resize((size_t)batch_size * b.traj_dim);
  b.obs.resize((size_t)batch_size * b.obs_dim);
  b.t.resize(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    int idx = (int)rng.below((std::uint64_t)data.count());
    std::copy(data.traj.begin() + (size_t)idx * b.traj_dim,
              data.traj.begin() + (size_t)(idx + 1) * b.traj_dim,
              b.x1.begin() + (size_t)i * b.traj_dim);
    std::copy(data.obs.begin() + (size_t)idx * b.obs_dim,
              data.obs.begin() + (size_t)(idx + 1) * b.obs_dim,
              b.obs.begin() + (size_t)i * b.obs_dim);
    for (int j = 0; j < b.traj_dim; ++j)
      b.x0[(size_t)i * b.traj_dim + j] = rng.normal();
    b.t[i] = rng.uniform(0.0, 1.0 - dt);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Gaussian oracle

GaussianFlowOracle::GaussianFlowOracle(std::vector<double> mu,
                                       std::vector<double> sigma2)
    : mu_(std::move(mu)), s2_(std::move(sigma2)) {
  if (mu_.size() != s2_.size())
    throw std::invalid_argument("GaussianFlowOracle: dim mismatch");
}

void GaussianFlowOracle::coeffs(double t, double* a, double* b) const {
  for (int i = 0; i < dim(); ++i) {
    double denom = (1.0 - t) * (1.0 - t) + t * t * s2_[i];
    a[i] = (t * s2_[i] - (1.0 - t)) / denom;
    b[i] = mu_[i] * (1.0 - a[i] * t);
  }
}

void GaussianFlowOracle::eval(double t, const double* x, const double*,
                              double* out) const {
  std::vector<double> a(dim()), b(dim());
  coeffs(t, a.data(), b.data());
  for (int i = 0; i < dim(); ++i) out[i] = a[i] * x[i] + b[i];
}

void GaussianFlowOracle::cond_var(double t, double* v) const {
  for (int i = 0; i < dim(); ++i) {
    double denom = (1.0 - t) * (1.0 - t) + t * t * s2_[i];
    double cov = t * s2_[i] - (1.0 - t);
    v[i] = (1.0 + s2_[i]) - cov * cov / denom;
  }
}

void GaussianFlowOracle::marginal(double t, double* mean, double* var) const {
  for (int i = 0; i < dim(); ++i) {
    mean[i] = t * mu_[i];
    var[i] = (1.0 - t) * (1.0 - t) + t * t * s2_[i];
  }
}

void GaussianFlowOracle::flow_map(double t0, double dt, double* m, double* c,
                                  int substeps) const {
  const int d = dim();
  std::vector<double> a(d), b(d);
  for (int i = 0; i < d; ++i) {
    m[i] = 1.0;
    c[i] = 0.0;
  }
  double h = dt / substeps;
  auto deriv = [&](double t, const double* mm, const double* cc, double* dm,
                   double* dc) {
    coeffs(t, a.data(), b.data());
    for (int i = 0; i < d; ++i) {
      dm[i] = a[i] * mm[i];
      dc[i] = a[i] * cc[i] + b[i];
    }
  };
  std::vector<double> k1m(d), k1c(d), k2m(d), k2c(d), k3m(d), k3c(d), k4m(d),
      k4c(d), tm(d), tc(d);
  for (int s = 0; s < substeps; ++s) {
    double t = t0 + s * h;
    deriv(t, m, c, k1m.data(), k1c.data());
    for (int i = 0; i < d; ++i) {
      tm[i] = m[i] + 0.5 * h * k1m[i];
      tc[i] = c[i] + 0.5 * h * k1c[i];
    }
    deriv(t + 0.5 * h, tm.data(), tc.data(), k2m.data(), k2c.data());
    for (int i = 0; i < d; ++i) {
      tm[i] = m[i] + 0.5 * h * k2m[i];
      tc[i] = c[i] + 0.5 * h * k2c[i];
    }
    deriv(t + 0.5 * h, tm.data(), tc.data(), k3m.data(), k3c.data());
    for (int i = 0; i < d; ++i) {
      tm[i] = m[i] + h * k3m[i];
      tc[i] = c[i] + h * k3c[i];
    }
    deriv(t + h, tm.data(), tc.data(), k4m.data(), k4c.data());
    for (int i = 0; i < d; ++i) {
      m[i] += h / 6.0 * (k1m[i] + 2 * k2m[i] + 2 * k3m[i] + k4m[i]);
      c[i] += h / 6.0 * (k1c[i] + 2 * k2c[i] + 2 * k3c[i] + k4c[i]);
    }
  }
}

void GaussianFlowOracle::sample_prior(Rng& rng, double* x) const {
  for (int i = 0; i < dim(); ++i) x[i] = rng.normal();
}

void GaussianFlowOracle::sample_data(Rng& rng, double* x) const {
  for (int i = 0; i < dim(); ++i)
    x[i] = mu_[i] + std::sqrt(s2_[i]) * rng.normal();
}

}  // namespace equiflow
