#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "equiflow/group.hpp"
#include "equiflow/rng.hpp"
#include "equiflow/toybench.hpp"

using namespace equiflow;

namespace {

double inf_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("6d orientation encoding round-trips through the decoder") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    // random rotation from a random axis-angle via two 6d decodes
    double v[6];
    for (double& x : v) x = rng.normal();
    double R[9], v2[6], R2[9];
    gram_schmidt_6d(v, R);
    rot_to_6d(R, v2);
    gram_schmidt_6d(v2, R2);
    for (int i = 0; i < 9; ++i) CHECK(R[i] == doctest::Approx(R2[i]).epsilon(1e-12));
    // orthonormality
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += R[i * 3 + k] * R[j * 3 + k];
        CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      }
    // right-handed
    double det = R[0] * (R[4] * R[8] - R[5] * R[7]) -
                 R[1] * (R[3] * R[8] - R[5] * R[6]) +
                 R[2] * (R[3] * R[7] - R[4] * R[6]);
    CHECK(det == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("geodesic angle and partial rotation toward a goal") {
  double I[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  double axis[3] = {0, 0, 1};
  // rotation by 1.0 rad about z
  double Rz[9] = {std::cos(1.0), -std::sin(1.0), 0,
                  std::sin(1.0), std::cos(1.0),  0,
                  0,             0,              1};
  (void)axis;
  CHECK(rot_geodesic_angle(I, Rz) == doctest::Approx(1.0).epsilon(1e-12));
  double half[9];
  rot_slerp_toward(I, Rz, 0.5, half);
  CHECK(rot_geodesic_angle(I, half) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(rot_geodesic_angle(half, Rz) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("environment dynamics and observations commute with the group") {
  for (const char* name : {"reach2d", "pose10d"}) {
    auto env = make_env(name, 8);
    RepSpec srep = env->state_rep(), arep = env->action_rep(),
            orep = env->obs_step_rep();
    Rng rng(11);
    GroupSpec spec(8);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> s(env->state_dim()), a(env->action_dim());
      env->reset(rng, s.data());
      env->expert_action(s.data(), a.data());
      for (int k = 0; k < 8; ++k) {
        GroupElement g(k, spec);
        std::vector<double> gs = act(srep, g, s), ga = act(arep, g, a);
        std::vector<double> n1(env->state_dim()), n2(env->state_dim());
        env->step(s.data(), a.data(), n1.data());
        env->step(gs.data(), ga.data(), n2.data());
        CHECK(inf_diff(act(srep, g, n1), n2) < 1e-9);

        std::vector<double> o1(env->obs_step_dim()), o2(env->obs_step_dim());
        env->observe(s.data(), 3, o1.data());
        env->observe(gs.data(), 3, o2.data());
        CHECK(inf_diff(act(orep, g, o1), o2) < 1e-10);

        // success is invariant
        CHECK(env->success(s.data()) == env->success(gs.data()));
      }
    }
  }
}

TEST_CASE("the scripted expert completes both tasks from random starts") {
  for (const char* name : {"reach2d", "pose10d"}) {
    auto env = make_env(name, 8);
    int wins = 0;
    const int episodes = 25;
    for (int e = 0; e < episodes; ++e) {
      ExpertPolicy expert(*env, 8);
      EpisodeResult r = run_episode(*env, expert, 8, 1000 + e);
      CHECK_FALSE(r.aborted);
      wins += r.success ? 1 : 0;
    }
    CHECK(wins == episodes);
  }
}

TEST_CASE("expert carries a deliberate fixed-frame bias") {
  auto env = make_env("reach2d", 8);
  RepSpec srep = env->state_rep(), arep = env->action_rep();
  Rng rng(17);
  std::vector<double> s(env->state_dim()), a(env->action_dim());
  env->reset(rng, s.data());
  env->expert_action(s.data(), a.data());
  GroupElement g(2, GroupSpec(8));
  std::vector<double> gs = act(srep, g, s), ga(env->action_dim());
  env->expert_action(gs.data(), ga.data());
  CHECK(inf_diff(act(arep, g, a), ga) > 0.0);  // not exactly equivariant
}

TEST_CASE("demo datasets round-trip through disk byte for byte") {
  auto env = make_env("reach2d", 8);
  DemoDataset d = make_demo_dataset(*env, 3, 42, 4);
  CHECK(d.count() == 3 * env->horizon());
  CHECK(d.obs_dim == env->obs_dim());
  CHECK(d.traj_dim == 4 * env->action_dim());

  std::string path = "/tmp/equiflow_test_dataset.bin";
  d.save(path);
  DemoDataset d2 = DemoDataset::load(path);
  CHECK(d2.env == d.env);
  CHECK(d2.order == d.order);
  CHECK(d2.seed == d.seed);
  CHECK(d2.obs == d.obs);
  CHECK(d2.traj == d.traj);
  std::remove(path.c_str());
}

TEST_CASE("training batches draw valid rows and times") {
  auto env = make_env("reach2d", 8);
  DemoDataset d = make_demo_dataset(*env, 2, 7, 4);
  Rng rng(9);
  const double dt = 0.05;
  FlowBatch b = make_batch(d, 32, dt, rng);
  CHECK(b.traj_dim == d.traj_dim);
  CHECK(b.obs_dim == d.obs_dim);
  for (double t : b.t) {
    CHECK(t >= 0.0);
    CHECK(t <= 1.0 - dt);
  }
  // every x1 row is a dataset row
  for (int i = 0; i < b.size; ++i) {
    bool found = false;
    for (int r = 0; r < d.count() && !found; ++r) {
      double diff = 0.0;
      for (int j = 0; j < b.traj_dim; ++j)
        diff += std::abs(b.x1[(size_t)i * b.traj_dim + j] -
                         d.traj[(size_t)r * d.traj_dim + j]);
      found = diff == 0.0;
    }
    CHECK(found);
  }
}

TEST_CASE("oracle velocity transports the start marginal onto the end marginal") {
  GaussianFlowOracle oracle({1.2, -0.4}, {0.25, 2.0});
  // exact affine transport from t to t+dt must map marginal moments onto
  // the closed-form marginal at t+dt
  for (double t : {0.0, 0.2, 0.55}) {
    double dt = 0.3;
    std::vector<double> m(2), c(2), mean0(2), var0(2), mean1(2), var1(2);
    oracle.flow_map(t, dt, m.data(), c.data());
    oracle.marginal(t, mean0.data(), var0.data());
    oracle.marginal(t + dt, mean1.data(), var1.data());
    for (int i = 0; i < 2; ++i) {
      CHECK(m[i] * mean0[i] + c[i] == doctest::Approx(mean1[i]).epsilon(1e-8));
      CHECK(m[i] * m[i] * var0[i] == doctest::Approx(var1[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("oracle velocity is the conditional expectation of path velocities") {
  GaussianFlowOracle oracle({0.7}, {1.69});
  // E || u*(t, x_t) - (x1 - x0) ||^2 over conditional pairs equals the
  // conditional variance -- the residual with the best predictor
  Rng rng(21);
  const double t = 0.4;
  const int n = 400000;
  double x0, x1, xt, u, acc = 0.0;
  for (int i = 0; i < n; ++i) {
    oracle.sample_prior(rng, &x0);
    oracle.sample_data(rng, &x1);
    xt = (1 - t) * x0 + t * x1;
    oracle.eval(t, &xt, nullptr, &u);
    double d = u - (x1 - x0);
    acc += d * d;
  }
  double v;
  oracle.cond_var(t, &v);
  CHECK(acc / n == doctest::Approx(v).epsilon(0.02));
}

TEST_CASE("oracle marginal statistics match monte-carlo draws") {
  GaussianFlowOracle oracle({2.0}, {0.36});
  Rng rng(23);
  const double t = 0.65;
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x0, x1;
    oracle.sample_prior(rng, &x0);
    oracle.sample_data(rng, &x1);
    double xt = (1 - t) * x0 + t * x1;
    sum += xt;
    sum2 += xt * xt;
  }
  double mean, var;
  oracle.marginal(t, &mean, &var);
  double m = sum / n;
  CHECK(m == doctest::Approx(mean).epsilon(0.02));
  CHECK(sum2 / n - m * m == doctest::Approx(var).epsilon(0.02));
}
