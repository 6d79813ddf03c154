#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "equiflow/group.hpp"
#include "equiflow/net.hpp"
#include "equiflow/rng.hpp"
#include "equiflow/verify.hpp"

using namespace equiflow;

namespace {

using B = BlockType;

// max over all g of ||L(g.x) - g.L(x)||_inf for random x
double layer_defect(const EquivariantLinear& layer, const double* p, Rng& rng) {
  const RepSpec& in = layer.in_type();
  const RepSpec& out = layer.out_type();
  const int di = in.total_dim(), dout = out.total_dim();
  std::vector<double> x(di), gx(di), y(dout), gy(dout), ygx(dout);
  for (int i = 0; i < di; ++i) x[i] = rng.normal();
  layer.forward(p, x.data(), y.data());
  double worst = 0.0;
  for (int k = 0; k < in.order; ++k) {
    GroupElement g(k, GroupSpec(in.order));
    act(in, g, x.data(), gx.data());
    layer.forward(p, gx.data(), ygx.data());
    act(out, g, y.data(), gy.data());
    for (int i = 0; i < dout; ++i)
      worst = std::max(worst, std::abs(ygx[i] - gy[i]));
  }
  return worst;
}

NetConfig tiny_config() {
  NetConfig cfg;
  cfg.order = 4;
  cfg.steps = 2;
  cfg.obs_rep = RepSpec(4, {B::Standard, B::Trivial});
  cfg.action_rep = RepSpec(4, {B::Standard});
  cfg.d_obs = 1;
  cfg.d_act = 1;
  cfg.time_freqs = 2;
  cfg.hidden = {2};
  return cfg;
}

// scalar objective <w, net(t, x, o)> with fixed weights, for gradient checks
double weighted_output(TrainableField& net, const std::vector<double>& w,
                       double t, const double* x, const double* o) {
  std::vector<double> out(net.traj_dim());
  auto tape = net.make_tape();
  net.forward(*tape, t, x, o, out.data());
  double s = 0.0;
  for (int i = 0; i < net.traj_dim(); ++i) s += w[i] * out[i];
  return s;
}

double max_grad_error(TrainableField& net) {
  Rng rng(11);
  const int d = net.traj_dim(), od = net.obs_dim();
  std::vector<double> x(d), o(od), w(d);
  for (auto& v : x) v = rng.normal();
  for (auto& v : o) v = rng.normal();
  for (auto& v : w) v = rng.normal();
  const double t = 0.37;

  net.zero_grads();
  std::vector<double> out(d);
  auto tape = net.make_tape();
  net.forward(*tape, t, x.data(), o.data(), out.data());
  net.backward(*tape, w.data());
  std::vector<double> analytic = net.grads();

  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < net.param_count(); ++i) {
    double keep = net.params()[i];
    net.params()[i] = keep + h;
    double fp = weighted_output(net, w, t, x.data(), o.data());
    net.params()[i] = keep - h;
    double fm = weighted_output(net, w, t, x.data(), o.data());
    net.params()[i] = keep;
    worst = std::max(worst, std::abs((fp - fm) / (2 * h) - analytic[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("every block-pair rule gives an exactly equivariant linear map") {
  Rng rng(3);
  std::vector<std::pair<RepSpec, RepSpec>> cases = {
      {RepSpec(8, {B::Trivial}), RepSpec(8, {B::Trivial})},
      {RepSpec(8, {B::Standard}), RepSpec(8, {B::Standard})},
      {RepSpec(8, {B::Regular}), RepSpec(8, {B::Regular})},
      {RepSpec(8, {B::Trivial}), RepSpec(8, {B::Regular})},
      {RepSpec(8, {B::Regular}), RepSpec(8, {B::Trivial})},
      {RepSpec(8, {B::Standard}), RepSpec(8, {B::Regular})},
      {RepSpec(8, {B::Regular}), RepSpec(8, {B::Standard})},
      {RepSpec(6, {B::Trivial, B::Standard, B::Regular}),
       RepSpec(6, {B::Regular, B::Regular, B::Standard, B::Trivial})},
  };
  for (auto& [in, out] : cases) {
    EquivariantLinear layer(in, out, /*bias=*/true);
    std::vector<double> p(layer.param_count());
    layer.init_params(rng, p.data());
    for (auto& v : p) v += 0.1 * rng.normal();  // nonzero biases too
    CHECK(layer_defect(layer, p.data(), rng) < 1e-12);
  }
}

TEST_CASE("inequivalent irreps admit only the zero map") {
  EquivariantLinear ts(RepSpec(8, {B::Trivial}), RepSpec(8, {B::Standard}),
                       false);
  EquivariantLinear st(RepSpec(8, {B::Standard}), RepSpec(8, {B::Trivial}),
                       false);
  CHECK(ts.param_count() == 0);
  CHECK(st.param_count() == 0);
  double x2[2] = {1.5, -2.5}, y1 = 7.0, y2[2] = {7.0, 7.0};
  st.forward(nullptr, x2, &y1);
  CHECK(y1 == 0.0);
  double x1 = 3.0;
  ts.forward(nullptr, &x1, y2);
  CHECK(y2[0] == 0.0);
  CHECK(y2[1] == 0.0);
}

TEST_CASE("delta kernel makes the regular-to-regular block the identity") {
  const int u = 8;
  EquivariantLinear layer(RepSpec(u, {B::Regular}), RepSpec(u, {B::Regular}),
                          false);
  REQUIRE(layer.param_count() == u);
  std::vector<double> p(u, 0.0);
  p[0] = 1.0;
  std::vector<double> x(u), y(u);
  for (int i = 0; i < u; ++i) x[i] = 0.3 * i - 1.0;
  layer.forward(p.data(), x.data(), y.data());
  for (int i = 0; i < u; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-15));
}

TEST_CASE("frequency-1 projection inverts the frequency-1 embedding") {
  const int u = 8;
  EquivariantLinear embed(RepSpec(u, {B::Standard}), RepSpec(u, {B::Regular}),
                          false);
  EquivariantLinear project(RepSpec(u, {B::Regular}), RepSpec(u, {B::Standard}),
                            false);
  REQUIRE(embed.param_count() == 2);
  REQUIRE(project.param_count() == 2);
  double pe[2] = {1.0, 0.0}, pp[2] = {1.0, 0.0};
  double x[2] = {0.8, -1.3};
  std::vector<double> mid(u);
  double back[2];
  embed.forward(pe, x, mid.data());
  project.forward(pp, mid.data(), back);
  CHECK(back[0] == doctest::Approx(x[0]).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(x[1]).epsilon(1e-12));
}

TEST_CASE("layer backward matches central finite differences") {
  Rng rng(5);
  RepSpec in(6, {B::Trivial, B::Standard, B::Regular});
  RepSpec out(6, {B::Regular, B::Standard, B::Trivial});
  EquivariantLinear layer(in, out, true);
  const int np = layer.param_count(), di = in.total_dim(),
            dout = out.total_dim();
  std::vector<double> p(np), x(di), up(dout), dx(di), dp(np, 0.0), y(dout);
  layer.init_params(rng, p.data());
  for (auto& v : x) v = rng.normal();
  for (auto& v : up) v = rng.normal();
  layer.backward(p.data(), x.data(), up.data(), dx.data(), dp.data());

  auto f = [&](const double* pp, const double* xx) {
    layer.forward(pp, xx, y.data());
    double s = 0.0;
    for (int i = 0; i < dout; ++i) s += up[i] * y[i];
    return s;
  };
  const double h = 1e-6;
  for (int i = 0; i < np; ++i) {
    double keep = p[i];
    p[i] = keep + h;
    double fp = f(p.data(), x.data());
    p[i] = keep - h;
    double fm = f(p.data(), x.data());
    p[i] = keep;
    CHECK(std::abs((fp - fm) / (2 * h) - dp[i]) < 1e-7);
  }
  for (int i = 0; i < di; ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double fp = f(p.data(), x.data());
    x[i] = keep - h;
    double fm = f(p.data(), x.data());
    x[i] = keep;
    CHECK(std::abs((fp - fm) / (2 * h) - dx[i]) < 1e-7);
  }
}

TEST_CASE("small velocity field passes a full finite-difference gradient check") {
  VelocityField net(tiny_config());
  Rng rng(7);
  net.init_params(rng);
  CHECK(net.param_count() <= 200);
  CHECK(max_grad_error(net) < 1e-4);
}

TEST_CASE("dense baseline passes the same gradient check") {
  DenseField net(4, 3, 2, {6, 6});
  Rng rng(9);
  net.init_params(rng);
  CHECK(net.param_count() <= 200);
  CHECK(max_grad_error(net) < 1e-4);
}

TEST_CASE("velocity field is equivariant; the dense baseline is not") {
  NetConfig cfg = tiny_config();
  VelocityField net(cfg);
  Rng rng(13);
  net.init_params(rng);
  Rng probe(17);
  RepSpec traj_rep = cfg.action_rep.repeated(cfg.steps);
  CHECK(field_equivariance_defect(net, traj_rep, cfg.obs_rep, 8, probe) <
        1e-12);

  DenseField dense(traj_rep.total_dim(), cfg.obs_rep.total_dim(), 2, {8, 8});
  dense.init_params(rng);
  Rng probe2(17);
  CHECK(field_equivariance_defect(dense, traj_rep, cfg.obs_rep, 8, probe2) >
        1e-3);
}

TEST_CASE("time features are rho0 sinusoids in [0, 1]") {
  std::vector<double> f(6);
  time_features(0.0, 3, f.data());
  CHECK(f[0] == doctest::Approx(0.0));   // sin(0)
  CHECK(f[1] == doctest::Approx(1.0));   // cos(0)
  time_features(0.5, 3, f.data());
  CHECK(f[0] == doctest::Approx(std::sin(M_PI * 0.5)));
  CHECK(f[1] == doctest::Approx(std::cos(M_PI * 0.5)));
}

TEST_CASE("misuse is rejected: bad t, backward without forward") {
  VelocityField net(tiny_config());
  Rng rng(23);
  net.init_params(rng);
  std::vector<double> x(net.traj_dim(), 0.1), o(net.obs_dim(), 0.2),
      out(net.traj_dim());
  CHECK_THROWS_AS(net.eval(-0.1, x.data(), o.data(), out.data()),
                  std::domain_error);
  CHECK_THROWS_AS(net.eval(1.1, x.data(), o.data(), out.data()),
                  std::domain_error);
  auto tape = net.make_tape();
  std::vector<double> up(net.traj_dim(), 1.0);
  CHECK_THROWS_AS(net.backward(*tape, up.data()), std::logic_error);
}
