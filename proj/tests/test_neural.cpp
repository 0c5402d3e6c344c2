#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sliceorch/neural.hpp"

using namespace sliceorch;

namespace {

// explicit matrix-by-matrix forward pass, independent of ParamFunction
std::vector<double> forward_oracle(const std::vector<int>& sizes,
                                   const std::vector<double>& params,
                                   std::vector<double> x) {
  size_t p = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    std::vector<std::vector<double>> W(out, std::vector<double>(in));
    for (int o = 0; o < out; ++o)
      for (int i = 0; i < in; ++i) W[o][i] = params[p + o * in + i];
    std::vector<double> b(out);
    for (int o = 0; o < out; ++o) b[o] = params[p + in * out + o];
    p += static_cast<size_t>(in + 1) * out;

    std::vector<double> y(out);
    for (int o = 0; o < out; ++o) {
      y[o] = b[o];
      for (int i = 0; i < in; ++i) y[o] += W[o][i] * x[i];
      if (l + 2 < sizes.size()) y[o] = std::tanh(y[o]);
    }
    x = y;
  }
  return x;
}

double max_grad_rel_err(ParamFunction& f, Rng& rng) {
  std::vector<double> x(f.input_dim()), up(f.output_dim());
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto& v : up) v = rng.uniform(-1.0, 1.0);
  std::vector<double> analytic = f.backward(x, up);

  const double h = 1e-5;
  double worst = 0.0;
  for (size_t j = 0; j < f.params().size(); ++j) {
    double save = f.params()[j];
    f.params()[j] = save + h;
    std::vector<double> yp = f.forward(x);
    f.params()[j] = save - h;
    std::vector<double> ym = f.forward(x);
    f.params()[j] = save;
    double num = 0.0;
    for (int o = 0; o < f.output_dim(); ++o) num += up[o] * (yp[o] - ym[o]);
    num /= 2.0 * h;
    double rel = std::abs(analytic[j] - num) / std::max(1.0, std::abs(num));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

TEST_CASE("parameter layout and count") {
  CHECK(ParamFunction::param_count({2, 3, 2}) == (2 + 1) * 3 + (3 + 1) * 2);
  CHECK_THROWS_AS(ParamFunction({5}), ConfigError);
  CHECK_THROWS_AS(ParamFunction({3, 0, 1}), ConfigError);
}

TEST_CASE("forward pass matches an explicit matrix oracle") {
  Rng rng(21);
  for (auto sizes : {std::vector<int>{2, 3, 2}, {4, 8, 8, 3}, {1, 5, 1}}) {
    ParamFunction f(sizes);
    f.init(rng);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> x(sizes.front());
      for (auto& v : x) v = rng.uniform(-2.0, 2.0);
      auto got = f.forward(x);
      auto want = forward_oracle(sizes, f.params(), x);
      REQUIRE(got.size() == want.size());
      for (size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
  ParamFunction f({3, 2});
  CHECK_THROWS_AS(f.forward({1.0}), DimensionError);
  CHECK_THROWS_AS(f.backward({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}), DimensionError);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(4);
  for (auto sizes : {std::vector<int>{3, 16, 16, 2}, {2, 8, 1}, {6, 4, 4, 4}}) {
    ParamFunction f(sizes);
    f.init(rng);
    CHECK(max_grad_rel_err(f, rng) < 1e-4);
  }
}

TEST_CASE("gaussian log-density matches closed forms") {
  // standard normal at its mean: -0.5 * ln(2*pi)
  CHECK(gaussian_logp({0.0}, {0.0}, {1.0}) == doctest::Approx(-0.9189385332046727));
  // sum over independent dimensions
  double two = gaussian_logp({0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0});
  CHECK(two == doctest::Approx(2.0 * -0.9189385332046727));
  // scaling: logp(x; mu, s) = logp(z)/... explicit value
  double v = gaussian_logp({1.0}, {0.5}, {2.0});
  CHECK(v == doctest::Approx(-0.5 * 0.0625 - std::log(2.0) - 0.9189385332046727));
  CHECK_THROWS_AS(gaussian_logp({0.0}, {0.0, 0.0}, {1.0, 1.0}), DimensionError);

  // gradient identities, verified against finite differences
  std::vector<double> raw = {0.7, -0.3}, mu = {0.1, 0.2}, sd = {0.5, 1.5};
  auto gmu = gaussian_logp_grad_mean(raw, mu, sd);
  auto gls = gaussian_logp_grad_log_std(raw, mu, sd);
  const double h = 1e-6;
  for (size_t i = 0; i < raw.size(); ++i) {
    auto mup = mu, mum = mu;
    mup[i] += h;
    mum[i] -= h;
    double num = (gaussian_logp(raw, mup, sd) - gaussian_logp(raw, mum, sd)) / (2 * h);
    CHECK(gmu[i] == doctest::Approx(num).epsilon(1e-6));

    auto sdp = sd, sdm = sd;
    sdp[i] = std::exp(std::log(sd[i]) + h);
    sdm[i] = std::exp(std::log(sd[i]) - h);
    double numls = (gaussian_logp(raw, mu, sdp) - gaussian_logp(raw, mu, sdm)) / (2 * h);
    CHECK(gls[i] == doctest::Approx(numls).epsilon(1e-6));
  }
}

TEST_CASE("sampled actions have the right moments and are reproducible") {
  Rng init(9);
  GaussianPolicy policy({2, 4, 2}, std::log(0.3), init);
  std::vector<double> state = {0.5, -0.5};
  std::vector<double> mu = policy.mean(state);

  Rng rng(123);
  const int N = 20000;
  std::vector<double> sum(2, 0.0), sq(2, 0.0);
  for (int i = 0; i < N; ++i) {
    SampledAction sa = sample_action(policy, state, rng);
    CHECK(sa.logp == doctest::Approx(gaussian_logp(sa.raw, mu, policy.stds())));
    for (int j = 0; j < 2; ++j) {
      sum[j] += sa.raw[j];
      sq[j] += (sa.raw[j] - mu[j]) * (sa.raw[j] - mu[j]);
    }
  }
  for (int j = 0; j < 2; ++j) {
    CHECK(sum[j] / N == doctest::Approx(mu[j]).epsilon(0.05));
    CHECK(std::sqrt(sq[j] / N) == doctest::Approx(0.3).epsilon(0.05));
  }

  Rng r1(77), r2(77);
  SampledAction a1 = sample_action(policy, state, r1);
  SampledAction a2 = sample_action(policy, state, r2);
  CHECK(a1.raw == a2.raw);
  CHECK(a1.logp == a2.logp);
}

TEST_CASE("exploration clipping bounds every dimension") {
  ExplorationConfig cfg;  // H = 0.5
  auto out = clip_exploration({0.0, 1.0, -1.0}, {2.0, -3.0, 0.1}, cfg);
  CHECK(out[0] == doctest::Approx(0.5));
  CHECK(out[1] == doctest::Approx(0.5));
  CHECK(out[2] == doctest::Approx(-0.9));
  CHECK_THROWS_AS(clip_exploration({0.0}, {0.0, 0.0}, cfg), DimensionError);
  ExplorationConfig bad;
  bad.H = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("projected actions are always capacity-feasible") {
  Rng rng(31);
  for (int rep = 0; rep < 2000; ++rep) {
    int K = 1 + static_cast<int>(rng.next_u64() % 4);
    int D = 1 + static_cast<int>(rng.next_u64() % 4);
    std::vector<double> raw(static_cast<size_t>(K) * D);
    for (auto& v : raw) v = rng.uniform(-8.0, 8.0);
    Matrix shares = project_action(raw, K, D);
    for (double v : shares.data()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (int d = 0; d < D; ++d) {
      double sum = 0.0;
      for (int k = 0; k < K; ++k) sum += shares(k, d);
      CHECK(sum <= 1.0 + 1e-12);
    }
  }
  CHECK_THROWS_AS(project_action({0.0, 0.0}, 3, 1), DimensionError);
}

TEST_CASE("projection is the plain squash when columns stay within capacity") {
  // very negative raws keep every column sum below 1
  std::vector<double> raw = {-2.0, -3.0, -2.5, -4.0};
  Matrix shares = project_action(raw, 2, 2);
  for (int k = 0; k < 2; ++k)
    for (int d = 0; d < 2; ++d)
      CHECK(shares(k, d) ==
            doctest::Approx(1.0 / (1.0 + std::exp(-raw[static_cast<size_t>(k) * 2 + d]))));
}

TEST_CASE("projection backward matches finite differences of a random functional") {
  Rng rng(55);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 60) {
    int K = 1 + static_cast<int>(rng.next_u64() % 3);
    int D = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<double> raw(static_cast<size_t>(K) * D), w(raw.size());
    for (auto& v : raw) v = rng.uniform(-3.0, 3.0);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    // skip raws whose column sums sit on the renormalization boundary
    Matrix s = project_action(raw, K, D);
    bool near_edge = false;
    for (int d = 0; d < D; ++d) {
      double sum = 0.0;
      for (int k = 0; k < K; ++k)
        sum += 1.0 / (1.0 + std::exp(-raw[static_cast<size_t>(k) * D + d]));
      if (std::abs(sum - 1.0) < 1e-3) near_edge = true;
    }
    if (near_edge) continue;
    ++checked;

    auto functional = [&](const std::vector<double>& r) {
      Matrix m = project_action(r, K, D);
      double acc = 0.0;
      for (size_t i = 0; i < w.size(); ++i) acc += w[i] * m.data()[i];
      return acc;
    };
    std::vector<double> analytic = project_action_backward(raw, w, K, D);
    for (size_t j = 0; j < raw.size(); ++j) {
      auto rp = raw, rm = raw;
      rp[j] += h;
      rm[j] -= h;
      double num = (functional(rp) - functional(rm)) / (2 * h);
      CHECK(analytic[j] == doctest::Approx(num).epsilon(1e-5));
    }
  }
}

TEST_CASE("optimizers update correctly and reject non-finite gradients") {
  // Adam's bias-corrected first step has magnitude ~lr in each coordinate
  std::vector<double> params = {1.0, -1.0};
  OptimizerState st;
  CHECK(grad_step(params, {0.5, -2.0}, st, 0.01));
  CHECK(params[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(params[1] == doctest::Approx(-1.0 + 0.01).epsilon(1e-6));
  CHECK(st.step == 1);

  // SGD is the literal rule
  std::vector<double> p2 = {1.0};
  OptimizerState st2;
  CHECK(grad_step(p2, {0.25}, st2, 0.1, OptKind::Sgd));
  CHECK(p2[0] == doctest::Approx(1.0 - 0.025));

  // non-finite gradients leave parameters untouched
  std::vector<double> p3 = {3.0, 4.0};
  OptimizerState st3;
  CHECK_FALSE(grad_step(p3, {1.0, std::nan("")}, st3, 0.1));
  CHECK(p3[0] == 3.0);
  CHECK(p3[1] == 4.0);
  CHECK_FALSE(grad_step(p3, {1.0, INFINITY}, st3, 0.1));
  CHECK(p3[1] == 4.0);

  CHECK_THROWS_AS(grad_step(p3, {1.0}, st3, 0.1), DimensionError);
}

TEST_CASE("checkpoints round-trip and reject foreign or mismatched files") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "sliceorch_ckpt_test.bin";

  Rng rng(2);
  GaussianPolicy policy({3, 8, 2}, std::log(0.3), rng);
  save_policy(path.string(), policy);
  GaussianPolicy back = load_policy(path.string());
  CHECK(back.mean_net.layer_sizes() == policy.mean_net.layer_sizes());
  CHECK(back.mean_net.params() == policy.mean_net.params());
  CHECK(back.log_std == policy.log_std);

  // a pre-shaped target with different sizes must refuse the file
  ParamFunction wrong({3, 4, 2});
  std::vector<double> extra;
  CHECK_THROWS_AS(load_checkpoint(path.string(), wrong, extra), ConfigError);
  fs::remove(path);

  fs::path junk = fs::temp_directory_path() / "sliceorch_ckpt_junk.bin";
  {
    std::FILE* f = std::fopen(junk.string().c_str(), "wb");
    std::fputs("BOGUS FILE CONTENT", f);
    std::fclose(f);
  }
  ParamFunction f2;
  CHECK_THROWS_AS(load_checkpoint(junk.string(), f2, extra), ConfigError);
  fs::remove(junk);
  CHECK_THROWS_AS(load_policy("/nonexistent/ckpt.bin"), ConfigError);
}

TEST_CASE("log_std stays within its clamp range") {
  Rng rng(1);
  GaussianPolicy policy({2, 2}, -9.0, rng);
  for (double v : policy.log_std) CHECK(v == GaussianPolicy::kLogStdMin);
  policy.log_std.assign(2, 7.0);
  policy.clamp_log_std();
  for (double v : policy.log_std) CHECK(v == GaussianPolicy::kLogStdMax);
}
