#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mixstyle/common/rng.hpp"
#include "mixstyle/nn/checkpoint.hpp"
#include "mixstyle/nn/gradcheck.hpp"
#include "mixstyle/nn/ops.hpp"
#include "mixstyle/nn/optimizer.hpp"

using namespace mixstyle;
using nn::Tape;
using nn::Var;

TEST_CASE("finite-difference gradient checks pass for every layer") {
  const auto report = nn::gradcheck_suite();
  REQUIRE(report.size() >= 14);
  for (const auto& e : report) {
    INFO(e.name);
    CHECK(e.max_rel_err < 1e-5);
  }
}

TEST_CASE("backward of sum gives ones; backward of sum of squares gives 2x") {
  auto x = nn::make_var<double>({8}, true);
  Rng rng(3);
  for (auto& v : x->v) v = rng.uniform(-1.0, 1.0);

  {
    Tape<double> tape;
    auto s = nn::sum_all(&tape, x);
    tape.backward(s);
    for (double g : x->g) CHECK(g == 1.0);
  }
  x->zero_grad();
  {
    Tape<double> tape;
    auto s = nn::sum_all(&tape, nn::mul(&tape, x, x));
    tape.backward(s);
    for (size_t i = 0; i < x->v.size(); ++i) CHECK(x->g[i] == doctest::Approx(2.0 * x->v[i]));
  }
}

TEST_CASE("backward requires a scalar root") {
  auto x = nn::make_var<double>({4}, true);
  Tape<double> tape;
  auto y = nn::mul(&tape, x, x);
  CHECK_THROWS_AS(tape.backward(y), Error);
}

TEST_CASE("conv1d identity kernels") {
  auto x = nn::make_var<float>({1, 16});
  for (int i = 0; i < 16; ++i) x->v[static_cast<size_t>(i)] = 0.1f * static_cast<float>(i);

  auto w1 = nn::make_var<float>({1, 1, 1});
  w1->v[0] = 1.0f;
  auto y1 = nn::conv1d<float>(nullptr, x, w1, nullptr, 1, 1, nn::PadMode::kSame);
  CHECK(y1->v == x->v);

  auto w3 = nn::make_var<float>({1, 1, 3});
  w3->v = {0.0f, 1.0f, 0.0f};
  auto y3 = nn::conv1d<float>(nullptr, x, w3, nullptr, 1, 1, nn::PadMode::kSame);
  CHECK(y3->v == x->v);
}

TEST_CASE("conv1d matches the direct triple-loop oracle") {
  Rng rng(17);
  const int cin = 3, cout = 2, k = 5, len = 23, stride = 2, dilation = 3;
  auto x = nn::make_var<double>({cin, len});
  auto w = nn::make_var<double>({cout, cin, k});
  auto b = nn::make_var<double>({cout});
  for (auto& v : x->v) v = rng.uniform(-1.0, 1.0);
  for (auto& v : w->v) v = rng.uniform(-1.0, 1.0);
  for (auto& v : b->v) v = rng.uniform(-1.0, 1.0);

  const auto y = nn::conv1d<double>(nullptr, x, w, b, stride, dilation, nn::PadMode::kSame);
  const auto geom = nn::conv_geometry(len, k, stride, dilation, nn::PadMode::kSame);
  REQUIRE(y->shape[1] == geom.lout);

  for (int co = 0; co < cout; ++co) {
    for (int t = 0; t < geom.lout; ++t) {
      double want = b->v[static_cast<size_t>(co)];
      for (int ci = 0; ci < cin; ++ci)
        for (int kk = 0; kk < k; ++kk) {
          const int64_t idx = static_cast<int64_t>(t) * stride + static_cast<int64_t>(kk) * dilation - geom.pad_left;
          if (idx >= 0 && idx < len)
            want += w->v[static_cast<size_t>((co * cin + ci) * k + kk)] * x->v[static_cast<size_t>(ci * len + idx)];
        }
      CHECK(std::fabs(y->v[static_cast<size_t>(co * geom.lout + t)] - want) < 1e-6);
    }
  }
}

TEST_CASE("causal padding only looks left") {
  auto x = nn::make_var<float>({1, 8});
  x->v = {1, 0, 0, 0, 0, 0, 0, 0};
  auto w = nn::make_var<float>({1, 1, 2});
  w->v = {1.0f, 1.0f};
  auto y = nn::conv1d<float>(nullptr, x, w, nullptr, 1, 1, nn::PadMode::kCausal);
  CHECK(y->v[0] == 1.0f);
  CHECK(y->v[1] == 1.0f);
  CHECK(y->v[2] == 0.0f);
}

TEST_CASE("film examples") {
  auto x = nn::make_var<float>({2, 4});
  Rng rng(5);
  for (auto& v : x->v) v = static_cast<float>(rng.uniform(-1.0, 1.0));

  auto ones = nn::make_var<float>({2});
  ones->v = {1.0f, 1.0f};
  auto zeros = nn::make_var<float>({2});
  auto same = nn::film<float>(nullptr, x, ones, zeros);
  CHECK(same->v == x->v);

  auto beta = nn::make_var<float>({2});
  beta->v = {0.5f, -0.25f};
  auto flat = nn::film<float>(nullptr, x, zeros, beta);
  for (int t = 0; t < 4; ++t) {
    CHECK(flat->v[static_cast<size_t>(t)] == 0.5f);
    CHECK(flat->v[static_cast<size_t>(4 + t)] == -0.25f);
  }
}

TEST_CASE("prelu, pooling and batchnorm basic behavior") {
  auto x = nn::make_var<float>({2, 3});
  x->v = {1.0f, -2.0f, 3.0f, -1.0f, 0.5f, -0.5f};

  auto alpha1 = nn::make_var<float>({2});
  alpha1->v = {1.0f, 1.0f};
  CHECK(nn::prelu<float>(nullptr, x, alpha1)->v == x->v);

  auto pooled = nn::global_avg_pool_time<float>(nullptr, x);
  CHECK(pooled->v[0] == doctest::Approx((1.0 - 2.0 + 3.0) / 3.0));
  CHECK(pooled->v[1] == doctest::Approx((-1.0 + 0.5 - 0.5) / 3.0));

  nn::BatchNorm1d<float> bn(2);
  auto ys = nn::batchnorm_group<float>(nullptr, {x}, bn, false);
  for (size_t i = 0; i < x->v.size(); ++i)
    CHECK(ys[0]->v[i] == doctest::Approx(x->v[i]).epsilon(1e-4));
}

TEST_CASE("constant-in-time input pools to that constant per channel") {
  auto x = nn::make_var<float>({3, 50});
  for (int c = 0; c < 3; ++c)
    for (int t = 0; t < 50; ++t) x->v[static_cast<size_t>(c * 50 + t)] = 0.25f * static_cast<float>(c + 1);
  auto pooled = nn::global_avg_pool_time<float>(nullptr, x);
  for (int c = 0; c < 3; ++c)
    CHECK(pooled->v[static_cast<size_t>(c)] == doctest::Approx(0.25 * (c + 1)).epsilon(1e-6));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  auto p = nn::make_var<float>({4}, true);
  p->v = {1.0f, 2.0f, 3.0f, 4.0f};
  const auto before = p->v;
  nn::Adam<float> opt({p});
  opt.zero_grad();
  CHECK(opt.step(1e-3));
  CHECK(p->v == before);
}

TEST_CASE("adam: first step moves by lr in the gradient sign direction") {
  auto p = nn::make_var<double>({3}, true);
  p->v = {0.5, -0.25, 1.0};
  const auto before = p->v;
  nn::Adam<double> opt({p});
  p->g = {0.3, -0.7, 0.001};
  const double lr = 1e-3;
  CHECK(opt.step(lr));
  for (size_t i = 0; i < 3; ++i) {
    const double delta = p->v[i] - before[i];
    const double expect = -lr * (p->g[i] > 0 ? 1.0 : -1.0);
    CHECK(std::fabs(delta - expect) < 1e-6);
  }
}

TEST_CASE("adam rejects non-finite gradients and leaves parameters alone") {
  auto p = nn::make_var<float>({2}, true);
  p->v = {1.0f, 2.0f};
  nn::Adam<float> opt({p});
  p->g = {0.5f, std::numeric_limits<float>::quiet_NaN()};
  CHECK_FALSE(opt.step(1e-3));
  CHECK(p->v[0] == 1.0f);
  CHECK(p->v[1] == 2.0f);
}

TEST_CASE("adam is deterministic across identical runs") {
  auto run = [] {
    auto p = nn::make_var<float>({8}, true);
    for (size_t i = 0; i < 8; ++i) p->v[i] = 0.1f * static_cast<float>(i);
    nn::Adam<float> opt({p});
    Rng rng(5);
    for (int step = 0; step < 50; ++step) {
      for (auto& g : p->g) g = static_cast<float>(rng.uniform(-1.0, 1.0));
      opt.step(2e-4);
    }
    return p->v;
  };
  CHECK(run() == run());
}

TEST_CASE("cosine schedule endpoints and midpoint") {
  nn::CosineSchedule s{2e-4, 1000};
  CHECK(s.lr_at(0) == doctest::Approx(2e-4));
  CHECK(s.lr_at(1000) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.lr_at(500) == doctest::Approx(1e-4));
  CHECK_THROWS_AS((void)s.lr_at(1001), Error);
}

TEST_CASE("checkpoint container round-trips and rejects unknown versions") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "mixstyle_ckpt_test.bin").string();

  std::vector<nn::NamedTensor> tensors;
  tensors.push_back(nn::tensor_from_floats("w", {2, 3}, {1, 2, 3, 4, 5, 6}));
  tensors.push_back(nn::tensor_from_string("__config__", "{\"k\":1}"));
  nn::save_checkpoint(path, tensors);

  const auto back = nn::load_checkpoint(path);
  REQUIRE(back.size() == 2);
  CHECK(nn::floats_from_tensor(nn::find_tensor(back, "w")) == std::vector<float>{1, 2, 3, 4, 5, 6});
  CHECK(nn::string_from_tensor(nn::find_tensor(back, "__config__")) == "{\"k\":1}");
  CHECK(nn::find_tensor(back, "w").shape == std::vector<int64_t>{2, 3});
  CHECK_THROWS_AS((void)nn::find_tensor(back, "missing"), Error);

  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(4);
    const uint32_t bad = 999;
    f.write(reinterpret_cast<const char*>(&bad), 4);
  }
  CHECK_THROWS_AS((void)nn::load_checkpoint(path), Error);
}

TEST_CASE("unused parameters receive zero gradient") {
  auto used = nn::make_var<double>({4}, true);
  auto unused = nn::make_var<double>({4}, true);
  for (size_t i = 0; i < 4; ++i) used->v[i] = 0.5 + 0.1 * static_cast<double>(i);
  unused->ensure_grad();

  Tape<double> tape;
  auto loss = nn::mean_sq(&tape, used);
  tape.backward(loss);
  for (double g : unused->g) CHECK(g == 0.0);
}
