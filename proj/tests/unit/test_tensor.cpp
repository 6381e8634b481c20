#include <gtest/gtest.h>

#include <cmath>

#include "tempofield/error.hpp"
#include "tempofield/optim.hpp"
#include "tempofield/rng.hpp"
#include "tempofield/tensor.hpp"

using namespace tempofield;

namespace {

Tensor rand_param(Shape s, Rng& rng) {
  std::vector<double> v(s.size());
  for (auto& x : v) x = rng.uniform(-1, 1);
  return Tensor::parameter(s, v);
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Tensor, MatmulValues) {
  const Tensor a = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor b = Tensor::constant({3, 2}, {7, 8, 9, 10, 11, 12});
  EXPECT_EQ(values(matmul(a, b)), (std::vector<double>{58, 64, 139, 154}));
  EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(Tensor, AddBroadcastsRows) {
  const Tensor a = Tensor::constant({2, 2}, {1, 2, 3, 4});
  const Tensor b = Tensor::constant({1, 2}, {10, 20});
  EXPECT_EQ(values(add(a, b)), (std::vector<double>{11, 22, 13, 24}));
  EXPECT_THROW(add(a, Tensor::zeros({2, 3})), ShapeError);
}

TEST(Tensor, ItemNeedsScalar) {
  EXPECT_DOUBLE_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor::zeros({2, 1}).item(), ShapeError);
}

TEST(Tensor, SoftmaxRowsSumToOne) {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const std::size_t r = 1 + rng.below(5), c = 1 + rng.below(6);
    std::vector<double> v(r * c);
    for (auto& x : v) x = rng.uniform(-50, 50);
    const Tensor s = softmax_rows(Tensor::constant({r, c}, v));
    for (std::size_t i = 0; i < r; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        EXPECT_GE(s.at(i, j), 0.0);
        sum += s.at(i, j);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Tensor, MaskedSoftmaxZeroesMaskedEntries) {
  const Tensor x = Tensor::constant({2, 3}, {1, 2, 3, 1, 2, 3});
  const std::vector<unsigned char> mask = {1, 0, 1, 0, 1, 0};
  const Tensor s = softmax_rows(x, mask);
  EXPECT_EQ(s.at(0, 1), 0.0);
  EXPECT_NEAR(s.at(0, 0) + s.at(0, 2), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.at(1, 1), 1.0);
  const std::vector<unsigned char> empty_row = {1, 1, 1, 0, 0, 0};
  EXPECT_THROW(softmax_rows(x, empty_row), ShapeError);
}

TEST(Tensor, BceMatchesClosedForm) {
  const Tensor logits = Tensor::constant({3, 1}, {2.0, -1.0, 0.0});
  const std::vector<double> labels = {1, 0, 1};
  const double expected = (std::log1p(std::exp(-2.0)) + std::log1p(std::exp(-1.0)) + std::log(2.0)) / 3.0;
  EXPECT_NEAR(bce_with_logits(logits, labels).item(), expected, 1e-15);
  // Stable for large logits.
  const Tensor big = Tensor::constant({2, 1}, {800.0, -800.0});
  EXPECT_NEAR(bce_with_logits(big, std::vector<double>{0, 1}).item(), 800.0, 1e-9);
}

TEST(Tape, GradientOfQuadratic) {
  Tensor x = Tensor::parameter({1, 3}, {1, -2, 3});
  x.zero_grad();
  Tape tape;
  {
    TapeScope scope(tape);
    const Tensor loss = sum(mul(x, x));
    tape.backward(loss);
  }
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{2, -4, 6}));
}

TEST(Tape, SecondBackwardThrows) {
  Tensor x = Tensor::parameter({1, 1}, {2});
  Tape tape;
  TapeScope scope(tape);
  const Tensor loss = mul(x, x);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), GradientError);
}

TEST(Tape, NonScalarLossThrows) {
  Tensor x = Tensor::parameter({2, 1}, {2, 3});
  Tape tape;
  TapeScope scope(tape);
  EXPECT_THROW(tape.backward(mul(x, x)), GradientError);
}

TEST(Tape, NoGradScopeRecordsNothing) {
  Tensor x = Tensor::parameter({1, 1}, {2});
  Tape tape;
  TapeScope scope(tape);
  {
    NoGradScope off;
    (void)mul(x, x);
  }
  EXPECT_TRUE(tape.empty());
  (void)mul(x, x);
  EXPECT_EQ(tape.size(), 1u);
}

TEST(Tape, GradientsAccumulateOverReuse) {
  Tensor x = Tensor::parameter({1, 1}, {3});
  x.zero_grad();
  Tape tape;
  TapeScope scope(tape);
  const Tensor y = add(mul(x, x), scale(x, 4.0));  // 2x + 4
  tape.backward(sum(y));
  EXPECT_DOUBLE_EQ(x.grad()[0], 10.0);
}

TEST(FiniteDiff, PrimitivesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Tensor a = rand_param({3, 4}, rng);
    const Tensor b = rand_param({4, 2}, rng).clone(false);
    const Tensor w = rand_param({3, 2}, rng).clone(false);
    auto f = [&](const Tensor& p) { return sum(mul(tempofield::tanh(matmul(p, b)), w)); };
    EXPECT_LT(finite_diff_check(f, a, 1e-5), 1e-4);
    Rng fixed(seed + 100);
    const Tensor w2 = rand_param({3, 4}, fixed).clone(false);
    auto h = [&](const Tensor& p) { return sum(mul(softmax_rows(p), w2)); };
    EXPECT_LT(finite_diff_check(h, a, 1e-5), 1e-4);
    auto k = [&](const Tensor& p) { return mean(sigmoid(transpose(p))); };
    EXPECT_LT(finite_diff_check(k, a, 1e-5), 1e-4);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor x = Tensor::parameter({1, 2}, {1.0, -1.0});
  Adam opt({x}, AdamConfig{0.1});
  opt.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(x, Tensor::constant({1, 2}, {3.0, -0.5}))));
  }
  opt.step();
  // Bias-corrected first step is lr * g / (|g| + eps) = lr * sign(g).
  EXPECT_NEAR(x.data()[0], 0.9, 1e-7);
  EXPECT_NEAR(x.data()[1], -0.9, 1e-7);
  EXPECT_EQ(opt.step_count(), 1u);
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(Adam, MatchesReferenceRecurrence) {
  Tensor x = Tensor::parameter({1, 1}, {2.0});
  const AdamConfig cfg{0.05};
  Adam opt({x}, cfg);
  double ref = 2.0, m = 0.0, v = 0.0;
  for (int step = 1; step <= 25; ++step) {
    opt.zero_grad();
    {
      Tape tape;
      TapeScope scope(tape);
      tape.backward(mul(mul(x, x), x));  // d/dx x^3 = 3x^2
    }
    opt.step();
    const double g = 3 * ref * ref;
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, step));
    const double vh = v / (1 - std::pow(cfg.beta2, step));
    ref -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
    EXPECT_NEAR(x.data()[0], ref, 1e-12);
  }
}

TEST(Adam, ParameterWithoutGradientIsError) {
  Tensor used = Tensor::parameter({1, 1}, {1.0});
  Tensor unused = Tensor::parameter({1, 1}, {1.0});
  Adam opt({used, unused});
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(mul(used, used));
  }
  EXPECT_THROW(opt.step(), GradientError);
}
