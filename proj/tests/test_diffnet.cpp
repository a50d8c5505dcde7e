#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "fbpinn/diffnet.hpp"
#include "support.hpp"

using namespace fbpinn;
using namespace fbpinn::diffnet;
using testing::randomize;
using testing::rel_err;

namespace {

double value_at(const MlpParams& p, double x) { return eval_with_input_derivative(p, x).value; }

// Scalar reference loss built only from the single-point evaluation path.
template <class F>
double summed(const MlpParams& p, const std::vector<double>& xs, F&& f) {
  double s = 0.0;
  for (double x : xs) s += f(eval_with_input_derivative(p, x));
  return s;
}

} // namespace

TEST_CASE("init_params produces the 2x16 network shapes") {
  const auto p = init_params({1, 16, 16, 1}, 0);
  REQUIRE(p.layers().size() == 3);
  CHECK(p.weights(0).size() == 16);
  CHECK(p.bias(0).size() == 16);
  CHECK(p.weights(1).size() == 256);
  CHECK(p.bias(1).size() == 16);
  CHECK(p.weights(2).size() == 16);
  CHECK(p.bias(2).size() == 1);
  CHECK(p.size() == 16 + 16 + 256 + 16 + 16 + 1);
  for (std::size_t l = 0; l + 1 < p.layers().size(); ++l)
    CHECK(p.layers()[l].out == p.layers()[l + 1].in);
}

TEST_CASE("init_params: minimal network, zero biases, Glorot range") {
  const auto tiny = init_params({1, 1}, 42);
  CHECK(tiny.size() == 2);
  CHECK(tiny.bias(0)[0] == 0.0);
  CHECK(tiny.weights(0)[0] != 0.0);

  const auto p = init_params({1, 16, 16, 1}, 7);
  for (std::size_t l = 0; l < p.layers().size(); ++l) {
    const auto& s = p.layers()[l];
    const double limit = std::sqrt(6.0 / (s.in + s.out));
    for (double w : p.weights(l)) CHECK(std::abs(w) <= limit);
    for (double b : p.bias(l)) CHECK(b == 0.0);
  }
}

TEST_CASE("init_params is deterministic per seed") {
  const auto a = init_params({1, 16, 16, 1}, 3);
  const auto b = init_params({1, 16, 16, 1}, 3);
  const auto c = init_params({1, 16, 16, 1}, 4);
  CHECK(bitwise_equal(a, b));
  CHECK_FALSE(bitwise_equal(a, c));
}

TEST_CASE("init_params rejects malformed layer lists") {
  CHECK_THROWS_AS(init_params({}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_params({1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_params({1, 0, 1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_params({1, -3, 1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_params({2, 4, 1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_params({1, 4, 2}, 0), std::invalid_argument);
}

TEST_CASE("single tanh unit at the origin") {
  MlpParams p({1, 1, 1});
  p.weights(0)[0] = 1.0;
  p.weights(1)[0] = 1.0;
  const auto e = eval_with_input_derivative(p, 0.0);
  CHECK(e.value == 0.0);
  CHECK(e.dvalue_dx == 1.0);
}

TEST_CASE("all-zero weights give a constant network") {
  MlpParams p({1, 8, 8, 1});
  p.bias(2)[0] = 0.625;
  for (double x : {-1.0, -0.2, 0.0, 0.9}) {
    const auto e = eval_with_input_derivative(p, x);
    CHECK(e.value == 0.625);
    CHECK(e.dvalue_dx == 0.0);
  }
}

TEST_CASE("input derivative matches central differences at 0.3") {
  std::mt19937_64 rng(11);
  auto p = init_params({1, 16, 16, 1}, 5);
  randomize(p, rng);
  const double h = 1e-6;
  const double fd = (value_at(p, 0.3 + h) - value_at(p, 0.3 - h)) / (2 * h);
  CHECK(rel_err(eval_with_input_derivative(p, 0.3).dvalue_dx, fd) < 1e-6);
}

TEST_CASE("batched evaluation agrees with single-point evaluation") {
  std::mt19937_64 rng(2);
  auto p = init_params({1, 16, 16, 1}, 1);
  randomize(p, rng);
  std::vector<double> xs;
  for (int i = 0; i < 37; ++i) xs.push_back(-1.0 + 2.0 * i / 36.0);
  std::vector<double> v(xs.size()), d(xs.size());
  Workspace ws;
  eval_batch(p, xs, v, d, ws);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto e = eval_with_input_derivative(p, xs[i]);
    CHECK(rel_err(v[i], e.value, 1.0) < 1e-14);
    CHECK(rel_err(d[i], e.dvalue_dx, 1.0) < 1e-14);
  }
}

TEST_CASE("loss = value^2 on a constant network") {
  MlpParams p({1, 4, 1});
  p.bias(1)[0] = 1.5;
  const std::vector<double> x{0.2};
  const auto lg = loss_gradient(p, x, [](std::size_t, EvalResult e) {
    return PointLoss{e.value * e.value, 2.0 * e.value, 0.0};
  });
  CHECK(lg.loss == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(lg.grad.bias(1)[0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("zero loss closure gives a zero gradient") {
  std::mt19937_64 rng(9);
  auto p = init_params({1, 6, 6, 1}, 0);
  randomize(p, rng);
  const std::vector<double> x{-0.5, 0.1, 0.7};
  const auto lg = loss_gradient(p, x, [](std::size_t, EvalResult) { return PointLoss{}; });
  CHECK(lg.loss == 0.0);
  for (double g : lg.grad.values()) CHECK(g == 0.0);
}

TEST_CASE("gradient of (du/dx - c)^2 matches finite differences for every parameter") {
  std::mt19937_64 rng(21);
  auto p = init_params({1, 5, 5, 1}, 0);
  randomize(p, rng);
  const std::vector<double> xs{-0.8, -0.1, 0.35, 0.9};
  const double c = 0.4;
  auto closure = [&](std::size_t, EvalResult e) {
    const double r = e.dvalue_dx - c;
    return PointLoss{r * r, 0.0, 2.0 * r};
  };
  auto reference = [&](EvalResult e) { return (e.dvalue_dx - c) * (e.dvalue_dx - c); };

  const auto lg = loss_gradient(p, xs, closure);
  CHECK(rel_err(lg.loss, summed(p, xs, reference)) < 1e-13);

  const double h = 1e-6;
  for (std::size_t k = 0; k < p.size(); ++k) {
    MlpParams plus = p, minus = p;
    plus.values()[k] += h;
    minus.values()[k] -= h;
    const double fd = (summed(plus, xs, reference) - summed(minus, xs, reference)) / (2 * h);
    CAPTURE(k);
    CHECK(rel_err(lg.grad.values()[k], fd, 1e-3) < 1e-5);
  }
}

TEST_CASE("loss_gradient is linear in the loss") {
  std::mt19937_64 rng(4);
  auto p = init_params({1, 8, 8, 1}, 0);
  randomize(p, rng);
  const std::vector<double> xs{-0.9, -0.3, 0.0, 0.4, 0.8};
  const double alpha = 0.7, beta = -2.3;
  auto l1 = [](std::size_t, EvalResult e) {
    return PointLoss{e.value * e.value, 2 * e.value, 0.0};
  };
  auto l2 = [](std::size_t i, EvalResult e) {
    const double r = e.dvalue_dx - double(i);
    return PointLoss{r * r + e.value, 1.0, 2 * r};
  };
  auto mix = [&](std::size_t i, EvalResult e) {
    const auto a = l1(i, e), b = l2(i, e);
    return PointLoss{alpha * a.loss + beta * b.loss, alpha * a.d_value + beta * b.d_value,
                     alpha * a.d_dvalue_dx + beta * b.d_dvalue_dx};
  };
  const auto g1 = loss_gradient(p, xs, l1);
  const auto g2 = loss_gradient(p, xs, l2);
  const auto gm = loss_gradient(p, xs, mix);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double expect = alpha * g1.grad.values()[k] + beta * g2.grad.values()[k];
    CHECK(std::abs(gm.grad.values()[k] - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("identical inputs give bitwise-identical outputs") {
  auto p = init_params({1, 16, 16, 1}, 8);
  const std::vector<double> xs{-0.7, 0.2, 0.6};
  auto closure = [](std::size_t, EvalResult e) {
    return PointLoss{e.value * e.dvalue_dx, e.dvalue_dx, e.value};
  };
  const auto a = loss_gradient(p, xs, closure);
  const auto b = loss_gradient(p, xs, closure);
  CHECK(std::memcmp(&a.loss, &b.loss, sizeof(double)) == 0);
  CHECK(bitwise_equal(a.grad, b.grad));
}

TEST_CASE("non-finite contributions raise NumericalFailure carrying the point") {
  auto p = init_params({1, 4, 1}, 0);
  const std::vector<double> xs{0.1, 0.25, 0.5};
  try {
    loss_gradient(p, xs, [](std::size_t i, EvalResult) {
      return PointLoss{i == 1 ? std::numeric_limits<double>::quiet_NaN() : 0.0, 0.0, 0.0};
    });
    FAIL("expected NumericalFailure");
  } catch (const NumericalFailure& e) {
    CHECK(e.point() == 0.25);
  }
}
