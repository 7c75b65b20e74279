#include <catch2/catch_amalgamated.hpp>

#include "qmo/calculus.hpp"
#include "qmo/random.hpp"
#include "test_support.hpp"

using qmo::MatTuple;
using qmo::QMatrix;
using qmo::Quaternion;
using qmo::RealFn;
using qmo::TupleShape;
using test_support::random_tuple;
using test_support::scalar_tuple;

namespace {

RealFn fro_sq_fn(const TupleShape& shape) {
  RealFn f;
  f.signature = shape;
  f.smoothness = qmo::Smoothness::strong;
  f.value = [](const MatTuple& x) { return qmo::fro_norm_sq(x); };
  return f;
}

RealFn fro_fn(const TupleShape& shape) {
  RealFn f;
  f.signature = shape;
  f.smoothness = qmo::Smoothness::normal;
  f.value = [](const MatTuple& x) { return qmo::fro_norm(x); };
  return f;
}

MatTuple proto_point(const Quaternion& w, const Quaternion& y,
                     const Quaternion& z) {
  QMatrix mw(1, 1), my(1, 1), mz(1, 1);
  mw.set(0, 0, w);
  my.set(0, 0, y);
  mz.set(0, 0, z);
  return MatTuple{mw, my, mz};
}

}  // namespace

TEST_CASE("matrix component vectors carry one to three components") {
  const QMatrix m(2, 2);
  CHECK_THROWS_AS(MatTuple(std::vector<QMatrix>{}), qmo::ShapeMismatch);
  CHECK_THROWS_AS(MatTuple({m, m, m, m}), qmo::ShapeMismatch);
  CHECK(MatTuple({m, m, m}).size() == 3);
  CHECK(MatTuple({m}).shape() ==
        TupleShape{{{2, 2}}});
}

TEST_CASE("r_product on scalar tuples") {
  // (1+i) . (2+3i) = 1*2 + 1*3
  CHECK(qmo::r_product(scalar_tuple({1, 1, 0, 0}), scalar_tuple({2, 3, 0, 0})) ==
        Catch::Approx(5.0));

  std::mt19937_64 rng(30);
  const TupleShape shape{{{3, 2}, {2, 4}}};
  for (int t = 0; t < 20; ++t) {
    const MatTuple a = random_tuple(shape, rng);
    CHECK(qmo::r_product(a, a) == Catch::Approx(qmo::fro_norm_sq(a)));
  }
  CHECK_THROWS_AS(
      qmo::r_product(MatTuple::zeros(shape), MatTuple::zeros(TupleShape{{{3, 2}}})),
      qmo::ShapeMismatch);
}

TEST_CASE("r_product is the real part of the inner product") {
  std::mt19937_64 rng(31);
  const TupleShape shape{{{4, 3}, {2, 5}, {3, 3}}};
  for (int t = 0; t < 1000; ++t) {
    const MatTuple a = random_tuple(shape, rng);
    const MatTuple h = random_tuple(shape, rng);
    Quaternion total;
    for (std::size_t c = 0; c < a.size(); ++c) total += qmo::inner(a[c], h[c]);
    CHECK(std::abs(qmo::r_product(a, h) - total.w) < 1e-12);
  }
}

TEST_CASE("R-linear independence") {
  CHECK(qmo::r_linearly_independent(
      {scalar_tuple(Quaternion::one()), scalar_tuple(Quaternion::i())}));

  std::mt19937_64 rng(32);
  const MatTuple a = random_tuple(TupleShape{{{2, 2}}}, rng);
  CHECK_FALSE(qmo::r_linearly_independent({a, a * 2.0}));

  // three vectors inside the two-dimensional real span of {1, i}
  CHECK_FALSE(qmo::r_linearly_independent({scalar_tuple({1, 1, 0, 0}),
                                           scalar_tuple({1, -1, 0, 0}),
                                           scalar_tuple({1, 0, 0, 0})}));

  CHECK(qmo::r_linearly_independent({}));
  CHECK_FALSE(qmo::r_linearly_independent({MatTuple::zeros(TupleShape{{{2, 2}}})}));
}

TEST_CASE("prototype gradient formulas at the worked scalar point") {
  // f = 1/2 ||YZ - W||^2 at (W, Y, Z) = (0, 1, i): dW block is -i.
  const MatTuple x = proto_point(Quaternion::zero(), Quaternion::one(),
                                 Quaternion::i());
  const MatTuple g = qmo::prototype_gradient(x);
  CHECK(qmo::modulus(g[0](0, 0) - (-Quaternion::i())) < 1e-15);
}

TEST_CASE("gradient of the squared Frobenius norm is 2X") {
  std::mt19937_64 rng(33);
  const TupleShape shape{{{3, 4}, {2, 2}}};
  const MatTuple x = random_tuple(shape, rng);
  const MatTuple g = qmo::gradient(fro_sq_fn(shape), x);
  CHECK(qmo::fro_norm(g - x * 2.0) < 1e-8 * (1.0 + qmo::fro_norm(x)));
}

TEST_CASE("fd_gradient is exact on linear functions") {
  std::mt19937_64 rng(34);
  const TupleShape shape{{{3, 3}}};
  const MatTuple dir = random_tuple(shape, rng);
  RealFn f;
  f.signature = shape;
  f.value = [dir](const MatTuple& x) { return qmo::r_product(dir, x); };
  // At the origin the difference quotient cancels exactly.
  const MatTuple g0 = qmo::fd_gradient(f, MatTuple::zeros(shape), 1e-5);
  CHECK(qmo::fro_norm(g0 - dir) < 1e-12 * (1.0 + qmo::fro_norm(dir)));
  // Elsewhere only the f(X)-sized roundoff divided by h remains.
  const MatTuple g = qmo::fd_gradient(f, random_tuple(shape, rng), 1e-5);
  CHECK(qmo::fro_norm(g - dir) < 1e-9 * (1.0 + qmo::fro_norm(dir)));
}

TEST_CASE("prototype analytic gradient agrees with central differences") {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 10; ++t) {
    std::uniform_int_distribution<std::size_t> dm(1, 12), dr(1, 4);
    const std::size_t m = dm(rng), n = dm(rng), r = dr(rng);
    const RealFn f = qmo::make_prototype_objective(m, n, r);
    const MatTuple x = random_tuple(f.signature, rng);
    const MatTuple ga = qmo::prototype_gradient(x);
    const MatTuple gf = qmo::fd_gradient(f, x, 1e-5);
    CHECK(qmo::fro_norm(ga - gf) < 1e-6 * std::max(1.0, qmo::fro_norm(ga)));
  }
}

TEST_CASE("finite-difference disagreement is flagged") {
  // |x| has a kink at 0; close to it the central differences drift with h.
  const TupleShape shape{{{1, 1}}};
  RealFn f = fro_fn(shape);
  const MatTuple x = scalar_tuple({1e-7, 0, 0, 0});
  CHECK_THROWS_AS(qmo::gradient(f, x), qmo::NotDifferentiable);
  // Away from the kink the same function is perfectly differentiable.
  const MatTuple far = scalar_tuple({2, 1, 0, 0});
  const MatTuple g = qmo::gradient(f, far);
  CHECK(qmo::fro_norm(g - far * (1.0 / qmo::fro_norm(far))) < 1e-7);
}

TEST_CASE("directional derivative") {
  const MatTuple x = proto_point(Quaternion::zero(), Quaternion::one(),
                                 Quaternion::i());
  const RealFn f = qmo::make_prototype_objective(1, 1, 1);
  MatTuple dw = MatTuple::zeros(f.signature);
  dw[0].set(0, 0, Quaternion::one());
  // grad_W = -i, direction 1: Re<-i, 1> = 0.
  CHECK(std::abs(qmo::directional_derivative(f, x, dw)) < 1e-14);
  CHECK(qmo::directional_derivative(f, x, MatTuple::zeros(f.signature)) == 0.0);

  std::mt19937_64 rng(36);
  const TupleShape shape{{{3, 2}, {2, 3}}};
  const RealFn q = fro_sq_fn(shape);
  for (int t = 0; t < 5; ++t) {
    const MatTuple p = random_tuple(shape, rng);
    const MatTuple d = random_tuple(shape, rng);
    const double got = qmo::directional_derivative(q, p, d);
    const double h = 1e-6;
    const double fd = (q.value(p + d * h) - q.value(p - d * h)) / (2.0 * h);
    CHECK(std::abs(got - fd) < 1e-7 * (1.0 + std::abs(fd)));
  }
}

TEST_CASE("prototype hessian blocks") {
  // ZZ^* = 1 for Z = j, so the Y block of the apply is just DY.
  std::mt19937_64 rng(37);
  const MatTuple x = proto_point(test_support::random_quaternion(rng),
                                 test_support::random_quaternion(rng),
                                 Quaternion::j());
  MatTuple d = MatTuple::zeros(x.shape());
  const Quaternion dy = test_support::random_quaternion(rng);
  d[1].set(0, 0, dy);
  const MatTuple out = qmo::prototype_hessian_apply(x, d);
  CHECK(qmo::modulus(out[1](0, 0) - dy) < 1e-14);

  // Linear map: zero direction maps to zero.
  const MatTuple zero_out =
      qmo::prototype_hessian_apply(x, MatTuple::zeros(x.shape()));
  CHECK(qmo::fro_norm(zero_out) == 0.0);
}

TEST_CASE("prototype hessian apply is self-adjoint with symmetric cross terms") {
  std::mt19937_64 rng(38);
  const RealFn f = qmo::make_prototype_objective(4, 3, 2);
  const MatTuple x = random_tuple(f.signature, rng);
  const QMatrix& z = x[2];
  const QMatrix zh = qmo::conj_transpose(z);
  for (int t = 0; t < 5; ++t) {
    const MatTuple d1 = random_tuple(f.signature, rng);
    const MatTuple d2 = random_tuple(f.signature, rng);
    // Mixed partial pair (16) vs (18): -DY Z . DW equals -DW Z^* . DY.
    const double lhs = -qmo::r_product(qmo::matmul(d1[1], z), d2[0]);
    const double rhs = -qmo::r_product(qmo::matmul(d2[0], zh), d1[1]);
    CHECK(std::abs(lhs - rhs) < 1e-9 * (1.0 + std::abs(rhs)));
    // Assembled operator self-adjointness.
    const double a12 = qmo::r_product(qmo::prototype_hessian_apply(x, d1), d2);
    const double a21 = qmo::r_product(qmo::prototype_hessian_apply(x, d2), d1);
    CHECK(std::abs(a12 - a21) < 1e-9 * (1.0 + std::abs(a12)));
  }
}

TEST_CASE("hessian quadratic form") {
  const TupleShape shape{{{3, 3}, {2, 2}}};
  RealFn f = fro_sq_fn(shape);
  std::mt19937_64 rng(39);
  const MatTuple x = random_tuple(shape, rng);
  const MatTuple d = random_tuple(shape, rng);
  // grad^2 = 2 I: the half form is ||D||^2 (finite-difference path).
  CHECK(qmo::hessian_quadratic_form(f, x, d) ==
        Catch::Approx(qmo::fro_norm_sq(d)).epsilon(1e-7));

  // Analytic path through hess_apply.
  f.hess_apply = [](const MatTuple&, const MatTuple& dd) { return dd * 2.0; };
  CHECK(qmo::hessian_quadratic_form(f, x, d) ==
        Catch::Approx(qmo::fro_norm_sq(d)).epsilon(1e-12));
}

TEST_CASE("prototype quadratic form: analytic vs finite differences") {
  std::mt19937_64 rng(40);
  const RealFn with_analytic = qmo::make_prototype_objective(4, 3, 2);
  RealFn fd_only = with_analytic;
  fd_only.grad = nullptr;
  fd_only.hess_apply = nullptr;
  for (int t = 0; t < 10; ++t) {
    const MatTuple x = random_tuple(with_analytic.signature, rng);
    const MatTuple d = random_tuple(with_analytic.signature, rng);
    const double qa = qmo::hessian_quadratic_form(with_analytic, x, d);
    const double qf = qmo::hessian_quadratic_form(fd_only, x, d);
    CHECK(std::abs(qa - qf) < 1e-5 * std::max(1.0, std::abs(qa)));
  }
}

TEST_CASE("quadratic form is even and quadratic in the direction") {
  std::mt19937_64 rng(41);
  const RealFn f = qmo::make_prototype_objective(3, 4, 2);
  const MatTuple x = random_tuple(f.signature, rng);
  const MatTuple d = random_tuple(f.signature, rng);
  const double base = qmo::hessian_quadratic_form(f, x, d);
  for (const double alpha : {-2.0, -1.0, 0.5}) {
    const double scaled = qmo::hessian_quadratic_form(f, x, d * alpha);
    CHECK(scaled == Catch::Approx(alpha * alpha * base).epsilon(1e-9));
  }
}

TEST_CASE("Taylor remainders shrink at first and second order") {
  std::mt19937_64 rng(42);
  const RealFn f = qmo::make_prototype_objective(5, 4, 2);
  // The second-order remainder is exactly c3 t^3 + c4 t^4; redraw while its
  // sign crossing sits inside the step ladder, where a log-log fit says
  // nothing about the order.
  MatTuple x = random_tuple(f.signature, rng);
  MatTuple d = random_tuple(f.signature, rng);
  for (;;) {
    const QMatrix e = qmo::matmul(d[1], x[2]) + qmo::matmul(x[1], d[2]) - d[0];
    const QMatrix fq = qmo::matmul(d[1], d[2]);
    const double c3 = qmo::r_product(e, fq);
    const double crossing = c3 < 0.0 ? -c3 / (0.5 * qmo::fro_norm_sq(fq)) : 0.0;
    if (!(crossing > 8e-3 && crossing < 1.0)) break;
    x = random_tuple(f.signature, rng);
    d = random_tuple(f.signature, rng);
  }
  const double f0 = f.value(x);
  const double gd = qmo::r_product(qmo::gradient(f, x), d);
  const double half_form = qmo::hessian_quadratic_form(f, x, d);

  std::vector<double> steps, rem1, rem2;
  for (int i = 0; i < 8; ++i) {
    const double t = 0.5 * std::pow(0.5, i);
    const double ft = f.value(x + d * t);
    steps.push_back(t);
    rem1.push_back(std::abs(ft - f0 - t * gd));
    rem2.push_back(std::abs(ft - f0 - t * gd - t * t * half_form));
  }
  CHECK(test_support::loglog_slope(steps, rem1) >= 1.9);
  CHECK(test_support::loglog_slope(steps, rem2) >= 2.9);
}

TEST_CASE("product rule") {
  const TupleShape shape{{{2, 2}}};
  const RealFn f = fro_sq_fn(shape);
  std::mt19937_64 rng(43);
  const MatTuple x = random_tuple(shape, rng);
  CHECK(qmo::check_product_rule(f, f, x) < 1e-8 * (1.0 + qmo::fro_norm_sq(x)));

  const RealFn proto = qmo::make_prototype_objective(2, 2, 1);
  const MatTuple xp = random_tuple(proto.signature, rng);
  CHECK(qmo::check_product_rule(proto, proto, xp) <
        1e-6 * (1.0 + std::abs(proto.value(xp))));
}

TEST_CASE("chain rule") {
  std::mt19937_64 rng(44);
  const RealFn proto = qmo::make_prototype_objective(2, 3, 2);
  const MatTuple x = random_tuple(proto.signature, rng);
  const auto identity = [](double t) { return t; };
  const auto one = [](double) { return 1.0; };
  CHECK(qmo::check_chain_rule(proto, identity, one, x) < 1e-7);

  const auto square = [](double t) { return t * t; };
  const auto dsquare = [](double t) { return 2.0 * t; };
  CHECK(qmo::check_chain_rule(proto, square, dsquare, x) <
        1e-6 * (1.0 + proto.value(x) * proto.value(x)));
}

TEST_CASE("subgradient certificates for the Frobenius norm") {
  const TupleShape shape{{{1, 1}}};
  const RealFn f = fro_fn(shape);
  const MatTuple origin = MatTuple::zeros(shape);

  // 0 is a subgradient of ||.|| at 0.
  CHECK(qmo::check_subgradient(f, origin, origin, 200, 1).holds);

  // Away from 0 the unique subgradient is X / ||X||.
  std::mt19937_64 rng(45);
  const MatTuple xbar = random_tuple(shape, rng);
  const MatTuple g = xbar * (1.0 / qmo::fro_norm(xbar));
  CHECK(qmo::check_subgradient(f, xbar, g, 200, 2).holds);
  // ... and it matches the gradient op away from the kink.
  CHECK(qmo::fro_norm(qmo::gradient(f, xbar) - g) < 1e-7);

  // A vector of norm 2 is falsified, witness in hand.
  const MatTuple bad = scalar_tuple({2, 0, 0, 0});
  const auto chk = qmo::check_subgradient(f, origin, bad, 200, 3);
  CHECK_FALSE(chk.holds);
  REQUIRE(chk.witness.has_value());
  const MatTuple& w = *chk.witness;
  CHECK(f.value(w) < f.value(origin) + qmo::r_product(bad, w) - 1e-9);
}

TEST_CASE("convexity certificates") {
  const TupleShape shape{{{2, 2}}};
  CHECK(qmo::check_convexity_psd(fro_sq_fn(shape), 100, 4).convex);

  RealFn neg = fro_sq_fn(shape);
  neg.value = [](const MatTuple& x) { return -qmo::fro_norm_sq(x); };
  const auto chk = qmo::check_convexity_psd(neg, 100, 5);
  CHECK_FALSE(chk.convex);
  CHECK(chk.min_form < -1e-9);

  // The bilinear YZ coupling gives the prototype negative curvature.
  const auto proto =
      qmo::check_convexity_psd(qmo::make_prototype_objective(3, 3, 2), 300, 6);
  CHECK_FALSE(proto.convex);
  REQUIRE(proto.witness_point.has_value());
  REQUIRE(proto.witness_direction.has_value());
  CHECK(qmo::hessian_quadratic_form(qmo::make_prototype_objective(3, 3, 2),
                                    *proto.witness_point,
                                    *proto.witness_direction) < 0.0);
}
