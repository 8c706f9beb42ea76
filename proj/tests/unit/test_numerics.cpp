#include <doctest.h>

#include "../support/oracles.hpp"
#include "tiger/numerics/gradcheck.hpp"
#include "tiger/util.hpp"

#include <cmath>

using namespace tiger;

namespace {

MatrixD random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  MatrixD m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

Parameter<double> param(const std::string& name, MatrixD v) { return Parameter<double>(name, std::move(v)); }

}  // namespace

TEST_CASE("sym_normalize small graphs") {
  const auto two = sym_normalize<double>(AdjacencyMatrix::from_pairs(2, {{0, 1}}));
  CHECK(MatrixD(two).isApprox(MatrixD::Constant(2, 2, 0.5)));
  const auto one = sym_normalize<double>(AdjacencyMatrix::from_pairs(1, {}));
  CHECK(MatrixD(one)(0, 0) == 1.0);
  const MatrixD path = MatrixD(sym_normalize<double>(AdjacencyMatrix::from_pairs(3, {{0, 1}, {1, 2}})));
  CHECK(path(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
  CHECK(path(0, 1) == doctest::Approx(0.40825).epsilon(1e-5));
  CHECK(path.isApprox(path.transpose()));
}

TEST_CASE("spmm and relu forward") {
  const auto s = sym_normalize<double>(AdjacencyMatrix::from_pairs(2, {{0, 1}}));
  const MatrixD z = 2.0 * MatrixD::Identity(2, 2);
  CHECK(spmm(s, z).isApprox(MatrixD::Ones(2, 2)));
  const auto eye = sym_normalize<double>(AdjacencyMatrix::from_pairs(3, {}));
  Rng rng(1);
  const MatrixD r = random_matrix(rng, 3, 2);
  CHECK(spmm(eye, r) == r);
  CHECK(spmm(s, MatrixD(MatrixD::Zero(2, 3))).isZero());
  CHECK_THROWS_AS(spmm(s, r), NumericError);
  MatrixD a(1, 2);
  a << -1, 2;
  MatrixD want(1, 2);
  want << 0, 2;
  CHECK(relu(a) == want);
}

TEST_CASE("relu subgradient") {
  MatrixD v(1, 2);
  v << 2, -1;
  Parameter<double> p = param("x", v);
  Tape<double> tape;
  tape.backward(sum(relu(tape.leaf(p))));
  CHECK(p.grad(0, 0) == 1.0);
  CHECK(p.grad(0, 1) == 0.0);
}

TEST_CASE("gram and centering") {
  CHECK(gram(MatrixD(MatrixD::Identity(2, 2))) == MatrixD::Identity(2, 2));
  MatrixD ones = MatrixD::Ones(1, 2);
  CHECK(gram(ones)(0, 0) == 2.0);
  const MatrixD r2 = centering<double>(2);
  CHECK(r2(0, 0) == 0.5);
  CHECK(r2(0, 1) == -0.5);
  const MatrixD r5 = centering<double>(5);
  CHECK((r5 * Eigen::VectorXd::Ones(5)).norm() < 1e-15);
  CHECK(r5.trace() == doctest::Approx(4.0));
  CHECK((r5 * r5).isApprox(r5));
}

TEST_CASE("hsic closed forms") {
  const MatrixD eye = MatrixD::Identity(2, 2);
  CHECK(hsic(eye, eye) == doctest::Approx(1.0).epsilon(1e-14));
  Rng rng(3);
  const MatrixD z = random_matrix(rng, 6, 3);
  MatrixD c(6, 2);
  c.rowwise() = RowVector<double>::LinSpaced(2, 0.5, 1.5);
  CHECK(hsic(z, c) == 0.0);
  CHECK_THROWS_AS(hsic(MatrixD(MatrixD::Ones(1, 2)), MatrixD(MatrixD::Ones(1, 2))), NumericError);
}

TEST_CASE("hsic agrees with the trace form") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const MatrixD a = random_matrix(rng, 6, 3), b = random_matrix(rng, 6, 4);
    const double fast = hsic(a, b);
    CHECK(std::abs(fast - oracle::hsic_trace(a, b)) < 1e-10);
    CHECK(std::abs(fast - hsic(b, a)) < 1e-12);
    CHECK(fast >= 0.0);
  }
}

TEST_CASE("frobenius and logsumexp") {
  MatrixD a(1, 1), b(1, 1);
  a << 1;
  b << 0;
  CHECK(frob_sq_diff(a, a) == 0.0);
  CHECK(frob_sq_diff(a, b) == 1.0);
  CHECK(frob_sq_diff(b, a) == 1.0);
  const std::vector<double> zeros{0, 0}, big{1000, 1000}, one{3.5};
  CHECK(logsumexp(std::span<const double>(zeros)) == doctest::Approx(std::log(2.0)));
  CHECK(logsumexp(std::span<const double>(big)) == doctest::Approx(1000 + std::log(2.0)));
  CHECK(logsumexp(std::span<const double>(one)) == 3.5);
}

TEST_CASE("el loss closed forms") {
  Tape<double> tape;
  MatrixD s1(1, 1);
  s1 << 4.2;
  CHECK(el_loss(tape.constant(s1)).scalar() == 0.0);
  CHECK(el_loss(tape.constant(MatrixD::Constant(2, 2, 0.3))).scalar() == doctest::Approx(std::log(2.0)));
  MatrixD s(2, 2);
  s << 10, -10, -10, 10;
  CHECK(el_loss(tape.constant(s)).scalar() == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-6));
  CHECK(el_loss(tape.constant(s)).scalar() == doctest::Approx(2.06e-9).epsilon(1e-2));
  CHECK_THROWS_AS(el_loss(tape.constant(MatrixD::Zero(2, 3))), NumericError);
}

TEST_CASE("gradient check on a quadratic") {
  MatrixD v(1, 2);
  v << 1, 2;
  Parameter<double> p = param("theta", v);
  auto f = [&](Tape<double>& t) {
    auto x = t.leaf(p);
    return frob_sq_diff(x, t.constant(MatrixD::Zero(1, 2)));
  };
  const auto rep = check_gradients<double>(f, {&p}, 1e-3, 1e-6);
  CHECK(rep.ok());
  CHECK(rep.checked == 2);
  CHECK(p.grad(0, 0) == doctest::Approx(2.0));
  CHECK(p.grad(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("gradient check of a constant loss") {
  Parameter<double> p = param("c", MatrixD::Ones(2, 2));
  auto f = [&](Tape<double>& t) {
    t.leaf(p);
    return t.constant(MatrixD::Constant(1, 1, 5.0));
  };
  const auto rep = check_gradients<double>(f, {&p});
  CHECK(rep.ok());
  CHECK(p.grad.isZero());
}

TEST_CASE("gradient check skips a relu kink") {
  MatrixD v(1, 2);
  v << 0, 1;
  Parameter<double> p = param("k", v);
  auto f = [&](Tape<double>& t) { return sum(relu(t.leaf(p))); };
  const auto rep = check_gradients<double>(f, {&p});
  CHECK(rep.skipped_kinks == 1);
  CHECK(rep.checked == 1);
  CHECK(rep.ok());
}

TEST_CASE("op gradients pass finite differences") {
  Rng rng(5);
  Parameter<double> a = param("a", random_matrix(rng, 5, 3));
  Parameter<double> b = param("b", random_matrix(rng, 5, 4));
  Parameter<double> w = param("w", random_matrix(rng, 3, 4));
  const auto s = sym_normalize<double>(AdjacencyMatrix::from_pairs(5, {{0, 1}, {1, 2}, {3, 4}}));
  std::vector<Parameter<double>*> all{&a, &b, &w};

  SUBCASE("hsic") {
    auto f = [&](Tape<double>& t) { return hsic(t.leaf(a), t.leaf(b)); };
    CHECK(check_gradients<double>(f, all).ok());
  }
  SUBCASE("gram and frobenius") {
    auto f = [&](Tape<double>& t) { return frob_sq_diff(gram(t.leaf(a)), gram(matmul(t.leaf(a), t.leaf(w)))); };
    CHECK(check_gradients<double>(f, all).ok());
  }
  SUBCASE("spmm relu matmul tanh softmax") {
    auto f = [&](Tape<double>& t) {
      auto z = relu(spmm(s, matmul(t.leaf(a), t.leaf(w))));
      auto h = tanh(z + t.leaf(b));
      return frob_sq_diff(softmax_rows(matmul_nt(h, t.leaf(b))), t.constant(MatrixD::Zero(5, 5)));
    };
    CHECK(check_gradients<double>(f, all).ok());
  }
  SUBCASE("xent over gathered and stacked rows") {
    auto f = [&](Tape<double>& t) {
      auto ab = concat_cols<double>({t.leaf(a), t.leaf(b)});
      auto top = gather_rows(ab, {4, 0, 2});
      auto st = stack_rows<double>({row(ab, 1), mean_rows(ab), top});
      return softmax_xent(matmul_nt(st, ab), {0, 1, 2, 3, 4});
    };
    CHECK(check_gradients<double>(f, all).ok());
  }
}
