#include <doctest.h>

#include "aflib/operator.hpp"

using namespace aflib;

namespace {

std::string div2_text() {
  return R"({"d":2,"N":2,"n":1,"k":1,
    "terms":[{"alpha":[1,0],"matrix":[[1,0]]},{"alpha":[0,1],"matrix":[[0,1]]}]})";
}

std::string curlcurl2_text() {
  // d22 u11 - 2 d12 u12 + d11 u22 = 0 on (u11, u12, u22)
  return R"({"d":2,"N":3,"n":1,"k":2,
    "terms":[{"alpha":[0,2],"matrix":[[1,0,0]]},
             {"alpha":[1,1],"matrix":[[0,-2,0]]},
             {"alpha":[2,0],"matrix":[[0,0,1]]}]})";
}

OperatorSpec random_operator(Rng& rng, int d, int N, int n, int k) {
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  // a full top-order term plus a couple of random lower-order ones
  for (int attempt = 0; attempt < 4; ++attempt) {
    MultiIndex a;
    a.entries.assign(d, 0);
    int order = (attempt == 0) ? k : static_cast<int>(rng.next_u64() % (k + 1));
    for (int rep = 0; rep < order; ++rep) a.entries[rng.next_u64() % d] += 1;
    Eigen::MatrixXd m(n, N);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < N; ++c) m(r, c) = rng.normal();
    terms[a] = m;
  }
  return OperatorSpec(d, N, n, k, std::move(terms));
}

}  // namespace

TEST_CASE("parse div in d=2") {
  OperatorSpec op = OperatorSpec::parse(div2_text());
  CHECK(op.d() == 2);
  CHECK(op.N() == 2);
  CHECK(op.n() == 1);
  CHECK(op.k() == 1);
  CHECK(op.homogeneous());
}

TEST_CASE("parse rejects inconsistent matrix shapes") {
  std::string bad = R"({"d":2,"N":2,"n":1,"k":1,
    "terms":[{"alpha":[1,0],"matrix":[[1,0,0]]},{"alpha":[0,1],"matrix":[[0,1]]}]})";
  CHECK_THROWS_WITH_AS(OperatorSpec::parse(bad), doctest::Contains("ShapeError"), Error);
}

TEST_CASE("parse rejects negative multi-index entries") {
  std::string bad = R"({"d":2,"N":2,"n":1,"k":1,
    "terms":[{"alpha":[-1,0],"matrix":[[1,0]]}]})";
  CHECK_THROWS_WITH_AS(OperatorSpec::parse(bad), doctest::Contains("ParseError"), Error);
}

TEST_CASE("parse rejects a missing top-order term") {
  std::string bad = R"({"d":2,"N":2,"n":1,"k":2,
    "terms":[{"alpha":[1,0],"matrix":[[1,0]]}]})";
  CHECK_THROWS_WITH_AS(OperatorSpec::parse(bad), doctest::Contains("OrderError"), Error);
}

TEST_CASE("parse curl-curl in d=2 on symmetric fields") {
  OperatorSpec op = OperatorSpec::parse(curlcurl2_text());
  CHECK(op.d() == 2);
  CHECK(op.N() == 3);
  CHECK(op.n() == 1);
  CHECK(op.k() == 2);
}

TEST_CASE("print/parse round-trips coefficients bit-exactly") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    OperatorSpec op = random_operator(rng, 2 + trial % 2, 3, 2, 1 + trial % 3);
    OperatorSpec back = OperatorSpec::parse(op.print());
    REQUIRE(back.terms().size() == op.terms().size());
    for (const auto& [alpha, mat] : op.terms()) {
      auto it = back.terms().find(alpha);
      REQUIRE(it != back.terms().end());
      CHECK((it->second - mat).norm() == 0.0);
    }
  }
}

TEST_CASE("builtin div d=3 m=1") {
  OperatorSpec op = builtin_operator("div", 3, 1);
  CHECK(op.N() == 3);
  CHECK(op.n() == 1);
  CHECK(op.k() == 1);
}

TEST_CASE("builtin curl d=2 m=2 rows pick the right derivatives") {
  OperatorSpec op = builtin_operator("curl", 2, 2);
  CHECK(op.N() == 4);
  CHECK(op.n() == 2);
  // components (u11, u12, u21, u22); rows i: d1 u_{i2} - d2 u_{i1}
  MultiIndex d1{{1, 0}}, d2{{0, 1}};
  Eigen::MatrixXd A1 = op.terms().at(d1);
  Eigen::MatrixXd A2 = op.terms().at(d2);
  Eigen::MatrixXd expect1(2, 4), expect2(2, 4);
  expect1 << 0, 1, 0, 0, 0, 0, 0, 1;
  expect2 << -1, 0, 0, 0, 0, 0, -1, 0;
  CHECK((A1 - expect1).norm() == 0.0);
  CHECK((A2 - expect2).norm() == 0.0);
}

TEST_CASE("builtin curlcurl d=2 matches the reduced single equation") {
  OperatorSpec op = builtin_operator("curlcurl", 2);
  OperatorSpec ref = OperatorSpec::parse(curlcurl2_text());
  CHECK(op.print() == ref.print());
}

TEST_CASE("builtin curlcurl d=3 has the Saint-Venant shape") {
  OperatorSpec op = builtin_operator("curlcurl", 3);
  CHECK(op.N() == 6);
  CHECK(op.n() == 6);
  CHECK(op.k() == 2);
}

TEST_CASE("unknown builtin name") {
  CHECK_THROWS_WITH_AS(builtin_operator("gradcurl", 2, 1), doctest::Contains("UnknownName"),
                       Error);
}

TEST_CASE("principal symbol of div at (3,4)") {
  OperatorSpec op = builtin_operator("div", 2, 1);
  Eigen::VectorXd xi(2);
  xi << 3, 4;
  SymbolMatrix M = principal_symbol(op, xi);
  CHECK(M.real_part(0, 0) == 3.0);
  CHECK(M.real_part(0, 1) == 4.0);
  CHECK(M.phase_power == 1);
}

TEST_CASE("principal symbol of scalar curl at e1") {
  OperatorSpec op = builtin_operator("curl", 2, 1);
  Eigen::VectorXd xi(2);
  xi << 1, 0;
  SymbolMatrix M = principal_symbol(op, xi);
  // d1 u2 - d2 u1 -> [0, 1] at xi = e1
  CHECK(M.real_part(0, 0) == 0.0);
  CHECK(M.real_part(0, 1) == 1.0);
}

TEST_CASE("principal symbol of curlcurl at (1,1)") {
  OperatorSpec op = builtin_operator("curlcurl", 2);
  Eigen::VectorXd xi(2);
  xi << 1, 1;
  SymbolMatrix M = principal_symbol(op, xi);
  CHECK(M.real_part(0, 0) == 1.0);
  CHECK(M.real_part(0, 1) == -2.0);
  CHECK(M.real_part(0, 2) == 1.0);
}

TEST_CASE("symbol at xi = 0 is the zero matrix") {
  OperatorSpec op = builtin_operator("div", 2, 1);
  SymbolMatrix M = principal_symbol(op, Eigen::VectorXd::Zero(2));
  CHECK(M.real_part.norm() == 0.0);
}

TEST_CASE("symbol homogeneity M(t xi) = t^k M(xi)") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    OperatorSpec op = random_operator(rng, 2, 3, 2, 1 + trial % 3);
    Eigen::VectorXd xi(2);
    xi << rng.normal(), rng.normal();
    double t = std::exp(rng.normal());
    Eigen::MatrixXd lhs = principal_symbol(op, Eigen::VectorXd(t * xi)).real_part;
    Eigen::MatrixXd rhs = principal_symbol(op, xi).real_part;
    double tk = std::pow(t, op.k());
    CHECK((lhs - tk * rhs).norm() <= 1e-12 * rhs.norm() * tk);
  }
}

TEST_CASE("rescale scales lower-order terms by r^{k-h}") {
  // A0 Laplacian + B d1, k = 2
  Eigen::MatrixXd A0(1, 2), B(1, 2);
  A0 << 1, 0;
  B << 0, 1;
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  terms[MultiIndex{{2, 0}}] = A0;
  terms[MultiIndex{{0, 2}}] = A0;
  terms[MultiIndex{{1, 0}}] = B;
  OperatorSpec op(2, 2, 1, 2, std::move(terms));
  OperatorSpec scaled = rescale_operator(op, 0.1);
  CHECK((scaled.terms().at(MultiIndex{{2, 0}}) - A0).norm() == 0.0);
  CHECK((scaled.terms().at(MultiIndex{{1, 0}}) - 0.1 * B).norm() == 0.0);
}

TEST_CASE("rescale is the identity on homogeneous operators and at r=1") {
  OperatorSpec op = builtin_operator("curlcurl", 2);
  CHECK(rescale_operator(op, 0.37).print() == op.print());
  Eigen::MatrixXd A0(1, 2), B(1, 2);
  A0 << 1, 0;
  B << 0, 1;
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  terms[MultiIndex{{2, 0}}] = A0;
  terms[MultiIndex{{0, 2}}] = A0;
  terms[MultiIndex{{1, 0}}] = B;
  OperatorSpec mixed(2, 2, 1, 2, std::move(terms));
  CHECK(rescale_operator(mixed, 1.0).print() == mixed.print());
}

TEST_CASE("rescale round-trip r then 1/r") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    OperatorSpec op = random_operator(rng, 2, 3, 2, 2);
    double r = std::exp(rng.normal());
    OperatorSpec back = rescale_operator(rescale_operator(op, r), 1.0 / r);
    for (const auto& [alpha, mat] : op.terms()) {
      Eigen::MatrixXd diff = back.terms().at(alpha) - mat;
      CHECK(diff.norm() <= 1e-14 * mat.norm());
    }
  }
}

TEST_CASE("rescale rejects nonpositive scales") {
  OperatorSpec op = builtin_operator("div", 2, 1);
  CHECK_THROWS_WITH_AS(rescale_operator(op, 0.0), doctest::Contains("NonPositiveScale"), Error);
  CHECK_THROWS_WITH_AS(rescale_operator(op, -2.0), doctest::Contains("NonPositiveScale"), Error);
}

TEST_CASE("laplace_coeff operator") {
  Eigen::MatrixXd A0(1, 2);
  A0 << 1, 0;
  OperatorSpec op = laplace_coeff_operator(2, A0);
  CHECK(op.k() == 2);
  CHECK(op.N() == 2);
  CHECK(op.n() == 1);
  Eigen::VectorXd xi(2);
  xi << 3, 4;
  // |xi|^2 A0
  Eigen::MatrixXd M = principal_symbol(op, xi).real_part;
  CHECK(M(0, 0) == doctest::Approx(25.0));
  CHECK(M(0, 1) == 0.0);
}

TEST_CASE("full symbol carries the (2 pi i)^h phases") {
  OperatorSpec op = builtin_operator("div", 2, 1);
  Eigen::VectorXd xi(2);
  xi << 1, 0;
  Eigen::MatrixXcd A = full_symbol(op, xi);
  CHECK(std::abs(A(0, 0) - std::complex<double>(0.0, 2.0 * M_PI)) < 1e-14);
  CHECK(std::abs(A(0, 1)) == 0.0);
}
