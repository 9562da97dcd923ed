#include "fbdirac/linalg.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace fbdirac;
using namespace fbdirac::linalg;
using fbdirac::testing::rel_close;

namespace {
const PrecisionCtx ctx34(34);

Matrix random_spd(std::mt19937 &rng, std::size_t n, double diag_boost) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = BigReal(u(rng));
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      BigReal acc = 0;
      for (std::size_t k = 0; k < n; ++k)
        acc += m(k, i) * m(k, j);
      s(i, j) = acc + ((i == j) ? BigReal(diag_boost) : BigReal(0));
    }
  return s;
}
} // namespace

TEST_CASE("trivial 2x2 diagonal problem") {
  Matrix a(2, 2), b = Matrix::identity(2);
  a(0, 0) = 3;
  a(1, 1) = -7;
  auto sol = solve_generalized(ctx34, a, b);
  REQUIRE(sol.values.size() == 2);
  CHECK(rel_close(sol.values[0], BigReal(-7), pow10(-30)));
  CHECK(rel_close(sol.values[1], BigReal(3), pow10(-30)));
  CHECK(abs(abs(sol.vectors(1, 0)) - 1) < pow10(-30));
  CHECK(abs(abs(sol.vectors(0, 1)) - 1) < pow10(-30));
}

TEST_CASE("jacobi on a known symmetric matrix") {
  Matrix s(2, 2);
  s(0, 0) = 2;
  s(0, 1) = 1;
  s(1, 0) = 1;
  s(1, 1) = 2;
  auto sol = eigen_jacobi(ctx34, s);
  CHECK(rel_close(sol.values[0], BigReal(1), pow10(-30)));
  CHECK(rel_close(sol.values[1], BigReal(3), pow10(-30)));
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  Matrix b = Matrix::identity(3);
  b(2, 2) = -1;
  CHECK_THROWS_AS(cholesky(ctx34, b), NotPositiveDefinite);
}

TEST_CASE("random SPD pair: residual and B-orthonormality") {
  std::mt19937 rng(991);
  for (int rep = 0; rep < 3; ++rep) {
    const std::size_t n = 6;
    Matrix a = random_spd(rng, n, 0.0);
    // make A merely symmetric, not definite
    a(0, 0) -= 5;
    Matrix b = random_spd(rng, n, double(n));

    auto sol = solve_generalized(ctx34, a, b);
    const BigReal norm_a = frobenius(a), norm_b = frobenius(b);
    const BigReal tol_res = pow10(6 - static_cast<int>(ctx34.digits));
    for (std::size_t c = 0; c < n; ++c) {
      Vector v(n);
      for (std::size_t i = 0; i < n; ++i)
        v[i] = sol.vectors(i, c);
      Vector av = mul(a, v), bv = mul(b, v);
      BigReal res = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const BigReal d = av[i] - sol.values[c] * bv[i];
        res += d * d;
      }
      CHECK(sqrt(res) <= tol_res * (norm_a + abs(sol.values[c]) * norm_b));
    }
    // v_i^T B v_j = delta_ij
    const BigReal tol_orth = pow10(4 - static_cast<int>(ctx34.digits));
    for (std::size_t c1 = 0; c1 < n; ++c1)
      for (std::size_t c2 = c1; c2 < n; ++c2) {
        Vector v1(n), v2(n);
        for (std::size_t i = 0; i < n; ++i) {
          v1[i] = sol.vectors(i, c1);
          v2[i] = sol.vectors(i, c2);
        }
        const BigReal g = dot(v1, mul(b, v2));
        if (c1 == c2)
          CHECK(abs(g - 1) < tol_orth);
        else
          CHECK(abs(g) < tol_orth);
      }
  }
}

TEST_CASE("eigenvalues ascend and match trace") {
  std::mt19937 rng(1234);
  Matrix a = random_spd(rng, 8, 1.0);
  auto sol = eigen_jacobi(ctx34, a);
  BigReal trace = 0, sum = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    trace += a(i, i);
    sum += sol.values[i];
    if (i > 0)
      CHECK(sol.values[i] >= sol.values[i - 1]);
  }
  CHECK(rel_close(trace, sum, pow10(-30)));
}
