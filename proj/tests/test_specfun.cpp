#include "fbdirac/specfun.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace fbdirac;
using namespace fbdirac::specfun;
using fbdirac::testing::integrate;
using fbdirac::testing::rel_close;

namespace {
const PrecisionCtx ctx34(34);
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(ctx34, 10, 0) == 1);
  CHECK(binomial(ctx34, 10, 5) == 252);
  CHECK(binomial(ctx34, 10, 11) == 0);
  CHECK(binomial(ctx34, 10, -1) == 0);
  // stays exact well past the 34-digit working precision
  const BigInt big = binomial_int(120, 60);
  const BigReal as_real = from_exact_int(ctx34, big);
  CHECK(BigInt(as_real.convert_to<BigInt>()) == big);
  CHECK(as_real == BigReal(big, 60));
}

TEST_CASE("pochhammer") {
  CHECK(pochhammer(ctx34, BigReal(3), 0) == 1);
  CHECK(pochhammer(ctx34, BigReal(1), 5) == 120);
  CHECK(pochhammer(ctx34, BigReal("0.5"), 2) == BigReal("0.75"));
}

TEST_CASE("gamma function") {
  CHECK(gamma(ctx34, BigReal(1)) == 1);
  CHECK(gamma(ctx34, BigReal(5)) == 24);
  // reflection/duplication anchor: Gamma(1/2)^2 = pi
  const BigReal g = gamma(ctx34, BigReal("0.5"));
  const BigReal pi = 4 * atan(BigReal(1));
  CHECK(rel_close(g * g, pi, pow10(-32)));
  CHECK_THROWS_AS(gamma(ctx34, BigReal(0)), PoleError);
  CHECK_THROWS_AS(gamma(ctx34, BigReal(-3)), PoleError);
}

TEST_CASE("incomplete beta") {
  CHECK(inc_beta(ctx34, BigReal(0), BigReal(2), BigReal(3)) == 0);
  CHECK(rel_close(inc_beta(ctx34, BigReal(1), BigReal(2), BigReal(3)),
                  BigReal(1) / 12, pow10(-32)));
  CHECK(rel_close(inc_beta(ctx34, BigReal("0.5"), BigReal(1), BigReal(1)),
                  BigReal("0.5"), pow10(-32)));
  CHECK_THROWS_AS(inc_beta(ctx34, BigReal(2), BigReal(1), BigReal(1)),
                  DomainError);
  CHECK_THROWS_AS(inc_beta(ctx34, BigReal("0.5"), BigReal(0), BigReal(1)),
                  DomainError);
}

TEST_CASE("incomplete beta against quadrature at random parameters") {
  std::mt19937 rng(7121);
  std::uniform_real_distribution<double> ux(0.05, 0.45), up(0.5, 6.0);
  for (int rep = 0; rep < 4; ++rep) {
    // interior interval [a,b] keeps the oracle away from the branch points
    const BigReal a(ux(rng)), b(ux(rng) + BigReal("0.5"));
    const BigReal h(up(rng)), k(up(rng));
    const BigReal quad = integrate(
        ctx34,
        [&](const BigReal &t) {
          return pow(t, h - 1) * pow(1 - t, k - 1);
        },
        a, b, pow10(-28));
    CHECK(rel_close(inc_beta(ctx34, b, h, k) - inc_beta(ctx34, a, h, k), quad,
                    pow10(-24)));
  }
  // complement identity at integer k (polynomial integrand, smooth at 1)
  const BigReal x("0.85"), h("2.5"), k(3);
  const BigReal rest = integrate(
      ctx34,
      [&](const BigReal &t) { return pow(t, h - 1) * pow(1 - t, k - 1); },
      x, BigReal(1), pow10(-28));
  CHECK(rel_close(inc_beta(ctx34, x, h, k) + rest,
                  inc_beta(ctx34, BigReal(1), h, k), pow10(-24)));
}

TEST_CASE("gauss hypergeometric 2F1") {
  CHECK(hyp2f1(ctx34, BigReal(2), BigReal(3), BigReal(4), BigReal(0)) == 1);
  const BigReal x("0.37");
  CHECK(rel_close(hyp2f1(ctx34, BigReal(-1), BigReal(1), BigReal(1), x), 1 - x,
                  pow10(-32)));
  // 2F1(1,1;2;x) = -log(1-x)/x
  const BigReal half("0.5");
  CHECK(rel_close(hyp2f1(ctx34, BigReal(1), BigReal(1), BigReal(2), half),
                  2 * log(BigReal(2)), pow10(-30)));
  // terminating case equals the explicit finite sum
  BigReal finite = 0;
  for (unsigned s = 0; s <= 2; ++s)
    finite += pochhammer(ctx34, BigReal(-2), s) *
              pochhammer(ctx34, BigReal(5), s) /
              (pochhammer(ctx34, BigReal(3), s) *
               BigReal(factorial_int(s))) *
              pow(half, static_cast<int>(s));
  CHECK(rel_close(hyp2f1(ctx34, BigReal(-2), BigReal(5), BigReal(3), half),
                  finite, pow10(-30)));
}

TEST_CASE("regularized 2F3") {
  // constant term
  const BigReal b1("1.5"), b2(11), b3("11.5");
  const BigReal at0 =
      reg_hyp2f3(ctx34, BigReal(1), BigReal(2), b1, b2, b3, BigReal(0));
  CHECK(rel_close(at0,
                  1 / (gamma(ctx34, b1) * gamma(ctx34, b2) * gamma(ctx34, b3)),
                  pow10(-30)));

  // direct series oracle at elevated digits: all parameters 1 collapses the
  // terms to x^s/(s!)^2; at x = 1 the sum is 2.2795853...
  PrecisionCtx ctx50(50);
  BigReal oracle = 0;
  {
    ScopedPrecision guard(ctx50);
    for (int s = 0; s < 60; ++s) {
      const BigReal f = BigReal(factorial_int(static_cast<unsigned>(s)));
      oracle += 1 / (f * f);
    }
  }
  const BigReal one(1);
  CHECK(rel_close(reg_hyp2f3(ctx34, one, one, one, one, one, one), oracle,
                  pow10(-30)));
  CHECK(rel_close(oracle, BigReal("2.2795853"), pow10(-7)));

  // alternating-argument case against quadrature:
  // int_0^R (1-r/R)^(2k) j_0(w r / c) dr for k=10, matching the analytic
  // closed form R * pi (2k)!/2^(2k+2) * 2F~3({1/2,1},{3/2,k+1,k+3/2},-z^2/4)
  const unsigned k = 10;
  const BigReal R(50), c("137.0359895"), omega("0.4");
  const BigReal z = omega * R / c;
  const BigReal analytic =
      R * BigReal(4) * atan(BigReal(1)) *
      BigReal(factorial_int(2 * k)) / pow(BigReal(2), 2 * (int(k) + 1)) *
      reg_hyp2f3(ctx34, BigReal(1) / 2, BigReal(1), BigReal(3) / 2,
                 BigReal(k + 1), BigReal(2 * k + 3) / 2, -z * z / 4);
  const BigReal quad = integrate(
      ctx34,
      [&](const BigReal &r) {
        return pow(1 - r / R, 2 * static_cast<int>(k)) *
               sph_bessel_j(ctx34, 0, omega * r / c);
      },
      BigReal(0), R, pow10(-30));
  CHECK(rel_close(analytic, quad, pow10(-20)));
}

TEST_CASE("spherical bessel") {
  CHECK(sph_bessel_j(ctx34, 0, BigReal(0)) == 1);
  CHECK(sph_bessel_j(ctx34, 1, BigReal(0)) == 0);
  CHECK(sph_bessel_j(ctx34, 5, BigReal(0)) == 0);
  const BigReal one(1);
  CHECK(rel_close(sph_bessel_j(ctx34, 1, one), sin(one) - cos(one),
                  pow10(-32)));
}

TEST_CASE("spherical bessel three-term recurrence") {
  for (double xd : {0.1, 0.7, 3.0, 20.0, 100.0}) {
    const BigReal x(xd);
    for (unsigned L = 1; L <= 6; ++L) {
      const BigReal lhs = sph_bessel_j(ctx34, L - 1, x) +
                          sph_bessel_j(ctx34, L + 1, x);
      const BigReal rhs = BigReal(2 * L + 1) * sph_bessel_j(ctx34, L, x) / x;
      CHECK(rel_close(lhs, rhs, pow10(-26)));
    }
  }
}

TEST_CASE("gauss-legendre textbook rules") {
  const auto r1 = gauss_legendre_nodes(ctx34, 1);
  REQUIRE(r1.size() == 1);
  CHECK(abs(r1[0].first) < pow10(-30));
  CHECK(rel_close(r1[0].second, BigReal(2), pow10(-30)));

  const auto r2 = gauss_legendre_nodes(ctx34, 2);
  REQUIRE(r2.size() == 2);
  CHECK(rel_close(r2[1].first, 1 / sqrt(BigReal(3)), pow10(-30)));
  CHECK(rel_close(r2[0].second, BigReal(1), pow10(-30)));
}

TEST_CASE("gauss-legendre polynomial exactness") {
  for (unsigned n : {5u, 15u}) {
    const auto rule = gauss_legendre_nodes(ctx34, n);
    BigReal wsum = 0;
    for (const auto &[x, w] : rule)
      wsum += w;
    CHECK(rel_close(wsum, BigReal(2), pow10(-32)));
    for (unsigned m = 0; m <= 2 * n - 1; ++m) {
      BigReal q = 0;
      for (const auto &[x, w] : rule)
        q += w * pow(x, static_cast<int>(m));
      const BigReal exact =
          (m % 2 == 1) ? BigReal(0) : BigReal(2) / static_cast<int>(m + 1);
      if (m % 2 == 1)
        CHECK(abs(q) < pow10(-32));
      else
        CHECK(rel_close(q, exact, pow10(-32)));
    }
  }
  // degree-28 monomial integrated exactly by the 15-point rule
  const auto r15 = gauss_legendre_nodes(ctx34, 15);
  BigReal q = 0;
  for (const auto &[x, w] : r15)
    q += w * pow(x, 28);
  CHECK(rel_close(q, BigReal(2) / 29, pow10(-32)));
}
