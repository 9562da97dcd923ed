#pragma once

#include "fbdirac/precision.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace fbdirac::specfun {

inline constexpr std::size_t kSeriesCap = 100000;

//! Exact factorial as an integer.
inline BigInt factorial_int(unsigned n) {
  BigInt f = 1;
  for (unsigned i = 2; i <= n; ++i)
    f *= i;
  return f;
}

//! Exact binomial coefficient as an integer; 0 outside 0 <= k <= n.
inline BigInt binomial_int(unsigned n, long long k) {
  if (k < 0 || k > static_cast<long long>(n))
    return BigInt(0);
  BigInt num = 1, den = 1;
  auto kk = static_cast<unsigned>(k);
  if (kk > n - kk)
    kk = n - kk;
  for (unsigned i = 1; i <= kk; ++i) {
    num *= (n - kk + i);
    den *= i;
  }
  return num / den;
}

//! BigReal holding the integer exactly, regardless of ctx digit count.
inline BigReal from_exact_int(const PrecisionCtx &ctx, const BigInt &z) {
  const unsigned long bits = (z == 0) ? 1 : mp::msb(abs(z)) + 1;
  const auto digits10 = static_cast<unsigned>(bits / 3.32) + 3;
  ScopedPrecision guard(std::max(ctx.digits, digits10));
  return BigReal(z);
}

//! Exact rational -> BigReal at ctx precision.
inline BigReal from_rational(const PrecisionCtx &ctx, const BigRat &q) {
  ScopedPrecision guard(ctx);
  return BigReal(q);
}

inline BigReal binomial(const PrecisionCtx &ctx, unsigned n, long long k) {
  return from_exact_int(ctx, binomial_int(n, k));
}

//! Rising factorial a(a+1)...(a+s-1); 1 for s = 0.
inline BigReal pochhammer(const PrecisionCtx &ctx, const BigReal &a,
                          unsigned s) {
  ScopedPrecision guard(ctx);
  BigReal p = 1;
  for (unsigned i = 0; i < s; ++i)
    p *= (a + i);
  return p;
}

inline bool is_integer(const BigReal &x) {
  return x == floor(x);
}

inline bool is_nonpositive_integer(const BigReal &x) {
  return x <= 0 && is_integer(x);
}

inline BigReal gamma(const PrecisionCtx &ctx, const BigReal &x) {
  ScopedPrecision guard(ctx);
  if (is_nonpositive_integer(x))
    throw PoleError("gamma: pole at nonpositive integer " + to_full_string(x));
  return tgamma(x);
}

namespace detail {

// Power series for the lower incomplete beta,
//   B(x;h,k) = x^h sum_s (1-k)_s / (s! (h+s)) x^s,
// convergent for |x| < 1 (terminating when k is a positive integer).
inline BigReal inc_beta_series(const PrecisionCtx &ctx, const BigReal &x,
                               const BigReal &h, const BigReal &k) {
  const BigReal tol = pow10(-static_cast<int>(ctx.digits) - 4);
  BigReal coeff = 1; // (1-k)_s / s!
  BigReal sum = coeff / h;
  for (std::size_t s = 0; s < kSeriesCap; ++s) {
    coeff *= (1 - k + static_cast<int>(s)) * x / static_cast<int>(s + 1);
    if (coeff == 0)
      break;
    const BigReal term = coeff / (h + static_cast<int>(s) + 1);
    sum += term;
    if (abs(term) < tol * abs(sum))
      return pow(x, h) * sum;
  }
  if (abs(coeff) > tol * abs(sum))
    throw ConvergenceError("inc_beta: series cap exceeded");
  return pow(x, h) * sum;
}

} // namespace detail

//! Lower incomplete beta B(x; h, k) = int_0^x t^(h-1) (1-t)^(k-1) dt.
inline BigReal inc_beta(const PrecisionCtx &ctx, const BigReal &x,
                        const BigReal &h, const BigReal &k) {
  ScopedPrecision guard(ctx);
  if (x < 0 || x > 1)
    throw DomainError("inc_beta: x outside [0,1]");
  if (h <= 0)
    throw DomainError("inc_beta: h must be positive");
  if (x == 0)
    return BigReal(0);
  if (x == 1) {
    if (k <= 0)
      throw DomainError("inc_beta: divergent at x = 1 for k <= 0");
    return tgamma(h) * tgamma(k) / tgamma(h + k);
  }
  // Complement form keeps the series argument small near x = 1.
  if (k > 0 && x > (h + 1) / (h + k + 2)) {
    const BigReal complete = tgamma(h) * tgamma(k) / tgamma(h + k);
    return complete - detail::inc_beta_series(ctx, 1 - x, k, h);
  }
  return detail::inc_beta_series(ctx, x, h, k);
}

//! Gauss hypergeometric series 2F1(a, b; c; x). Terminating cases (a or b
//! a nonpositive integer) are evaluated as exact finite sums.
inline BigReal hyp2f1(const PrecisionCtx &ctx, const BigReal &a,
                      const BigReal &b, const BigReal &c, const BigReal &x) {
  ScopedPrecision guard(ctx);
  if (x == 0)
    return BigReal(1);

  long long n_terminate = -1;
  if (is_nonpositive_integer(a))
    n_terminate = static_cast<long long>(-a);
  if (is_nonpositive_integer(b)) {
    const auto nb = static_cast<long long>(-b);
    if (n_terminate < 0 || nb < n_terminate)
      n_terminate = nb;
  }
  if (n_terminate < 0) {
    if (is_nonpositive_integer(c))
      throw PoleError("hyp2f1: c is a nonpositive integer");
    if (abs(x) > 1)
      throw DomainError("hyp2f1: series requires |x| <= 1");
  }

  const BigReal tol = pow10(-static_cast<int>(ctx.digits) - 4);
  BigReal term = 1, sum = 1;
  for (std::size_t s = 0; s < kSeriesCap; ++s) {
    if (n_terminate >= 0 && static_cast<long long>(s) >= n_terminate)
      return sum;
    term *= (a + static_cast<int>(s)) * (b + static_cast<int>(s)) * x /
            ((c + static_cast<int>(s)) * static_cast<int>(s + 1));
    sum += term;
    if (n_terminate < 0 && abs(term) < tol * abs(sum))
      return sum;
  }
  throw ConvergenceError("hyp2f1: series cap exceeded");
}

namespace detail {

struct SeriesResult {
  BigReal value;
  BigReal max_term;
};

inline SeriesResult reg_hyp2f3_sum(unsigned digits, const BigReal &a1,
                                   const BigReal &a2, const BigReal &b1,
                                   const BigReal &b2, const BigReal &b3,
                                   const BigReal &x) {
  ScopedPrecision guard(digits);
  const BigReal tol = pow10(-static_cast<int>(digits) - 4);

  long long n_terminate = -1;
  if (is_nonpositive_integer(a1))
    n_terminate = static_cast<long long>(-a1);
  if (is_nonpositive_integer(a2)) {
    const auto nb = static_cast<long long>(-a2);
    if (n_terminate < 0 || nb < n_terminate)
      n_terminate = nb;
  }

  // Term s:  (a1)_s (a2)_s x^s / (s! G(b1+s) G(b2+s) G(b3+s)).
  auto direct_term = [&](long long s) {
    PrecisionCtx c(digits);
    BigReal t = pochhammer(c, a1, static_cast<unsigned>(s)) *
                pochhammer(c, a2, static_cast<unsigned>(s));
    t *= pow(x, static_cast<int>(s));
    t /= BigReal(factorial_int(static_cast<unsigned>(s)));
    for (const BigReal *b : {&b1, &b2, &b3}) {
      const BigReal bs = *b + static_cast<int>(s);
      t = is_nonpositive_integer(bs) ? BigReal(0) : t / tgamma(bs);
    }
    return t;
  };

  BigReal term = direct_term(0);
  BigReal sum = term;
  BigReal max_term = abs(term);
  unsigned small_streak = 0;
  for (std::size_t s = 0; s < kSeriesCap; ++s) {
    if (n_terminate >= 0 && static_cast<long long>(s + 1) > n_terminate)
      return {sum, max_term};
    bool pole = false;
    for (const BigReal *b : {&b1, &b2, &b3})
      if (is_nonpositive_integer(*b + static_cast<int>(s)))
        pole = true;
    if (pole || term == 0) {
      term = direct_term(static_cast<long long>(s + 1));
    } else {
      term *= (a1 + static_cast<int>(s)) * (a2 + static_cast<int>(s)) * x /
              ((b1 + static_cast<int>(s)) * (b2 + static_cast<int>(s)) *
               (b3 + static_cast<int>(s)) * static_cast<int>(s + 1));
    }
    sum += term;
    if (abs(term) > max_term)
      max_term = abs(term);
    small_streak = (abs(term) < tol * (abs(sum) + max_term * tol))
                       ? small_streak + 1
                       : 0;
    if (small_streak >= 2)
      return {sum, max_term};
  }
  throw ConvergenceError("reg_hyp2f3: series cap exceeded");
}

} // namespace detail

//! Regularized hypergeometric 2F~3: the 2F3 series divided by
//! G(b1)G(b2)G(b3), summed term-wise so parameter poles never appear.
//! Negative arguments make the series alternate; the summation measures the
//! cancellation and re-runs itself with guard digits until the requested
//! accuracy is actually met.
inline BigReal reg_hyp2f3(const PrecisionCtx &ctx, const BigReal &a1,
                          const BigReal &a2, const BigReal &b1,
                          const BigReal &b2, const BigReal &b3,
                          const BigReal &x) {
  unsigned work = ctx.digits + 8;
  for (int attempt = 0; attempt < 6; ++attempt) {
    auto r = detail::reg_hyp2f3_sum(work, a1, a2, b1, b2, b3, x);
    if (r.value == 0 && r.max_term == 0)
      return round_to(ctx, r.value);
    const BigReal loss =
        (r.value == 0) ? BigReal(r.max_term) : abs(r.max_term / r.value);
    const long lost_digits =
        loss <= 1 ? 0L : static_cast<long>(log10(loss)) + 1;
    if (lost_digits + static_cast<long>(ctx.digits) + 4 <=
        static_cast<long>(work))
      return round_to(ctx, r.value);
    work = static_cast<unsigned>(ctx.digits + lost_digits + 8);
  }
  throw ConvergenceError("reg_hyp2f3: cancellation exceeds guard budget");
}

//! Spherical Bessel function of the first kind, x >= 0. Small arguments
//! (x < max(L,2)) go through the ascending series; larger ones through the
//! forward recurrence, which is stable for L < x.
inline BigReal sph_bessel_j(const PrecisionCtx &ctx, unsigned L,
                            const BigReal &x) {
  ScopedPrecision guard(ctx);
  if (x < 0)
    throw DomainError("sph_bessel_j: negative argument");
  if (x == 0)
    return BigReal(L == 0 ? 1 : 0);

  if (x < std::max<unsigned>(L, 2)) {
    // x^L/(2L+1)!! * sum_s (-x^2/2)^s / (s! (2L+3)(2L+5)...(2L+2s+1))
    const BigReal tol = pow10(-static_cast<int>(ctx.digits) - 4);
    const BigReal mx2 = -x * x / 2;
    BigReal term = 1, sum = 1;
    for (std::size_t s = 0; s < kSeriesCap; ++s) {
      term *= mx2 / (static_cast<int>(s + 1) *
                     BigReal(2 * L + 2 * static_cast<unsigned>(s) + 3));
      sum += term;
      if (abs(term) < tol * abs(sum))
        break;
    }
    BigInt dfac = 1; // (2L+1)!!
    for (unsigned i = 3; i <= 2 * L + 1; i += 2)
      dfac *= i;
    return pow(x, static_cast<int>(L)) / BigReal(dfac) * sum;
  }

  BigReal jm = sin(x) / x; // j_0
  if (L == 0)
    return jm;
  BigReal j = jm / x - cos(x) / x; // j_1
  for (unsigned l = 1; l < L; ++l) {
    const BigReal jn = BigReal(2 * l + 1) / x * j - jm;
    jm = j;
    j = jn;
  }
  return j;
}

//! Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n at
//! working precision so any digit count is supported.
inline std::vector<std::pair<BigReal, BigReal>>
gauss_legendre_nodes(const PrecisionCtx &ctx, unsigned n) {
  if (n == 0)
    throw DomainError("gauss_legendre_nodes: n must be positive");
  ScopedPrecision guard(ctx.digits + 8);
  const BigReal pi = 4 * atan(BigReal(1));
  const BigReal tol = pow10(-static_cast<int>(ctx.digits) - 6);

  // Legendre P_n and its derivative by the three-term recurrence.
  auto legendre = [&](const BigReal &t) {
    BigReal p0 = 1, p1 = t;
    if (n == 1)
      return std::pair<BigReal, BigReal>{p1, p0};
    for (unsigned k = 2; k <= n; ++k) {
      const BigReal p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const BigReal dp = n * (t * p1 - p0) / (t * t - 1);
    return std::pair<BigReal, BigReal>{p1, dp};
  };

  std::vector<std::pair<BigReal, BigReal>> rule(n);
  for (unsigned i = 0; i < (n + 1) / 2; ++i) {
    BigReal t = cos(pi * (BigReal(4 * i + 3) / (4 * n + 2)));
    if (2 * i + 1 == n)
      t = 0;
    else {
      for (int iter = 0; iter < 200; ++iter) {
        auto [p, dp] = legendre(t);
        const BigReal dt = p / dp;
        t -= dt;
        if (abs(dt) < tol * (1 + abs(t)))
          break;
      }
    }
    auto [p, dp] = legendre(t);
    (void)p;
    const BigReal w = 2 / ((1 - t * t) * dp * dp);
    rule[i] = {-t, w};            // ascending: cos is decreasing in i
    rule[n - 1 - i] = {t, w};
  }
  for (auto &[x, w] : rule) {
    x = round_to(ctx, x);
    w = round_to(ctx, w);
  }
  return rule;
}

//! Gauss-Legendre rule mapped onto [a, b].
inline std::vector<std::pair<BigReal, BigReal>>
gauss_legendre_on(const PrecisionCtx &ctx, unsigned n, const BigReal &a,
                  const BigReal &b) {
  auto rule = gauss_legendre_nodes(ctx, n);
  ScopedPrecision guard(ctx);
  const BigReal mid = (a + b) / 2, half = (b - a) / 2;
  for (auto &[x, w] : rule) {
    x = mid + half * x;
    w *= half;
  }
  return rule;
}

} // namespace fbdirac::specfun
