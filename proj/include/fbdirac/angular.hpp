#pragma once

#include "fbdirac/precision.hpp"
#include "fbdirac/specfun.hpp"

#include <array>
#include <cstdlib>
#include <map>

namespace fbdirac::angular {

// Angular momenta are carried as doubled integers so half-integer values
// stay exact.

inline bool triangle_ok(int two_a, int two_b, int two_c) {
  return two_c >= std::abs(two_a - two_b) && two_c <= two_a + two_b &&
         (two_a + two_b + two_c) % 2 == 0;
}

//! Wigner 3j symbol from the Racah sum, evaluated in exact rational
//! arithmetic with one square root at the end.
inline BigReal wigner_3j(const PrecisionCtx &ctx, int two_j1, int two_j2,
                         int two_j3, int two_m1, int two_m2, int two_m3) {
  ScopedPrecision guard(ctx.digits + 8);
  if (two_m1 + two_m2 + two_m3 != 0 || !triangle_ok(two_j1, two_j2, two_j3))
    return BigReal(0);
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 ||
      std::abs(two_m3) > two_j3)
    return BigReal(0);
  if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 ||
      (two_j3 + two_m3) % 2 != 0)
    return BigReal(0);

  auto fact = [](int two_x) -> BigInt {
    return specfun::factorial_int(static_cast<unsigned>(two_x / 2));
  };

  const int t_min = std::max(
      {0, (two_j2 - two_j3 - two_m1) / 2, (two_j1 - two_j3 + two_m2) / 2});
  const int t_max = std::min({(two_j1 + two_j2 - two_j3) / 2,
                              (two_j1 - two_m1) / 2, (two_j2 + two_m2) / 2});
  if (t_min > t_max)
    return BigReal(0);

  BigRat series = 0;
  for (int t = t_min; t <= t_max; ++t) {
    BigInt den = specfun::factorial_int(static_cast<unsigned>(t));
    den *= fact(two_j3 - two_j2 + two_m1 + 2 * t);
    den *= fact(two_j3 - two_j1 - two_m2 + 2 * t);
    den *= fact(two_j1 + two_j2 - two_j3 - 2 * t);
    den *= fact(two_j1 - two_m1 - 2 * t);
    den *= fact(two_j2 + two_m2 - 2 * t);
    const BigRat term = BigRat(1) / BigRat(den);
    series += (t % 2 == 0) ? term : -term;
  }

  BigRat norm = BigRat(fact(two_j1 + two_j2 - two_j3)) *
                BigRat(fact(two_j1 - two_j2 + two_j3)) *
                BigRat(fact(-two_j1 + two_j2 + two_j3)) /
                BigRat(fact(two_j1 + two_j2 + two_j3 + 2));
  norm *= BigRat(fact(two_j1 + two_m1)) * BigRat(fact(two_j1 - two_m1)) *
          BigRat(fact(two_j2 + two_m2)) * BigRat(fact(two_j2 - two_m2)) *
          BigRat(fact(two_j3 + two_m3)) * BigRat(fact(two_j3 - two_m3));

  BigReal value = BigReal(series) * sqrt(BigReal(norm));
  const int phase_exp = (two_j1 - two_j2 - two_m3) / 2;
  if (phase_exp % 2 != 0)
    value = -value;
  return round_to(ctx, value);
}

inline unsigned l_of_kappa(int kappa) {
  return kappa > 0 ? static_cast<unsigned>(kappa)
                   : static_cast<unsigned>(-kappa - 1);
}

inline int two_j_of_kappa(int kappa) {
  return 2 * std::abs(kappa) - 1;
}

//! Reduced matrix element <kappa_a || C^K || kappa_b> of the normalized
//! spherical tensor, zero unless l_a + l_b + K is even.
inline BigReal ck_kk(const PrecisionCtx &ctx, unsigned K, int kappa_a,
                     int kappa_b) {
  if ((l_of_kappa(kappa_a) + l_of_kappa(kappa_b) + K) % 2 != 0)
    return BigReal(0);
  const int two_ja = two_j_of_kappa(kappa_a);
  const int two_jb = two_j_of_kappa(kappa_b);
  ScopedPrecision guard(ctx);
  const BigReal tj = wigner_3j(ctx, two_ja, 2 * static_cast<int>(K), two_jb,
                               -1, 0, 1);
  BigReal value = sqrt(BigReal(two_ja + 1) * (two_jb + 1)) * tj;
  if (((two_ja + 1) / 2) % 2 != 0) // (-1)^(ja + 1/2)
    value = -value;
  return value;
}

//! Projection sums of the second-order squared amplitude. For photon
//! multipole ranks (K1, K2) between states (ji, jf), and an intermediate
//! pair (j, j'), this is
//!   sum over all projections of chain_t(j) * chain_t'(j'),
//! where chain_D strings the 3j factors of <f|T2|nu><nu|T1|i> and chain_X
//! those of <f|T1|nu><nu|T2|i>, Wigner-Eckart phases included.
enum class TermOrder { Direct, Exchange };

inline BigReal projection_sum(const PrecisionCtx &ctx, int two_ji, int two_jf,
                              unsigned K1, unsigned K2, int two_jnu,
                              TermOrder t, int two_jnu_p, TermOrder t_p) {
  ScopedPrecision guard(ctx.digits + 8);
  const int two_K1 = 2 * static_cast<int>(K1);
  const int two_K2 = 2 * static_cast<int>(K2);

  auto chain = [&](TermOrder ord, int two_jn, int two_M1, int two_M2,
                   int two_mi, int two_mf) -> BigReal {
    // Direct: photon-1 operator acts on the i side.
    const int two_Ka = (ord == TermOrder::Direct) ? two_K2 : two_K1;
    const int two_Kb = (ord == TermOrder::Direct) ? two_K1 : two_K2;
    const int two_Ma = (ord == TermOrder::Direct) ? two_M2 : two_M1;
    const int two_Mb = (ord == TermOrder::Direct) ? two_M1 : two_M2;
    const int two_mn = two_mf - two_Ma;
    if (std::abs(two_mn) > two_jn)
      return BigReal(0);
    BigReal v = wigner_3j(ctx, two_jf, two_Ka, two_jn, -two_mf, two_Ma,
                          two_mn) *
                wigner_3j(ctx, two_jn, two_Kb, two_ji, -two_mn, two_Mb,
                          two_mi);
    const int phase = ((two_jf - two_mf) + (two_jn - two_mn)) / 2;
    if (phase % 2 != 0)
      v = -v;
    return v;
  };

  BigReal total = 0;
  for (int two_M1 = -two_K1; two_M1 <= two_K1; two_M1 += 2)
    for (int two_M2 = -two_K2; two_M2 <= two_K2; two_M2 += 2)
      for (int two_mi = -two_ji; two_mi <= two_ji; two_mi += 2) {
        const int two_mf = two_mi + two_M1 + two_M2;
        if (std::abs(two_mf) > two_jf)
          continue;
        total += chain(t, two_jnu, two_M1, two_M2, two_mi, two_mf) *
                 chain(t_p, two_jnu_p, two_M1, two_M2, two_mi, two_mf);
      }
  return round_to(ctx, total);
}

//! Memoized projection sums (pure angular data, reused across nodes).
class ProjectionTable {
public:
  explicit ProjectionTable(const PrecisionCtx &ctx) : ctx_(ctx) {}

  const BigReal &get(int two_ji, int two_jf, unsigned K1, unsigned K2,
                     int two_jnu, TermOrder t, int two_jnu_p, TermOrder t_p) {
    const Key key{two_ji, two_jf, static_cast<int>(K1), static_cast<int>(K2),
                  two_jnu, t == TermOrder::Exchange, two_jnu_p,
                  t_p == TermOrder::Exchange};
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_
               .emplace(key, projection_sum(ctx_, two_ji, two_jf, K1, K2,
                                            two_jnu, t, two_jnu_p, t_p))
               .first;
    return it->second;
  }

private:
  using Key = std::array<int, 8>;
  PrecisionCtx ctx_;
  std::map<Key, BigReal> cache_;
};

} // namespace fbdirac::angular
