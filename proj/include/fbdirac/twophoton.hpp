#pragma once

#include "fbdirac/angular.hpp"
#include "fbdirac/basis.hpp"
#include "fbdirac/dirac.hpp"
#include "fbdirac/linalg.hpp"
#include "fbdirac/precision.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fbdirac::twophoton {

//! Atomic unit of time in seconds; converts a.u. rates to 1/s.
inline const char *kAtomicTimeSeconds = "2.418884326505e-17";

enum class MultipoleType { Electric, Magnetic };

struct Multipole {
  MultipoleType type = MultipoleType::Electric;
  unsigned L = 1;

  bool operator==(const Multipole &o) const {
    return type == o.type && L == o.L;
  }
  std::string name() const {
    return (type == MultipoleType::Electric ? "E" : "M") + std::to_string(L);
  }
};

enum class Gauge { Velocity, Length };

//! Gauge parameter of the photon operator: 0 in velocity gauge,
//! sqrt((L+1)/L) in length gauge. Magnetic multipoles ignore it.
inline BigReal gauge_parameter(const PrecisionCtx &ctx, Gauge g, unsigned L) {
  ScopedPrecision guard(ctx);
  if (g == Gauge::Velocity)
    return BigReal(0);
  return sqrt(BigReal(L + 1) / L);
}

enum class Restriction { All, PositiveOnly, NegativeOnly };

inline const char *to_string(Restriction r) {
  switch (r) {
  case Restriction::All:
    return "all";
  case Restriction::PositiveOnly:
    return "pos";
  default:
    return "neg";
  }
}

//! Can multipole T connect Dirac symmetries kappa_a and kappa_b?
inline bool connects(const Multipole &t, int kappa_a, int kappa_b) {
  const int two_ja = angular::two_j_of_kappa(kappa_a);
  const int two_jb = angular::two_j_of_kappa(kappa_b);
  if (!angular::triangle_ok(two_ja, 2 * static_cast<int>(t.L), two_jb))
    return false;
  const unsigned parity_shift = (t.type == MultipoleType::Magnetic) ? 1 : 0;
  if ((angular::l_of_kappa(kappa_a) + angular::l_of_kappa(kappa_b) + t.L +
       parity_shift) %
          2 !=
      0)
    return false;
  if (t.type == MultipoleType::Magnetic && kappa_a + kappa_b == 0)
    return false;
  return true;
}

//! One two-photon channel: an unordered pair of multipoles together with
//! the intermediate symmetries its summation runs over.
struct MultipoleChannel {
  Multipole first, second;
  int kappa_i = -1, kappa_f = -1;
  std::vector<int> intermediate_kappas;

  bool magnetic_only() const {
    return first.type == MultipoleType::Magnetic &&
           second.type == MultipoleType::Magnetic;
  }

  std::string name() const {
    if (first == second)
      return "2" + first.name();
    return first.name() + second.name();
  }

  static MultipoleChannel make(const Multipole &a, const Multipole &b,
                               int kappa_i, int kappa_f) {
    MultipoleChannel ch;
    ch.first = a;
    ch.second = b;
    ch.kappa_i = kappa_i;
    ch.kappa_f = kappa_f;

    std::set<int> kappas;
    auto add_for = [&](const Multipole &t1, const Multipole &t2) {
      // i --t1--> nu --t2--> f
      const int two_ji = angular::two_j_of_kappa(kappa_i);
      for (int two_jn = std::abs(two_ji - 2 * static_cast<int>(t1.L));
           two_jn <= two_ji + 2 * static_cast<int>(t1.L); two_jn += 2) {
        if (two_jn < 1)
          continue;
        for (int kn : {(two_jn + 1) / 2, -(two_jn + 1) / 2}) {
          if (connects(t1, kn, kappa_i) && connects(t2, kappa_f, kn))
            kappas.insert(kn);
        }
      }
    };
    add_for(a, b); // direct order
    add_for(b, a); // exchanged order
    if (kappas.empty())
      throw SelectionRuleError("channel " + ch.name() +
                               " has no allowed intermediate symmetry");
    ch.intermediate_kappas.assign(kappas.begin(), kappas.end());
    return ch;
  }
};

//! Parse "2E1", "E1M2", "2M2", ... into a channel for the given (i, f).
inline MultipoleChannel parse_channel(const std::string &text, int kappa_i,
                                      int kappa_f) {
  auto fail = [&]() -> MultipoleChannel {
    throw ConfigError("cannot parse multipole channel '" + text + "'");
  };
  auto read_multipole = [&](std::size_t &pos) -> Multipole {
    if (pos >= text.size())
      return fail().first;
    Multipole m;
    if (text[pos] == 'E')
      m.type = MultipoleType::Electric;
    else if (text[pos] == 'M')
      m.type = MultipoleType::Magnetic;
    else
      fail();
    ++pos;
    std::size_t digits = 0;
    unsigned L = 0;
    while (pos < text.size() && std::isdigit(text[pos])) {
      L = 10 * L + static_cast<unsigned>(text[pos] - '0');
      ++pos;
      ++digits;
    }
    if (digits == 0 || L == 0)
      fail();
    m.L = L;
    return m;
  };

  std::size_t pos = 0;
  if (std::isdigit(text[0]) && text[0] == '2' && text.size() >= 3 &&
      (text[1] == 'E' || text[1] == 'M')) {
    pos = 1;
    const Multipole m = read_multipole(pos);
    if (pos != text.size())
      fail();
    return MultipoleChannel::make(m, m, kappa_i, kappa_f);
  }
  const Multipole m1 = read_multipole(pos);
  const Multipole m2 = read_multipole(pos);
  if (pos != text.size())
    fail();
  return MultipoleChannel::make(m1, m2, kappa_i, kappa_f);
}

//! Dirac pseudospectra per kappa, all sharing one basis and constants.
class SpectrumSet {
public:
  void insert(dirac::DiracSpectrum spectrum) {
    spectra_.insert_or_assign(spectrum.kappa, std::move(spectrum));
  }
  bool contains(int kappa) const { return spectra_.count(kappa) != 0; }
  const dirac::DiracSpectrum &at(int kappa) const {
    auto it = spectra_.find(kappa);
    if (it == spectra_.end())
      throw DomainError("SpectrumSet: no spectrum for kappa " +
                        std::to_string(kappa));
    return it->second;
  }
  const std::map<int, dirac::DiracSpectrum> &all() const { return spectra_; }

private:
  std::map<int, dirac::DiracSpectrum> spectra_;
};

//! Memoizing provider of (j_L) matrices over one basis.
class BesselCache {
public:
  BesselCache(const PrecisionCtx &ctx, basis::BasisSpec spec, BigReal c)
      : ctx_(ctx), spec_(std::move(spec)), c_(std::move(c)) {}

  const basis::BasisMatrix &get(unsigned L, const BigReal &omega) {
    const auto key = std::make_pair(L, omega);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_
               .emplace(key, basis::bessel_matrix(ctx_, spec_, L, omega, c_))
               .first;
    return it->second;
  }

  const basis::BasisSpec &spec() const { return spec_; }
  const BigReal &light_speed() const { return c_; }
  const PrecisionCtx &ctx() const { return ctx_; }

private:
  PrecisionCtx ctx_;
  basis::BasisSpec spec_;
  BigReal c_;
  std::map<std::pair<unsigned, BigReal>, basis::BasisMatrix> cache_;
};

namespace detail {

inline linalg::Vector matvec(const basis::BasisMatrix &m,
                             const linalg::Vector &v) {
  return linalg::mul(m.m, v);
}

inline void axpy(linalg::Vector &y, const BigReal &alpha,
                 const linalg::Vector &x) {
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] += alpha * x[i];
}

} // namespace detail

//! I_L^+-/J_L radial integrals over the shared basis, evaluated as bilinear
//! forms of the coefficient vectors against the (j_L) matrix.
inline BigReal radial_I(const PrecisionCtx &ctx, BesselCache &cache,
                        unsigned L, int sign, const dirac::RadialOrbital &f,
                        const dirac::RadialOrbital &i, const BigReal &omega) {
  ScopedPrecision guard(ctx);
  const auto &jl = cache.get(L, omega);
  const auto jq = detail::matvec(jl, i.q_coeffs);
  const auto jp = detail::matvec(jl, i.p_coeffs);
  const BigReal pf_q = linalg::dot(f.p_coeffs, jq);
  const BigReal qf_p = linalg::dot(f.q_coeffs, jp);
  return (sign >= 0) ? pf_q + qf_p : pf_q - qf_p;
}

inline BigReal radial_J(const PrecisionCtx &ctx, BesselCache &cache,
                        unsigned L, const dirac::RadialOrbital &f,
                        const dirac::RadialOrbital &i, const BigReal &omega) {
  ScopedPrecision guard(ctx);
  const auto &jl = cache.get(L, omega);
  return linalg::dot(f.p_coeffs, detail::matvec(jl, i.p_coeffs)) +
         linalg::dot(f.q_coeffs, detail::matvec(jl, i.q_coeffs));
}

//! How the length-gauge electric operator is realized. OperatorForm is the
//! textbook Bessel-kernel combination and is the production choice.
//! EnergyFactor rewrites the on-shell-vanishing part as
//! (eps_f - eps_i + omega)/omega times the scalar multipole with the
//! pseudospectrum energies in the prefactor; the two agree per matrix
//! element to basis completeness, but the energy prefactor amplifies the
//! residual by 2c^2/omega across the negative continuum, so it is kept
//! only as a cross-check variant.
enum class LengthForm { EnergyFactor, OperatorForm };

namespace detail {

//! <x||T||y> = dot(p, y.p) + dot(q, y.q) for every y of symmetry kappa_y.
struct Functional {
  linalg::Vector p, q;

  BigReal apply(const dirac::RadialOrbital &y) const {
    return linalg::dot(p, y.p_coeffs) + linalg::dot(q, y.q_coeffs);
  }
  bool empty() const { return p.empty(); }
};

//! One-photon reduced matrix element with one state fixed, as a functional
//! on the other state. `left` fixes the bra; otherwise the ket.
struct ReducedME {
  Functional main;
  Functional scalar;  //!< C * J_L functional for the energy-factor term
  BigReal omega;
  BigReal fixed_energy;
  bool left = true;

  BigReal apply(const dirac::RadialOrbital &y) const {
    BigReal value = main.apply(y);
    if (!scalar.empty()) {
      const BigReal shift =
          left ? (fixed_energy - y.energy) : (y.energy - fixed_energy);
      value += (shift + omega) / omega * scalar.apply(y);
    }
    return value;
  }
};

inline ReducedME multipole_functional(const PrecisionCtx &ctx,
                                      BesselCache &cache, const Multipole &t,
                                      Gauge gauge,
                                      const dirac::RadialOrbital &state,
                                      int kappa_other, bool left,
                                      const BigReal &omega,
                                      LengthForm form = LengthForm::OperatorForm) {
  ScopedPrecision guard(ctx);
  const std::size_t n = cache.spec().count;
  ReducedME out;
  out.omega = omega;
  out.fixed_energy = state.energy;
  out.left = left;
  out.main.p.assign(n, BigReal(0));
  out.main.q.assign(n, BigReal(0));

  const int kf = left ? state.kappa : kappa_other;
  const int ki = left ? kappa_other : state.kappa;
  const unsigned L = t.L;

  if (t.type == MultipoleType::Magnetic) {
    const BigReal cbar = angular::ck_kk(ctx, L, -kf, ki);
    if (cbar == 0 || kf + ki == 0)
      return out;
    const BigReal coeff =
        BigReal(kf + ki) / sqrt(BigReal(L) * (L + 1)) * cbar;
    // I+_L kernel: functional picks up the opposite component
    const auto &jl = cache.get(L, omega);
    axpy(out.main.p, coeff, matvec(jl, state.q_coeffs));
    axpy(out.main.q, coeff, matvec(jl, state.p_coeffs));
    return out;
  }

  const BigReal cred = angular::ck_kk(ctx, L, kf, ki);
  if (cred == 0)
    return out;
  const BigReal cx = sqrt(BigReal(L + 1) / L) * cred;
  const BigReal dk(kf - ki);

  // primitive pieces; sign table depends on which side `state` occupies
  auto add_Iplus = [&](Functional &fn, const basis::BasisMatrix &jmat,
                       const BigReal &coeff) {
    axpy(fn.p, coeff, matvec(jmat, state.q_coeffs));
    axpy(fn.q, coeff, matvec(jmat, state.p_coeffs));
  };
  auto add_Iminus = [&](Functional &fn, const basis::BasisMatrix &jmat,
                        const BigReal &coeff) {
    if (left) { // I^-(state, y): P_state Q_y - Q_state P_y
      axpy(fn.q, coeff, matvec(jmat, state.p_coeffs));
      axpy(fn.p, -coeff, matvec(jmat, state.q_coeffs));
    } else { // I^-(y, state): P_y Q_state - Q_y P_state
      axpy(fn.p, coeff, matvec(jmat, state.q_coeffs));
      axpy(fn.q, -coeff, matvec(jmat, state.p_coeffs));
    }
  };
  auto add_J = [&](Functional &fn, const basis::BasisMatrix &jmat,
                   const BigReal &coeff) {
    axpy(fn.p, coeff, matvec(jmat, state.p_coeffs));
    axpy(fn.q, coeff, matvec(jmat, state.q_coeffs));
  };

  if (gauge == Gauge::Length && form == LengthForm::OperatorForm) {
    const auto &jL = cache.get(L, omega);
    const auto &jL1 = cache.get(L + 1, omega);
    add_J(out.main, jL, cx);
    add_Iplus(out.main, jL1, -cx * dk / (L + 1));
    add_Iminus(out.main, jL1, -cx);
    return out;
  }

  // velocity gauge: j_L(x)/x expanded through the recurrence
  const auto &jLm1 = cache.get(L - 1, omega);
  const auto &jLp1 = cache.get(L + 1, omega);
  const BigReal inv2L1 = BigReal(1) / (2 * static_cast<int>(L) + 1);
  // dk * (j_L/x on I+)  ->  dk/(2L+1) on I+ with j_{L-1} and j_{L+1}
  add_Iplus(out.main, jLm1, cx * dk * inv2L1);
  add_Iplus(out.main, jLp1, cx * dk * inv2L1);
  add_Iplus(out.main, jLp1, -cx * dk / (L + 1));
  // -L * (j_L/x on I-)
  add_Iminus(out.main, jLm1, -cx * BigReal(static_cast<int>(L)) * inv2L1);
  add_Iminus(out.main, jLp1, -cx * BigReal(static_cast<int>(L)) * inv2L1);

  if (gauge == Gauge::Length && omega > 0) {
    out.scalar.p.assign(n, BigReal(0));
    out.scalar.q.assign(n, BigReal(0));
    add_J(out.scalar, cache.get(L, omega), cx);
  }
  return out;
}

} // namespace detail

//! Reduced one-photon multipole matrix element <f || T^(sigma L)(G) || i>.
//! Zero when the selection rules fail.
inline BigReal reduced_amplitude(const PrecisionCtx &ctx, BesselCache &cache,
                                 const Multipole &t, Gauge gauge,
                                 const dirac::RadialOrbital &f,
                                 const dirac::RadialOrbital &i,
                                 const BigReal &omega,
                                 LengthForm form = LengthForm::OperatorForm) {
  const auto fn = detail::multipole_functional(ctx, cache, t, gauge, f,
                                               i.kappa, true, omega, form);
  return fn.apply(i);
}

//! Per-intermediate-symmetry second-order reduced amplitudes at one
//! frequency split: D strings T1 at the (i -> nu) vertex, X the exchanged
//! order. The restriction filters the pseudostates entering the sum.
struct SecondOrderBlocks {
  std::vector<int> kappas;
  std::vector<BigReal> direct, exchanged;
};

inline SecondOrderBlocks
second_order_sum(const PrecisionCtx &ctx, BesselCache &cache,
                 const MultipoleChannel &channel, Gauge gauge,
                 const SpectrumSet &spectra, const dirac::RadialOrbital &i,
                 const dirac::RadialOrbital &f, const BigReal &omega1,
                 const BigReal &omega2, Restriction restriction) {
  ScopedPrecision guard(ctx);
  SecondOrderBlocks out;
  const BigReal threshold = -2 * cache.light_speed() * cache.light_speed();

  for (int kn : channel.intermediate_kappas) {
    const auto &spectrum = spectra.at(kn);
    // <f||T2||n>, <n||T1||i> for the direct term; swapped for exchange
    const auto left_t2 = detail::multipole_functional(
        ctx, cache, channel.second, gauge, f, kn, true, omega2);
    const auto right_t1 = detail::multipole_functional(
        ctx, cache, channel.first, gauge, i, kn, false, omega1);
    const auto left_t1 = detail::multipole_functional(
        ctx, cache, channel.first, gauge, f, kn, true, omega1);
    const auto right_t2 = detail::multipole_functional(
        ctx, cache, channel.second, gauge, i, kn, false, omega2);

    BigReal d = 0, x = 0;
    for (const auto &nu : spectrum.orbitals) {
      if (restriction == Restriction::PositiveOnly && nu.energy <= threshold)
        continue;
      if (restriction == Restriction::NegativeOnly && nu.energy > threshold)
        continue;
      const BigReal den1 = nu.energy - i.energy + omega1;
      const BigReal den2 = nu.energy - i.energy + omega2;
      if (abs(den1) < BigReal("1e-8") || abs(den2) < BigReal("1e-8"))
        throw ResonanceError("second_order_sum: cascade pole at kappa " +
                             std::to_string(kn));
      d += left_t2.apply(nu) * right_t1.apply(nu) / den1;
      x += left_t1.apply(nu) * right_t2.apply(nu) / den2;
    }
    out.kappas.push_back(kn);
    out.direct.push_back(d);
    out.exchanged.push_back(x);
  }
  return out;
}

//! Differential and total rates with gauge pair and continuum splits.
struct RateResult {
  std::string channel;
  BigReal z;
  BigReal omega_t;
  //! (omega1, dw/d omega1 in 1/s per hartree), length gauge, full summation
  std::vector<std::pair<BigReal, BigReal>> differential;
  struct Split {
    BigReal full, plus, minus;
  };
  Split length, velocity;          //!< totals in 1/s per restriction
  std::optional<BigReal> delta_lv; //!< absent for magnetic-only channels
  unsigned quad_points = 15;
};

class Engine {
public:
  Engine(const PrecisionCtx &ctx, const basis::BasisSpec &spec, BigReal c,
         const SpectrumSet &spectra)
      : ctx_(ctx), cache_(ctx, spec, std::move(c)), spectra_(spectra),
        angles_(ctx) {}

  BesselCache &bessel_cache() { return cache_; }

  //! dw/d omega1 in atomic units (1/time over energy), one gauge, one
  //! restriction; photon-exchange symmetrized and including the
  //! indistinguishability factor 1/2.
  BigReal differential_rate_au(const MultipoleChannel &channel, Gauge gauge,
                               const dirac::RadialOrbital &i,
                               const dirac::RadialOrbital &f,
                               const BigReal &omega1, const BigReal &omega_t,
                               Restriction restriction) {
    ScopedPrecision guard(ctx_);
    const BigReal omega2 = omega_t - omega1;
    if (!(omega1 > 0) || !(omega2 > 0))
      throw DomainError("differential_rate: omega1 must lie inside (0, w_t)");

    BigReal density = 0;
    density += ordered_pair_density(channel.first, channel.second, channel,
                                    gauge, i, f, omega1, omega2, restriction);
    if (!(channel.first == channel.second))
      density += ordered_pair_density(channel.second, channel.first, channel,
                                      gauge, i, f, omega1, omega2,
                                      restriction);
    return density / 2;
  }

  //! Gauss-Legendre total over [0, omega_t]; fills both gauges and all
  //! restriction splits, in 1/s.
  RateResult total_rate(const MultipoleChannel &channel,
                        const dirac::RadialOrbital &i,
                        const dirac::RadialOrbital &f,
                        unsigned quad_points = 15) {
    ScopedPrecision guard(ctx_);
    RateResult rr;
    rr.channel = channel.name();
    rr.z = spectra_.at(channel.kappa_i).nuc.Z;
    rr.quad_points = quad_points;
    rr.omega_t = i.energy - f.energy;
    if (!(rr.omega_t > 0))
      throw DomainError("total_rate: omega_t must be positive");

    const BigReal to_per_second = 1 / BigReal(kAtomicTimeSeconds);
    const auto rule =
        specfun::gauss_legendre_on(ctx_, quad_points, BigReal(0), rr.omega_t);

    auto accumulate = [&](Gauge g, Restriction r) {
      BigReal total = 0;
      for (const auto &[w1, w] : rule) {
        const BigReal d =
            differential_rate_au(channel, g, i, f, w1, rr.omega_t, r);
        total += w * d;
        if (g == Gauge::Length && r == Restriction::All)
          rr.differential.emplace_back(w1, d * to_per_second);
      }
      return total * to_per_second;
    };

    rr.length.full = accumulate(Gauge::Length, Restriction::All);
    rr.length.plus = accumulate(Gauge::Length, Restriction::PositiveOnly);
    rr.length.minus = accumulate(Gauge::Length, Restriction::NegativeOnly);
    if (channel.magnetic_only()) {
      rr.velocity = rr.length;
      rr.delta_lv = std::nullopt;
    } else {
      rr.velocity.full = accumulate(Gauge::Velocity, Restriction::All);
      rr.velocity.plus = accumulate(Gauge::Velocity, Restriction::PositiveOnly);
      rr.velocity.minus =
          accumulate(Gauge::Velocity, Restriction::NegativeOnly);
      rr.delta_lv = abs(rr.length.full - rr.velocity.full) /
                    abs(rr.length.full);
    }
    return rr;
  }

  //! Incoherent sum of channel totals.
  std::pair<BigReal, BigReal> channel_sum(const std::vector<RateResult> &rs) {
    ScopedPrecision guard(ctx_);
    BigReal len = 0, vel = 0;
    for (const auto &r : rs) {
      len += r.length.full;
      vel += r.velocity.full;
    }
    return {len, vel};
  }

private:
  //! Density for one ordered assignment (photon 1 = t1 at energy omega1).
  BigReal ordered_pair_density(const Multipole &t1, const Multipole &t2,
                               const MultipoleChannel &channel, Gauge gauge,
                               const dirac::RadialOrbital &i,
                               const dirac::RadialOrbital &f,
                               const BigReal &omega1, const BigReal &omega2,
                               Restriction restriction) {
    MultipoleChannel ordered = channel;
    ordered.first = t1;
    ordered.second = t2;
    const auto blocks =
        second_order_sum(ctx_, cache_, ordered, gauge, spectra_, i, f, omega1,
                         omega2, restriction);

    const int two_ji = angular::two_j_of_kappa(i.kappa);
    const int two_jf = angular::two_j_of_kappa(f.kappa);
    const BigReal pi = 4 * atan(BigReal(1));
    const BigReal c = cache_.light_speed();

    BigReal contraction = 0;
    using angular::TermOrder;
    for (std::size_t a = 0; a < blocks.kappas.size(); ++a)
      for (std::size_t b = 0; b < blocks.kappas.size(); ++b) {
        const int two_ja = angular::two_j_of_kappa(blocks.kappas[a]);
        const int two_jb = angular::two_j_of_kappa(blocks.kappas[b]);
        const struct {
          const BigReal &amp_a, &amp_b;
          TermOrder ta, tb;
        } combos[] = {
            {blocks.direct[a], blocks.direct[b], TermOrder::Direct,
             TermOrder::Direct},
            {blocks.direct[a], blocks.exchanged[b], TermOrder::Direct,
             TermOrder::Exchange},
            {blocks.exchanged[a], blocks.direct[b], TermOrder::Exchange,
             TermOrder::Direct},
            {blocks.exchanged[a], blocks.exchanged[b], TermOrder::Exchange,
             TermOrder::Exchange},
        };
        for (const auto &cmb : combos) {
          if (cmb.amp_a == 0 || cmb.amp_b == 0)
            continue;
          contraction += cmb.amp_a * cmb.amp_b *
                         angles_.get(two_ji, two_jf, t1.L, t2.L, two_ja,
                                     cmb.ta, two_jb, cmb.tb);
        }
      }

    const BigReal prefactor = 2 * BigReal(2 * t1.L + 1) *
                              BigReal(2 * t2.L + 1) * omega1 * omega2 /
                              (pi * c * c * (two_ji + 1));
    return prefactor * contraction;
  }

  PrecisionCtx ctx_;
  BesselCache cache_;
  const SpectrumSet &spectra_;
  angular::ProjectionTable angles_;
};

} // namespace fbdirac::twophoton
