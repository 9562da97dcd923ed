#pragma once

#include "fbdirac/basis.hpp"
#include "fbdirac/linalg.hpp"
#include "fbdirac/precision.hpp"

#include <string>
#include <vector>

namespace fbdirac::dirac {

//! Relativistic angular quantum number kappa and its derived (l, j).
struct AngularKappa {
  int kappa = -1;

  explicit AngularKappa(int k) : kappa(k) {
    if (k == 0)
      throw DomainError("AngularKappa: kappa must be nonzero");
  }
  unsigned l() const {
    return kappa > 0 ? static_cast<unsigned>(kappa)
                     : static_cast<unsigned>(-kappa - 1);
  }
  unsigned two_j() const { return 2 * static_cast<unsigned>(std::abs(kappa)) - 1; }
  //! l value of the opposite-sign kappa (the small-component symmetry).
  unsigned l_bar() const {
    return AngularKappa(-kappa).l();
  }
};

enum class OrbitalClass { NegativeContinuum, Bound, PositiveContinuum };

inline const char *to_string(OrbitalClass c) {
  switch (c) {
  case OrbitalClass::NegativeContinuum:
    return "negative-continuum";
  case OrbitalClass::Bound:
    return "bound";
  default:
    return "positive-continuum";
  }
}

//! One pseudo-orbital: energy (total minus rest mass) and expansion
//! coefficients over the full basis (excluded functions carry zeros).
struct RadialOrbital {
  int kappa = -1;
  BigReal energy;
  linalg::Vector p_coeffs;
  linalg::Vector q_coeffs;
  OrbitalClass cls = OrbitalClass::Bound;
};

//! Which boundary-action variant handles kappa > 0 at the origin. The two
//! differ by a factor c on the P(0)^2 term; both are kept selectable and
//! only act when the origin basis function is retained.
enum class BondBranch { CTimesP0, PlainP0 };

struct AssembleOptions {
  bool reduce_large = true; //!< drop the origin-nonzero function from P
  bool reduce_small = true; //!< drop the origin-nonzero function from Q
  BondBranch branch = BondBranch::CTimesP0;
};

struct Assembled {
  linalg::Matrix a, b;
  std::vector<std::size_t> p_index; //!< full-basis index per P row
  std::vector<std::size_t> q_index; //!< full-basis index per Q row
};

//! Build the symmetric generalized eigenproblem for one kappa block.
//! The kinetic off-diagonal block is assembled in its antisymmetrized form,
//! which together with the boundary action keeps A exactly symmetric and
//! enforces P(R) = Q(R) variationally; P(0) = 0 is enforced by basis
//! reduction.
inline Assembled assemble(const PrecisionCtx &ctx, const basis::BasisSpec &spec,
                          const basis::NuclearModel &nuc,
                          const AngularKappa &kappa, const BigReal &c,
                          const AssembleOptions &opts = {}) {
  ScopedPrecision guard(ctx);
  const std::size_t n = spec.count;

  Assembled out;
  for (std::size_t i = opts.reduce_large ? 1 : 0; i < n; ++i)
    out.p_index.push_back(i);
  for (std::size_t i = opts.reduce_small ? 1 : 0; i < n; ++i)
    out.q_index.push_back(i);
  const std::size_t np = out.p_index.size(), nq = out.q_index.size();
  const std::size_t dim = np + nq;

  const auto cmat = basis::gram_matrix(ctx, spec);
  const auto dmat = basis::derivative_matrix(ctx, spec);
  const auto kmat = basis::kappa_over_r_matrix(ctx, spec, kappa.kappa);
  const auto vmat = basis::potential_matrix(ctx, spec, nuc);

  std::vector<BigReal> bR(n), b0(n);
  for (std::size_t i = 0; i < n; ++i) {
    bR[i] = basis::eval_basis(ctx, spec, i, spec.cavity_radius);
    b0[i] = basis::eval_basis(ctx, spec, i, BigReal(0));
  }

  out.a = linalg::Matrix(dim, dim);
  out.b = linalg::Matrix(dim, dim);
  const BigReal half_c = c / 2;

  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < np; ++b) {
      const std::size_t i = out.p_index[a], j = out.p_index[b];
      BigReal v = vmat.entry(i, j) + half_c * bR[i] * bR[j];
      if (!opts.reduce_large) {
        // origin part of the boundary action (inert once P(0) = 0)
        if (kappa.kappa > 0 && opts.branch == BondBranch::CTimesP0)
          v -= c * c * b0[i] * b0[j];
        else
          v -= c * b0[i] * b0[j];
      }
      out.a(a, b) = v;
    }

  for (std::size_t a = 0; a < nq; ++a)
    for (std::size_t b = 0; b < nq; ++b) {
      const std::size_t i = out.q_index[a], j = out.q_index[b];
      out.a(np + a, np + b) = vmat.entry(i, j) -
                              2 * c * c * cmat.entry(i, j) -
                              half_c * bR[i] * bR[j];
    }

  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < nq; ++b) {
      const std::size_t i = out.p_index[a], j = out.q_index[b];
      BigReal x = c * (dmat.entry(i, j) - kmat.entry(i, j)) -
                  half_c * (bR[i] * bR[j] - b0[i] * b0[j]);
      if (!opts.reduce_large)
        x += half_c * b0[i] * b0[j];
      out.a(a, np + b) = x;
      out.a(np + b, a) = x;
    }

  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < np; ++b)
      out.b(a, b) = cmat.entry(out.p_index[a], out.p_index[b]);
  for (std::size_t a = 0; a < nq; ++a)
    for (std::size_t b = 0; b < nq; ++b)
      out.b(np + a, np + b) = cmat.entry(out.q_index[a], out.q_index[b]);

  return out;
}

struct DiracSpectrum {
  basis::BasisSpec spec;
  basis::NuclearModel nuc;
  int kappa = -1;
  BigReal c;
  AssembleOptions options;
  std::vector<RadialOrbital> orbitals; //!< ascending energy
  std::vector<std::string> warnings;

  //! n-th bound orbital (0 = lowest). Throws if out of range.
  const RadialOrbital &bound(std::size_t n) const {
    std::size_t seen = 0;
    for (const auto &o : orbitals) {
      if (o.cls == OrbitalClass::Bound) {
        if (seen == n)
          return o;
        ++seen;
      }
    }
    throw DomainError("DiracSpectrum: bound-state index out of range");
  }
};

//! Point-nucleus bound-state energy (total minus rest mass).
inline BigReal exact_energy(const PrecisionCtx &ctx, unsigned n, int kappa,
                            const BigReal &z, const BigReal &c) {
  ScopedPrecision guard(ctx);
  const unsigned abs_k = static_cast<unsigned>(std::abs(kappa));
  if (kappa == 0 || n < abs_k || (kappa > 0 && n == abs_k))
    throw DomainError("exact_energy: invalid (n, kappa)");
  const BigReal za = z / c;
  if (za >= abs_k)
    throw DomainError("exact_energy: Z alpha must be below |kappa|");
  const BigReal gam = sqrt(BigReal(kappa) * kappa - za * za);
  const BigReal denom = BigReal(static_cast<int>(n - abs_k)) + gam;
  return c * c * (1 / sqrt(1 + za * za / (denom * denom)) - 1);
}

namespace detail {

//! Deterministic overall sign: int P dr > 0, falling back to int Q dr and
//! then to the largest coefficient. Keeps nodeless bound states positive.
inline void fix_sign(const PrecisionCtx &ctx, RadialOrbital &orb,
                     const basis::BasisSpec &spec) {
  ScopedPrecision guard(ctx);
  std::vector<BigReal> w(spec.count);
  if (spec.kind == basis::BasisKind::BPolynomial) {
    const BigReal uniform = spec.cavity_radius / static_cast<int>(spec.count);
    for (auto &x : w)
      x = uniform;
  } else {
    for (std::size_t i = 0; i < spec.count; ++i)
      w[i] = (spec.knots[i + spec.order] - spec.knots[i]) /
             static_cast<int>(spec.order);
  }
  BigReal s = 0;
  for (std::size_t i = 0; i < spec.count; ++i)
    s += orb.p_coeffs[i] * w[i];
  if (s == 0)
    for (std::size_t i = 0; i < spec.count; ++i)
      s += orb.q_coeffs[i] * w[i];
  if (s == 0)
    for (const auto *vec : {&orb.p_coeffs, &orb.q_coeffs})
      for (const auto &x : *vec)
        if (x != 0) {
          s = x;
          break;
        }
  if (s < 0)
    for (auto *vec : {&orb.p_coeffs, &orb.q_coeffs})
      for (auto &x : *vec)
        x = -x;
}

} // namespace detail

//! Assemble, solve and classify the pseudospectrum for one kappa.
inline DiracSpectrum solve_spectrum(const PrecisionCtx &ctx,
                                    const basis::BasisSpec &spec,
                                    const basis::NuclearModel &nuc, int kappa,
                                    const BigReal &c,
                                    const AssembleOptions &opts = {}) {
  ScopedPrecision guard(ctx);
  const AngularKappa ak(kappa);
  const Assembled sys = assemble(ctx, spec, nuc, ak, c, opts);
  const auto eig = linalg::solve_generalized(ctx, sys.a, sys.b);

  DiracSpectrum out;
  out.spec = spec;
  out.nuc = nuc;
  out.kappa = kappa;
  out.c = c;
  out.options = opts;

  const std::size_t np = sys.p_index.size(), nq = sys.q_index.size();
  const BigReal threshold = -2 * c * c;
  for (std::size_t col = 0; col < eig.values.size(); ++col) {
    RadialOrbital orb;
    orb.kappa = kappa;
    // round to ctx digits so serialized decimals round-trip exactly
    orb.energy = round_to(ctx, eig.values[col]);
    orb.p_coeffs.assign(spec.count, BigReal(0));
    orb.q_coeffs.assign(spec.count, BigReal(0));
    for (std::size_t a = 0; a < np; ++a)
      orb.p_coeffs[sys.p_index[a]] = round_to(ctx, eig.vectors(a, col));
    for (std::size_t a = 0; a < nq; ++a)
      orb.q_coeffs[sys.q_index[a]] = round_to(ctx, eig.vectors(np + a, col));
    if (orb.energy < threshold)
      orb.cls = OrbitalClass::NegativeContinuum;
    else if (orb.energy < 0)
      orb.cls = OrbitalClass::Bound;
    else
      orb.cls = OrbitalClass::PositiveContinuum;
    detail::fix_sign(ctx, orb, spec);
    out.orbitals.push_back(std::move(orb));
  }

  // One negative-continuum state per small-component function; a lifted
  // spurious state (kappa > 0, origin function retained) may add one more.
  std::size_t negatives = 0;
  for (const auto &o : out.orbitals)
    if (o.cls == OrbitalClass::NegativeContinuum)
      ++negatives;
  if (negatives < std::min(np, nq) || negatives > std::max(np, nq))
    out.warnings.push_back("negative-continuum count " +
                           std::to_string(negatives) +
                           " outside the expected range [" +
                           std::to_string(std::min(np, nq)) + "," +
                           std::to_string(std::max(np, nq)) + "]");

  if (kappa > 0 && nuc.Z > 0 && nuc.Z / c < std::abs(kappa)) {
    const BigReal lowest_exact =
        exact_energy(ctx, static_cast<unsigned>(kappa) + 1, kappa, nuc.Z, c);
    for (const auto &o : out.orbitals) {
      if (o.energy <= threshold)
        continue;
      if (o.energy < lowest_exact - BigReal("1e-3")) {
        out.warnings.push_back(
            "spurious state: eigenvalue " + to_digits_string(o.energy, 12) +
            " below the lowest physical level " +
            to_digits_string(lowest_exact, 12));
      }
      break; // only the first state above the sea matters
    }
  }
  return out;
}

//! (P(r), Q(r)) from the stored expansion coefficients.
inline std::pair<BigReal, BigReal> reconstruct(const PrecisionCtx &ctx,
                                               const RadialOrbital &orb,
                                               const basis::BasisSpec &spec,
                                               const BigReal &r) {
  ScopedPrecision guard(ctx);
  BigReal p = 0, q = 0;
  for (std::size_t i = 0; i < spec.count; ++i) {
    if (orb.p_coeffs[i] == 0 && orb.q_coeffs[i] == 0)
      continue;
    const BigReal b = basis::eval_basis(ctx, spec, i, r);
    p += orb.p_coeffs[i] * b;
    q += orb.q_coeffs[i] * b;
  }
  return {p, q};
}

} // namespace fbdirac::dirac
