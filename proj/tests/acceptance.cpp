// Acceptance suite: one pass/fail line per criterion, each at its stated
// tolerance. Run all criteria with no arguments, or a subset by number:
//   acceptance [--cache-dir DIR] [N ...]

#include "fbdirac/cache.hpp"
#include "fbdirac/config.hpp"
#include "fbdirac/twophoton.hpp"

#include "support/oracles.hpp"

#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace fbdirac;
using namespace fbdirac::twophoton;
using fbdirac::testing::integrate;
using fbdirac::testing::rel_diff;

namespace {

struct Harness {
  PrecisionCtx ctx{34};
  BigReal c{config::kLightSpeed};
  std::unique_ptr<cache::SpectrumCache> store;
  int failures = 0;

  dirac::DiracSpectrum spectrum(const basis::BasisSpec &spec,
                                const basis::NuclearModel &nuc, int kappa,
                                const PrecisionCtx &use_ctx) {
    return cache::cached_spectrum(use_ctx, store.get(), spec, nuc, kappa, c);
  }

  SpectrumSet spectra_for(const basis::BasisSpec &spec,
                          const basis::NuclearModel &nuc,
                          const std::set<int> &kappas,
                          const PrecisionCtx &use_ctx) {
    SpectrumSet set;
    for (int k : kappas)
      set.insert(spectrum(spec, nuc, k, use_ctx));
    return set;
  }

  void report(int criterion, bool pass, const std::string &detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion
              << ": " << detail << "\n";
    std::cout.flush();
    if (!pass)
      ++failures;
  }

  basis::BasisSpec preset_basis(double z) {
    const auto [n, r] = config::RunConfig::optimal_bpoly(z);
    return basis::BasisSpec::bpolynomial(n, BigReal(r));
  }

  std::set<int> kappas_for_channels(const std::vector<std::string> &names) {
    std::set<int> needed = {-1};
    for (const auto &name : names)
      for (int k : parse_channel(name, -1, -1).intermediate_kappas)
        needed.insert(k);
    return needed;
  }
};

// --------------------------------------------------------------------------
// 1. Energy oracle (bound s-levels against the closed-form point energies)

void criterion_1(Harness &h) {
  const auto spec = h.preset_basis(1);
  const auto nuc = basis::NuclearModel::point(BigReal(1));
  auto sp = h.spectrum(spec, nuc, -1, h.ctx);

  const char *tol[] = {"5e-12", "5e-12", "5e-7", "5e-3"};
  bool pass = true;
  std::string detail = "energy oracle:";
  for (unsigned n = 1; n <= 4; ++n) {
    const BigReal exact = dirac::exact_energy(h.ctx, n, -1, BigReal(1), h.c);
    const BigReal rel = abs((exact - sp.bound(n - 1).energy) / exact);
    const bool ok = rel <= BigReal(tol[n - 1]);
    pass = pass && ok;
    detail += " d" + std::to_string(n) + "s=" + to_digits_string(rel, 2) +
              (ok ? "" : "(!)");
  }
  h.report(1, pass, detail);
}

// --------------------------------------------------------------------------
// 2. Flagship rates for Z = 1

void criterion_2(Harness &h) {
  const std::vector<std::string> names = {"2E1", "E1M2", "2M1", "2E2"};
  const char *expected[] = {"8.2290591586", "2.5372e-10", "1.3804e-11",
                            "4.9072e-12"};
  const char *tol[] = {"5e-7", "1e-3", "1e-3", "1e-3"};

  const auto spec = h.preset_basis(1);
  const auto nuc = basis::NuclearModel::point(BigReal(1));
  auto set = h.spectra_for(spec, nuc, h.kappas_for_channels(names), h.ctx);
  const auto &sk = set.at(-1);
  Engine eng(h.ctx, spec, h.c, set);

  bool pass = true;
  std::string detail = "Z=1 rates:";
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto rr = eng.total_rate(parse_channel(names[i], -1, -1), sk.bound(1),
                             sk.bound(0));
    const BigReal rel = rel_diff(rr.length.full, BigReal(expected[i]));
    const bool ok = rel <= BigReal(tol[i]);
    pass = pass && ok;
    detail += " " + names[i] + "=" + to_digits_string(rel, 2) +
              (ok ? "" : "(!)");
  }
  h.report(2, pass, detail);
}

// --------------------------------------------------------------------------
// 3. Gauge invariance levels

void criterion_3(Harness &h) {
  struct Case {
    double z;
    const char *tol;
  } cases[] = {{1, "1e-20"}, {40, "1e-13"}, {92, "1e-9"}};

  bool pass = true;
  std::string detail = "delta_lv:";
  for (const auto &cs : cases) {
    const auto spec = h.preset_basis(cs.z);
    const auto nuc = basis::NuclearModel::point(BigReal(cs.z));
    auto set = h.spectra_for(spec, nuc, h.kappas_for_channels({"2E1"}), h.ctx);
    const auto &sk = set.at(-1);
    Engine eng(h.ctx, spec, h.c, set);
    auto rr =
        eng.total_rate(parse_channel("2E1", -1, -1), sk.bound(1), sk.bound(0));
    const bool ok = *rr.delta_lv <= BigReal(cs.tol);
    pass = pass && ok;
    detail += " Z=" + std::to_string(static_cast<int>(cs.z)) + ":" +
              to_digits_string(*rr.delta_lv, 2) + "(tol " + cs.tol + ")" +
              (ok ? "" : "(!)");
  }
  h.report(3, pass, detail);
}

// --------------------------------------------------------------------------
// 4. Isoelectronic scaling and the negative-continuum share

void criterion_4(Harness &h) {
  bool pass = true;
  std::string detail = "scaling:";

  auto run_z = [&](double z) {
    const auto spec = h.preset_basis(z);
    const auto nuc = basis::NuclearModel::point(BigReal(z));
    auto set = h.spectra_for(spec, nuc, h.kappas_for_channels({"2E1"}), h.ctx);
    const auto &sk = set.at(-1);
    Engine eng(h.ctx, spec, h.c, set);
    return eng.total_rate(parse_channel("2E1", -1, -1), sk.bound(1),
                          sk.bound(0));
  };

  auto r40 = run_z(40);
  const BigReal rel40 = rel_diff(r40.length.full, BigReal("3.19862e10"));
  bool ok = rel40 <= BigReal("1e-4");
  pass = pass && ok;
  detail += " WT40=" + to_digits_string(rel40, 2) + (ok ? "" : "(!)");

  auto r92 = run_z(92);
  const BigReal rel92 = rel_diff(r92.length.full, BigReal("3.825839e12"));
  ok = rel92 <= BigReal("1e-3");
  pass = pass && ok;
  detail += " WT92=" + to_digits_string(rel92, 2) + (ok ? "" : "(!)");

  // The reference table's restricted columns follow the velocity-gauge
  // summation in a normalization carrying the unaveraged substate and
  // photon-label sums (one factor 4 on |S-|^2); compare in that convention.
  const BigReal share = 4 * r92.velocity.minus / r92.length.full;
  ok = abs(share / BigReal("0.179") - 1) <= BigReal("0.05");
  pass = pass && ok;
  detail += " W-share92=" + to_digits_string(share, 3) + (ok ? "" : "(!)");

  // finite-nucleus transparency delta (uniform sphere, uranium-sized)
  {
    const auto spec = h.preset_basis(92);
    const auto nucU =
        basis::NuclearModel::uniform_sphere(BigReal(92), BigReal("1.4e-4"));
    auto set = h.spectra_for(spec, nucU, h.kappas_for_channels({"2E1"}), h.ctx);
    const auto &sk = set.at(-1);
    Engine eng(h.ctx, spec, h.c, set);
    auto rU = eng.total_rate(parse_channel("2E1", -1, -1), sk.bound(1),
                             sk.bound(0));
    detail += " (finite-nucleus delta " +
              to_digits_string(rel_diff(rU.length.full, r92.length.full), 2) +
              ")";
  }
  h.report(4, pass, detail);
}

// --------------------------------------------------------------------------
// 5. Cross-basis agreement

void criterion_5(Harness &h) {
  const auto nuc = basis::NuclearModel::point(BigReal(1));

  const auto bp = h.preset_basis(1);
  auto set_bp = h.spectra_for(bp, nuc, h.kappas_for_channels({"2E1"}), h.ctx);
  Engine eng_bp(h.ctx, bp, h.c, set_bp);
  auto r_bp = eng_bp.total_rate(parse_channel("2E1", -1, -1),
                                set_bp.at(-1).bound(1), set_bp.at(-1).bound(0));

  const auto bs =
      basis::BasisSpec::bspline_exponential(h.ctx, 9, 60, BigReal(60));
  auto set_bs = h.spectra_for(bs, nuc, h.kappas_for_channels({"2E1"}), h.ctx);
  Engine eng_bs(h.ctx, bs, h.c, set_bs);
  auto r_bs = eng_bs.total_rate(parse_channel("2E1", -1, -1),
                                set_bs.at(-1).bound(1), set_bs.at(-1).bound(0));

  const BigReal rel = rel_diff(r_bp.length.full, r_bs.length.full);
  h.report(5, rel <= BigReal("2e-7"),
           "bpoly vs bspline 2E1: rel=" + to_digits_string(rel, 2) +
               " (bp=" + to_digits_string(r_bp.length.full, 11) +
               ", bs=" + to_digits_string(r_bs.length.full, 11) + ")");
}

// --------------------------------------------------------------------------
// 6. Working-precision regression

void criterion_6(Harness &h) {
  const auto nuc = basis::NuclearModel::point(BigReal(1));
  const BigReal radius(40);
  std::map<unsigned, std::pair<BigReal, bool>> dlv16, dlv34; // value, valid

  for (unsigned digits : {34u, 16u}) {
    PrecisionCtx ctx(digits);
    ScopedPrecision guard(ctx);
    for (unsigned nbp = 24; nbp <= 40; nbp += 4) {
      auto &slot = (digits == 34 ? dlv34 : dlv16)[nbp];
      try {
        const auto spec = basis::BasisSpec::bpolynomial(nbp, radius);
        auto set = h.spectra_for(spec, nuc, {-1, 1, -2}, ctx);
        const auto &sk = set.at(-1);
        Engine eng(ctx, spec, h.c, set);
        auto rr = eng.total_rate(parse_channel("2E1", -1, -1), sk.bound(1),
                                 sk.bound(0));
        slot = {*rr.delta_lv, true};
      } catch (const NotPositiveDefinite &) {
        slot = {BigReal(0), false}; // factorization breakdown
      }
    }
  }

  BigReal worst_ratio = 0;
  bool breakdown16 = false;
  for (auto &[nbp, v16] : dlv16) {
    if (!v16.second) {
      breakdown16 = true;
      continue;
    }
    const auto &v34 = dlv34[nbp];
    if (v34.second && v34.first > 0)
      worst_ratio = std::max(worst_ratio, v16.first / v34.first);
  }
  const bool degraded16 = breakdown16 || worst_ratio >= BigReal("1e3");

  // the 34-digit curve must not blow up across the sweep
  bool smooth34 = true;
  for (auto &[nbp, v] : dlv34)
    smooth34 = smooth34 && v.second && v.first <= dlv34[24].first * 10;

  h.report(6, degraded16 && smooth34,
           std::string("digits=16 degradation ") +
               (breakdown16 ? "(factorization breakdown) " : "") + "ratio=" +
               to_digits_string(worst_ratio, 2) +
               "; digits=34 stays flat: " + (smooth34 ? "yes" : "no"));
}

// --------------------------------------------------------------------------
// 7. Property suites

void criterion_7(Harness &h) {
  bool pass = true;
  std::string detail = "properties:";
  const PrecisionCtx &ctx = h.ctx;

  { // analytic vs quadrature matrix oracles, 10^(6-digits) relative
    const auto spec = basis::BasisSpec::bpolynomial(21, BigReal(15));
    const BigReal tol = pow10(6 - static_cast<int>(ctx.digits));
    const auto cmat = basis::gram_matrix(ctx, spec);
    const auto kmat = basis::kappa_over_r_matrix(ctx, spec, 2);
    const BigReal omega = 3 * h.c / spec.cavity_radius;
    const auto jmat = basis::bessel_matrix(ctx, spec, 1, omega, h.c);
    bool ok = true;
    for (auto [i, j] : std::vector<std::pair<std::size_t, std::size_t>>{
             {0, 1}, {4, 9}, {20, 20}}) {
      auto entry = [&](const std::function<BigReal(const BigReal &)> &w) {
        return integrate(
            ctx,
            [&](const BigReal &r) {
              return basis::eval_basis(ctx, spec, i, r) *
                     basis::eval_basis(ctx, spec, j, r) * w(r);
            },
            BigReal(0), spec.cavity_radius, pow10(-28), pow10(-25));
      };
      ok = ok &&
           rel_diff(cmat.entry(i, j),
                    entry([](const BigReal &) { return BigReal(1); })) <= tol;
      ok = ok && rel_diff(kmat.entry(i, j), entry([](const BigReal &r) {
                   return BigReal(2) / r;
                 })) <= tol;
      ok = ok && rel_diff(jmat.entry(i, j), entry([&](const BigReal &r) {
                   return specfun::sph_bessel_j(ctx, 1, omega * r / h.c);
                 })) <= tol;
    }
    pass = pass && ok;
    detail += std::string(" matrix-oracles=") + (ok ? "ok" : "FAIL");
  }

  { // eigenpair residual and metric orthonormality bounds
    const auto spec = basis::BasisSpec::bpolynomial(24, BigReal(50));
    const auto nuc = basis::NuclearModel::point(BigReal(1));
    const auto sys =
        dirac::assemble(ctx, spec, nuc, dirac::AngularKappa(-1), h.c);
    const auto eig = linalg::solve_generalized(ctx, sys.a, sys.b);
    const std::size_t dim = eig.values.size();
    const BigReal na = linalg::frobenius(sys.a), nb = linalg::frobenius(sys.b);
    const BigReal tol_res = pow10(6 - static_cast<int>(ctx.digits));
    const BigReal cond = linalg::estimate_condition(ctx, sys.b);
    const BigReal tol_orth =
        std::max(pow10(4 - static_cast<int>(ctx.digits)),
                 100 * cond * pow10(-static_cast<int>(ctx.digits)));
    bool ok = true;
    for (std::size_t col : {std::size_t{0}, dim / 2, dim - 1}) {
      linalg::Vector v(dim);
      for (std::size_t r = 0; r < dim; ++r)
        v[r] = eig.vectors(r, col);
      const auto av = linalg::mul(sys.a, v);
      const auto bv = linalg::mul(sys.b, v);
      BigReal res = 0;
      for (std::size_t r = 0; r < dim; ++r) {
        const BigReal d = av[r] - eig.values[col] * bv[r];
        res += d * d;
      }
      ok = ok && sqrt(res) <= tol_res * (na + abs(eig.values[col]) * nb);
      ok = ok && abs(linalg::dot(v, bv) - 1) <= tol_orth;
    }
    pass = pass && ok;
    detail += std::string(" eigen-bounds=") + (ok ? "ok" : "FAIL");
  }

  { // partition identity, differential symmetry, quadrature stability
    const auto spec = h.preset_basis(1);
    const auto nuc = basis::NuclearModel::point(BigReal(1));
    auto set = h.spectra_for(spec, nuc, h.kappas_for_channels({"2E1"}), h.ctx);
    const auto &sk = set.at(-1);
    const auto &i2s = sk.bound(1);
    const auto &f1s = sk.bound(0);
    auto ch = parse_channel("2E1", -1, -1);
    BesselCache cache(ctx, spec, h.c);
    const BigReal wt = i2s.energy - f1s.energy;
    const BigReal w1 = wt * 3 / 10;

    auto all = second_order_sum(ctx, cache, ch, Gauge::Length, set, i2s, f1s,
                                w1, wt - w1, Restriction::All);
    auto plus = second_order_sum(ctx, cache, ch, Gauge::Length, set, i2s, f1s,
                                 w1, wt - w1, Restriction::PositiveOnly);
    auto minus = second_order_sum(ctx, cache, ch, Gauge::Length, set, i2s,
                                  f1s, w1, wt - w1, Restriction::NegativeOnly);
    bool ok = true;
    for (std::size_t k = 0; k < all.kappas.size(); ++k) {
      ok = ok && rel_diff(all.direct[k], plus.direct[k] + minus.direct[k]) <=
                     pow10(-30);
      ok = ok && rel_diff(all.exchanged[k],
                          plus.exchanged[k] + minus.exchanged[k]) <=
                     pow10(-30);
    }
    pass = pass && ok;
    detail += std::string(" partition=") + (ok ? "ok" : "FAIL");

    Engine eng(ctx, spec, h.c, set);
    const BigReal da = eng.differential_rate_au(ch, Gauge::Length, i2s, f1s,
                                                w1, wt, Restriction::All);
    const BigReal db = eng.differential_rate_au(ch, Gauge::Length, i2s, f1s,
                                                wt - w1, wt, Restriction::All);
    ok = rel_diff(da, db) <= pow10(8 - static_cast<int>(ctx.digits));
    pass = pass && ok;
    detail += std::string(" symmetry=") + (ok ? "ok" : "FAIL");

    auto q15 = eng.total_rate(ch, i2s, f1s, 15);
    auto q30 = eng.total_rate(ch, i2s, f1s, 30);
    const BigReal qrel = rel_diff(q15.length.full, q30.length.full);
    ok = qrel <= BigReal("1e-10");
    pass = pass && ok;
    detail += " quad15v30=" + to_digits_string(qrel, 2) + (ok ? "" : "(!)");
  }

  h.report(7, pass, detail);
}

// --------------------------------------------------------------------------
// 8. Spurious-state check for kappa = +1

void criterion_8(Harness &h) {
  const auto spec = h.preset_basis(1);
  const auto nuc = basis::NuclearModel::point(BigReal(1));
  auto sp = h.spectrum(spec, nuc, +1, h.ctx);

  const BigReal exact_2p = dirac::exact_energy(h.ctx, 2, 1, BigReal(1), h.c);
  const BigReal sea = -2 * h.c * h.c;
  bool clean = true;
  BigReal first;
  for (const auto &o : sp.orbitals) {
    if (o.energy <= sea)
      continue;
    first = o.energy;
    clean = o.energy >= exact_2p - BigReal("1e-3");
    break;
  }
  h.report(8, clean && sp.warnings.empty(),
           "kappa=+1 lowest above-sea level " + to_digits_string(first, 12) +
               " vs exact 2p1/2 " + to_digits_string(exact_2p, 12) +
               (sp.warnings.empty() ? "" : " (warnings present)"));
}

} // namespace

int main(int argc, char **argv) {
  BigReal::default_precision(40);
  Harness h;

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cache-dir" && i + 1 < argc) {
      h.store = std::make_unique<cache::SpectrumCache>(argv[++i]);
    } else {
      wanted.push_back(std::stoi(arg));
    }
  }
  if (wanted.empty())
    wanted = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::map<int, std::function<void(Harness &)>> criteria = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
  };
  for (int n : wanted) {
    auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << n << "\n";
      return 2;
    }
    it->second(h);
  }
  return h.failures == 0 ? 0 : 1;
}
