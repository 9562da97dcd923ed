#pragma once

#include "fbdirac/linalg.hpp"
#include "fbdirac/precision.hpp"
#include "fbdirac/specfun.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fbdirac::basis {

enum class BasisKind { BPolynomial, BSpline };
enum class NuclearShape { PointCharge, UniformSphere };

//! Radial finite basis on [0, R]: either the k+1 Bernstein polynomials of
//! degree k, or N B-splines of order k on a clamped knot sequence.
struct BasisSpec {
  BasisKind kind = BasisKind::BPolynomial;
  unsigned order = 0;          // k
  unsigned count = 0;          // N (= k+1 for Bernstein)
  BigReal cavity_radius;       // R, a.u.
  std::vector<BigReal> knots;  // B-spline only; size N + k, clamped

  static BasisSpec bpolynomial(unsigned n_functions, const BigReal &radius) {
    if (n_functions < 2 || radius <= 0)
      throw DomainError("BasisSpec: need at least 2 functions and R > 0");
    BasisSpec s;
    s.kind = BasisKind::BPolynomial;
    s.count = n_functions;
    s.order = n_functions - 1;
    s.cavity_radius = radius;
    return s;
  }

  static BasisSpec bspline(unsigned order, unsigned count,
                           const BigReal &radius,
                           std::vector<BigReal> knot_seq) {
    if (order < 2 || count < order || radius <= 0)
      throw DomainError("BasisSpec: invalid B-spline parameters");
    if (knot_seq.size() != count + order)
      throw DomainError("BasisSpec: knot count must equal N + k");
    for (unsigned i = 0; i < order; ++i) {
      if (knot_seq[i] != 0 || knot_seq[count + i] != radius)
        throw DomainError("BasisSpec: first/last k knots must clamp to 0/R");
    }
    for (std::size_t i = 1; i < knot_seq.size(); ++i)
      if (knot_seq[i] < knot_seq[i - 1])
        throw DomainError("BasisSpec: knots must be nondecreasing");
    BasisSpec s;
    s.kind = BasisKind::BSpline;
    s.order = order;
    s.count = count;
    s.cavity_radius = radius;
    s.knots = std::move(knot_seq);
    return s;
  }

  //! Clamped knots with exponentially spaced interior break points, the
  //! established grid for Coulomb problems.
  static BasisSpec bspline_exponential(const PrecisionCtx &ctx, unsigned order,
                                       unsigned count, const BigReal &radius,
                                       double stretch = 7.0) {
    ScopedPrecision guard(ctx);
    std::vector<BigReal> t(count + order, BigReal(0));
    const unsigned interior = count - order;
    const BigReal g(stretch);
    const BigReal denom = exp(g) - 1;
    for (unsigned j = 1; j <= interior; ++j) {
      const BigReal u = BigReal(static_cast<int>(j)) / (interior + 1);
      t[order - 1 + j] = radius * (exp(g * u) - 1) / denom;
    }
    for (unsigned i = 0; i < order; ++i)
      t[count + i] = radius;
    return bspline(order, count, radius, std::move(t));
  }
};

//! Nuclear charge model entering the potential matrix.
struct NuclearModel {
  BigReal Z;
  NuclearShape shape = NuclearShape::PointCharge;
  BigReal r_N; // UniformSphere only

  static NuclearModel point(const BigReal &z) {
    NuclearModel n;
    n.Z = z;
    n.shape = NuclearShape::PointCharge;
    return n;
  }
  static NuclearModel uniform_sphere(const BigReal &z, const BigReal &radius) {
    if (radius <= 0)
      throw DomainError("NuclearModel: r_N must be positive");
    NuclearModel n;
    n.Z = z;
    n.shape = NuclearShape::UniformSphere;
    n.r_N = radius;
    return n;
  }
};

//! N x N single-particle matrix over the basis; the (0,0) pair is marked
//! singular when its defining integrand is non-integrable (1/r weight
//! against functions finite at the origin).
struct BasisMatrix {
  std::string tag;
  linalg::Matrix m;
  std::optional<std::pair<std::size_t, std::size_t>> singular_entry;

  const BigReal &entry(std::size_t i, std::size_t j) const {
    if (singular_entry && ((singular_entry->first == i &&
                            singular_entry->second == j) ||
                           (singular_entry->first == j &&
                            singular_entry->second == i)))
      throw SingularEntryError(tag + ": entry (" + std::to_string(i) + "," +
                               std::to_string(j) +
                               ") has a non-integrable integrand");
    return m(i, j);
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "row,col,value\n";
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        os << i << ',' << j << ',';
        if (singular_entry && singular_entry->first == i &&
            singular_entry->second == j)
          os << "singular";
        else
          os << to_full_string(m(i, j));
        os << '\n';
      }
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

//! All order-`ord` B-spline values that are nonzero on the span containing r.
//! Returns values for functions span-ord+1 .. span (clipped to range).
inline void spline_nonzero(const BasisSpec &spec, unsigned ord,
                           std::size_t span, const BigReal &r,
                           std::vector<BigReal> &out) {
  const auto &t = spec.knots;
  out.assign(ord, BigReal(0));
  out[0] = 1;
  std::vector<BigReal> left(ord), right(ord);
  for (unsigned j = 1; j < ord; ++j) {
    left[j] = r - t[span + 1 - j];
    right[j] = t[span + j] - r;
    BigReal saved = 0;
    for (unsigned rr = 0; rr < j; ++rr) {
      const BigReal den = right[rr + 1] + left[j - rr];
      if (den == 0) {
        out[rr] = saved;
        saved = 0;
        continue;
      }
      const BigReal temp = out[rr] / den;
      out[rr] = saved + right[rr + 1] * temp;
      saved = left[j - rr] * temp;
    }
    out[j] = saved;
  }
}

//! Knot span index for r in [0, R): largest i with t[i] <= r < t[i+1].
inline std::size_t find_span(const BasisSpec &spec, const BigReal &r) {
  const auto &t = spec.knots;
  const std::size_t n = spec.count;
  if (r >= spec.cavity_radius)
    return n - 1; // treat the last interval as closed
  std::size_t lo = spec.order - 1, hi = n;
  while (lo + 1 < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (t[mid] <= r)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

} // namespace detail

//! B_i(r): Bernstein polynomial or Cox-de Boor B-spline.
inline BigReal eval_basis(const PrecisionCtx &ctx, const BasisSpec &spec,
                          std::size_t i, const BigReal &r) {
  ScopedPrecision guard(ctx);
  if (r < 0 || r > spec.cavity_radius)
    throw DomainError("eval_basis: r outside [0, R]");
  if (i >= spec.count)
    throw DomainError("eval_basis: index out of range");

  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    const BigReal u = r / spec.cavity_radius;
    return specfun::from_exact_int(ctx, specfun::binomial_int(
                                            k, static_cast<long long>(i))) *
           pow(u, static_cast<int>(i)) * pow(1 - u, static_cast<int>(k - i));
  }

  const std::size_t span = detail::find_span(spec, r);
  if (i + spec.order <= span || i > span)
    return BigReal(0);
  std::vector<BigReal> vals;
  detail::spline_nonzero(spec, spec.order, span, r, vals);
  return vals[i + spec.order - 1 - span];
}

//! d/dr B_i(r).
inline BigReal eval_basis_derivative(const PrecisionCtx &ctx,
                                     const BasisSpec &spec, std::size_t i,
                                     const BigReal &r) {
  ScopedPrecision guard(ctx);
  if (r < 0 || r > spec.cavity_radius)
    throw DomainError("eval_basis_derivative: r outside [0, R]");

  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    const BigReal R = spec.cavity_radius;
    const BigReal u = r / R;
    auto bin = [&](long long n, long long kk) {
      return specfun::from_exact_int(
          ctx, specfun::binomial_int(static_cast<unsigned>(n), kk));
    };
    // k/R * [B_{i-1,k-1} - B_{i,k-1}]
    BigReal lower = 0;
    if (i >= 1 && i - 1 <= static_cast<std::size_t>(k - 1))
      lower = bin(k - 1, static_cast<long long>(i - 1)) *
              pow(u, static_cast<int>(i - 1)) *
              pow(1 - u, static_cast<int>(k - i));
    BigReal upper = 0;
    if (i <= static_cast<std::size_t>(k - 1))
      upper = bin(k - 1, static_cast<long long>(i)) *
              pow(u, static_cast<int>(i)) *
              pow(1 - u, static_cast<int>(k - 1 - i));
    return BigReal(k) / R * (lower - upper);
  }

  // (k-1) [ B_{i,k-1}/(t_{i+k-1}-t_i) - B_{i+1,k-1}/(t_{i+k}-t_{i+1}) ]
  const auto &t = spec.knots;
  const unsigned k = spec.order;
  const std::size_t span = detail::find_span(spec, r);
  std::vector<BigReal> vals;
  detail::spline_nonzero(spec, k - 1, span, r, vals);
  auto low_order_val = [&](std::size_t idx) -> BigReal {
    // value of order-(k-1) spline idx at r; nonzero set is span-k+2 .. span
    if (idx + k - 1 <= span || idx > span)
      return BigReal(0);
    return vals[idx + k - 2 - span];
  };
  BigReal result = 0;
  const BigReal d1 = t[i + k - 1] - t[i];
  if (d1 != 0)
    result += low_order_val(i) / d1;
  const BigReal d2 = t[i + k] - t[i + 1];
  if (d2 != 0)
    result -= low_order_val(i + 1) / d2;
  return BigReal(k - 1) * result;
}

// ---------------------------------------------------------------------------
// Matrix assembly

namespace detail {

inline BigRat rat_binomial(unsigned n, long long k) {
  return BigRat(specfun::binomial_int(n, k));
}

//! Node count for a 1/r-type kernel on [lo, hi]: the Gauss error decays
//! like rho^(-2n) with rho the Bernstein ellipse radius reaching the pole
//! at r = 0.
inline unsigned nodes_for_pole(const PrecisionCtx &ctx, const BigReal &lo,
                               const BigReal &hi, unsigned floor_nodes) {
  if (lo <= 0)
    return floor_nodes; // integrand is polynomial there (first interval)
  const double m = ((hi + lo) / (hi - lo)).convert_to<double>();
  const double rho = m + std::sqrt(m * m - 1.0);
  const double need =
      (static_cast<double>(ctx.digits) + 6.0) / (2.0 * std::log10(rho));
  const unsigned n = static_cast<unsigned>(need) + 2;
  return std::max(floor_nodes, std::min(n, 200u));
}

//! Per-interval Gauss-Legendre assembly of a spline matrix with entries
//! int f(r) B_i(r) W_j(B, r) dr, where the weight callback receives all
//! nonzero basis (or derivative) values on the interval. `nodes_of`
//! chooses the node count per interval.
template <typename Kernel, typename NodeRule>
linalg::Matrix spline_matrix_by_quadrature_adaptive(const PrecisionCtx &ctx,
                                                    const BasisSpec &spec,
                                                    Kernel &&kernel,
                                                    NodeRule &&nodes_of,
                                                    bool derivative_right) {
  ScopedPrecision guard(ctx);
  const unsigned k = spec.order;
  const std::size_t n = spec.count;
  linalg::Matrix out(n, n);
  std::vector<BigReal> vals, dvals, lowvals;

  for (std::size_t span = k - 1; span < n; ++span) {
    const BigReal lo = spec.knots[span], hi = spec.knots[span + 1];
    if (hi == lo)
      continue;
    const auto rule = specfun::gauss_legendre_on(ctx, nodes_of(lo, hi), lo, hi);
    for (const auto &[r, w] : rule) {
      spline_nonzero(spec, k, span, r, vals);
      if (derivative_right) {
        spline_nonzero(spec, k - 1, span, r, lowvals);
        dvals.assign(k, BigReal(0));
        for (std::size_t fi = span - k + 1; fi <= span; ++fi) {
          auto low = [&](std::size_t idx) -> BigReal {
            if (idx + k - 1 <= span || idx > span)
              return BigReal(0);
            return lowvals[idx + k - 2 - span];
          };
          BigReal d = 0;
          const BigReal d1 = spec.knots[fi + k - 1] - spec.knots[fi];
          if (d1 != 0)
            d += low(fi) / d1;
          const BigReal d2 = spec.knots[fi + k] - spec.knots[fi + 1];
          if (d2 != 0)
            d -= low(fi + 1) / d2;
          dvals[fi - (span - k + 1)] = BigReal(k - 1) * d;
        }
      }
      const BigReal fw = kernel(r) * w;
      for (unsigned a = 0; a < k; ++a) {
        const std::size_t ia = span - k + 1 + a;
        const BigReal left = vals[a] * fw;
        if (left == 0)
          continue;
        for (unsigned b = 0; b < k; ++b) {
          const std::size_t jb = span - k + 1 + b;
          out(ia, jb) += left * (derivative_right ? dvals[b] : vals[b]);
        }
      }
    }
  }
  return out;
}

template <typename Kernel>
linalg::Matrix spline_matrix_by_quadrature(const PrecisionCtx &ctx,
                                           const BasisSpec &spec,
                                           Kernel &&kernel, unsigned min_nodes,
                                           bool derivative_right) {
  return spline_matrix_by_quadrature_adaptive(
      ctx, spec, std::forward<Kernel>(kernel),
      [&](const BigReal &, const BigReal &) { return min_nodes; },
      derivative_right);
}

} // namespace detail

//! Overlap (Gram) matrix (C)_ij = int B_i B_j dr. Analytic for Bernstein,
//! per-interval quadrature (exact for the polynomial integrand) for splines.
inline BasisMatrix gram_matrix(const PrecisionCtx &ctx, const BasisSpec &spec) {
  ScopedPrecision guard(ctx);
  const std::size_t n = spec.count;
  BasisMatrix bm;
  bm.tag = "C";
  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    bm.m = linalg::Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const BigRat v = detail::rat_binomial(k, static_cast<long long>(i)) *
                         detail::rat_binomial(k, static_cast<long long>(j)) /
                         (BigRat(2 * k + 1) *
                          detail::rat_binomial(2 * k,
                                               static_cast<long long>(i + j)));
        bm.m(i, j) = spec.cavity_radius * specfun::from_rational(ctx, v);
        bm.m(j, i) = bm.m(i, j);
      }
    return bm;
  }
  bm.m = detail::spline_matrix_by_quadrature(
      ctx, spec, [](const BigReal &) { return BigReal(1); }, spec.order + 2,
      false);
  return bm;
}

//! (D)_ij = int B_i B_j' dr. The Bernstein closed form is indeterminate on
//! the diagonal corners; those entries are the exact endpoint values
//! [B_i^2/2]_0^R = -1/2 and +1/2.
inline BasisMatrix derivative_matrix(const PrecisionCtx &ctx,
                                     const BasisSpec &spec) {
  ScopedPrecision guard(ctx);
  const std::size_t n = spec.count;
  BasisMatrix bm;
  bm.tag = "D";
  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    bm.m = linalg::Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          if (i == 0)
            bm.m(i, j) = BigReal(-1) / 2;
          else if (i == k)
            bm.m(i, j) = BigReal(1) / 2;
          else
            bm.m(i, j) = 0;
          continue;
        }
        const BigRat v =
            detail::rat_binomial(k, static_cast<long long>(i)) *
            detail::rat_binomial(k, static_cast<long long>(j)) *
            BigRat(static_cast<long long>(j) - static_cast<long long>(i)) /
            (BigRat(2 * (i + j)) *
             detail::rat_binomial(2 * k - 1, static_cast<long long>(i + j)));
        bm.m(i, j) = specfun::from_rational(ctx, v);
      }
    return bm;
  }
  bm.m = detail::spline_matrix_by_quadrature(
      ctx, spec, [](const BigReal &) { return BigReal(1); }, spec.order + 2,
      true);
  return bm;
}

//! (kappa/r)_ij = kappa int B_i B_j / r dr; the (0,0) pair is non-integrable
//! and marked singular (the P(0) = 0 reduction removes it from use).
inline BasisMatrix kappa_over_r_matrix(const PrecisionCtx &ctx,
                                       const BasisSpec &spec, int kappa) {
  ScopedPrecision guard(ctx);
  if (kappa == 0)
    throw DomainError("kappa_over_r_matrix: kappa must be nonzero");
  const std::size_t n = spec.count;
  BasisMatrix bm;
  bm.tag = "kappa_over_r";
  bm.singular_entry = {{0, 0}};
  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    bm.m = linalg::Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        if (i + j == 0)
          continue;
        const BigRat v = detail::rat_binomial(k, static_cast<long long>(i)) *
                         detail::rat_binomial(k, static_cast<long long>(j)) /
                         (BigRat(i + j) *
                          detail::rat_binomial(2 * k,
                                               static_cast<long long>(i + j)));
        bm.m(i, j) = kappa * specfun::from_rational(ctx, v);
        bm.m(j, i) = bm.m(i, j);
      }
    return bm;
  }
  bm.m = detail::spline_matrix_by_quadrature_adaptive(
      ctx, spec, [&](const BigReal &r) { return BigReal(kappa) / r; },
      [&](const BigReal &lo, const BigReal &hi) {
        return detail::nodes_for_pole(ctx, lo, hi, spec.order + 4);
      },
      false);
  bm.m(0, 0) = 0;
  return bm;
}

namespace detail {

//! int_x^1 (1-u)^m / u du, exact finite sum with a log term. Alternating
//! binomials cancel heavily; evaluated with guard digits.
inline BigReal tail_over_u(const PrecisionCtx &ctx, const BigReal &x,
                           unsigned m) {
  const auto guard_digits =
      ctx.digits + static_cast<unsigned>(0.31 * m) + 10;
  ScopedPrecision guard(guard_digits);
  BigReal acc = -log(x);
  for (unsigned j = 1; j <= m; ++j) {
    const BigReal c(specfun::binomial_int(m, j));
    const BigReal term = c * (1 - pow(x, static_cast<int>(j))) / BigReal(j);
    acc += (j % 2 == 0) ? term : -term;
  }
  return round_to(ctx, acc);
}

} // namespace detail

//! Potential matrix (V)_ij = int B_i V(r) B_j dr for a point-charge or
//! uniform-sphere nucleus. Bernstein entries are analytic: the point case
//! shares the 1/r kernel of (kappa/r); the sphere case combines it with the
//! incomplete beta and two terminating 2F1 values. Spline entries use
//! piecewise quadrature split at r_N.
inline BasisMatrix potential_matrix(const PrecisionCtx &ctx,
                                    const BasisSpec &spec,
                                    const NuclearModel &nuc) {
  ScopedPrecision guard(ctx);
  const std::size_t n = spec.count;
  if (nuc.shape == NuclearShape::UniformSphere &&
      !(nuc.r_N > 0 && nuc.r_N < spec.cavity_radius))
    throw DomainError("potential_matrix: need 0 < r_N < R");

  BasisMatrix bm;
  bm.tag = "V";
  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    const BigReal R = spec.cavity_radius;
    bm.m = linalg::Matrix(n, n);

    // point-charge part
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        if (i + j == 0)
          continue;
        const BigRat v = detail::rat_binomial(k, static_cast<long long>(i)) *
                         detail::rat_binomial(k, static_cast<long long>(j)) /
                         (BigRat(i + j) *
                          detail::rat_binomial(2 * k,
                                               static_cast<long long>(i + j)));
        bm.m(i, j) = -nuc.Z * specfun::from_rational(ctx, v);
        bm.m(j, i) = bm.m(i, j);
      }
    if (nuc.shape == NuclearShape::PointCharge) {
      bm.singular_entry = {{0, 0}};
      return bm;
    }

    // uniform-sphere correction confined to r <= r_N
    const BigReal xn = nuc.r_N / R;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const BigReal cicj =
            specfun::from_rational(
                ctx, detail::rat_binomial(k, static_cast<long long>(i)) *
                         detail::rat_binomial(k, static_cast<long long>(j)));
        const int ij = static_cast<int>(i + j);
        if (i + j == 0) {
          // direct evaluation: both 1/r pieces are separately divergent
          const BigReal inner =
              (R / (2 * nuc.r_N)) *
              ((R / nuc.r_N) * (R / nuc.r_N) *
                   specfun::inc_beta(ctx, xn, BigReal(3), BigReal(2 * k + 1)) -
               3 * specfun::inc_beta(ctx, xn, BigReal(1), BigReal(2 * k + 1)));
          const BigReal outer = -detail::tail_over_u(ctx, xn, 2 * k);
          bm.m(0, 0) = nuc.Z * (inner + outer);
          continue;
        }
        const BigReal correction =
            specfun::inc_beta(ctx, xn, BigReal(ij),
                              BigReal(1 - ij + 2 * static_cast<int>(k))) -
            BigReal(3) / 2 * pow(xn, ij) / (1 + ij) *
                specfun::hyp2f1(ctx, BigReal(1 + ij),
                                BigReal(ij - 2 * static_cast<int>(k)),
                                BigReal(2 + ij), xn) +
            BigReal(1) / 2 * pow(xn, ij) / (3 + ij) *
                specfun::hyp2f1(ctx, BigReal(3 + ij),
                                BigReal(ij - 2 * static_cast<int>(k)),
                                BigReal(4 + ij), xn);
        bm.m(i, j) += nuc.Z * cicj * correction;
        bm.m(j, i) = bm.m(i, j);
      }
    return bm;
  }

  // B-spline: split every quadrature interval at r_N
  auto vfun = [&](const BigReal &r) -> BigReal {
    if (nuc.shape == NuclearShape::UniformSphere && r <= nuc.r_N)
      return nuc.Z / (2 * nuc.r_N) * ((r / nuc.r_N) * (r / nuc.r_N) - 3);
    return -nuc.Z / r;
  };
  if (nuc.shape == NuclearShape::PointCharge) {
    bm.m = detail::spline_matrix_by_quadrature_adaptive(
        ctx, spec, vfun,
        [&](const BigReal &lo, const BigReal &hi) {
          return detail::nodes_for_pole(ctx, lo, hi, spec.order + 4);
        },
        false);
    bm.singular_entry = {{0, 0}};
    bm.m(0, 0) = 0;
    return bm;
  }
  // refine the spline break points with r_N so the kink never sits inside a
  // quadrature panel
  std::vector<BigReal> aug = spec.knots;
  aug.insert(std::upper_bound(aug.begin(), aug.end(), nuc.r_N), nuc.r_N);
  // assemble manually over the refined break points
  const unsigned k = spec.order;
  bm.m = linalg::Matrix(n, n);
  std::vector<BigReal> vals;
  for (std::size_t seg = 0; seg + 1 < aug.size(); ++seg) {
    const BigReal lo = aug[seg], hi = aug[seg + 1];
    if (hi <= lo)
      continue;
    const unsigned nn = (lo >= nuc.r_N)
                            ? detail::nodes_for_pole(ctx, lo, hi, k + 4)
                            : k + 4;
    const auto rule = specfun::gauss_legendre_on(ctx, nn, lo, hi);
    for (const auto &[r, w] : rule) {
      const std::size_t span = detail::find_span(spec, r);
      detail::spline_nonzero(spec, k, span, r, vals);
      const BigReal fw = vfun(r) * w;
      for (unsigned a = 0; a < k; ++a) {
        const std::size_t ia = span - k + 1 + a;
        const BigReal left = vals[a] * fw;
        if (left == 0)
          continue;
        for (unsigned b = 0; b < k; ++b)
          bm.m(ia, span - k + 1 + b) += left * vals[b];
      }
    }
  }
  return bm;
}

//! (j_L)_ij = int B_i B_j j_L(omega r / c) dr. Bernstein entries use the
//! regularized 2F3 closed form; spline entries per-interval quadrature with
//! the node count scaled to the oscillation.
inline BasisMatrix bessel_matrix(const PrecisionCtx &ctx, const BasisSpec &spec,
                                 unsigned L, const BigReal &omega,
                                 const BigReal &c) {
  ScopedPrecision guard(ctx);
  if (omega < 0)
    throw DomainError("bessel_matrix: omega must be nonnegative");
  const std::size_t n = spec.count;
  BasisMatrix bm;
  bm.tag = "jL";

  if (spec.kind == BasisKind::BPolynomial) {
    const unsigned k = spec.order;
    const BigReal R = spec.cavity_radius;
    bm.m = linalg::Matrix(n, n);
    if (omega == 0) {
      if (L == 0)
        return gram_matrix(ctx, spec); // j_0(0) = 1
      return bm;                       // j_L(0) = 0 for L >= 1
    }
    const BigReal z = omega * R / c;
    const BigReal x = -(z / 2) * (z / 2);
    const BigReal pi = 4 * atan(BigReal(1));
    const BigReal zL = pow(z, static_cast<int>(L));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const int ij = static_cast<int>(i + j);
        const BigReal pre =
            R * zL *
            specfun::from_rational(
                ctx, detail::rat_binomial(k, static_cast<long long>(i)) *
                         detail::rat_binomial(k, static_cast<long long>(j)) *
                         BigRat(specfun::factorial_int(
                             static_cast<unsigned>(ij) + L)) *
                         BigRat(specfun::factorial_int(2 * k - (i + j)))) *
            pi / pow(BigReal(2), 2 * (static_cast<int>(L + k) + 1));
        const BigReal f = specfun::reg_hyp2f3(
            ctx, BigReal(ij + static_cast<int>(L) + 1) / 2,
            BigReal(ij + static_cast<int>(L) + 2) / 2,
            BigReal(2 * static_cast<int>(L) + 3) / 2,
            BigReal(2 * static_cast<int>(k) + static_cast<int>(L) + 2) / 2,
            BigReal(2 * static_cast<int>(k) + static_cast<int>(L) + 3) / 2, x);
        bm.m(i, j) = pre * f;
        bm.m(j, i) = bm.m(i, j);
      }
    return bm;
  }

  if (omega == 0) {
    if (L == 0)
      return gram_matrix(ctx, spec);
    bm.m = linalg::Matrix(n, n);
    return bm;
  }
  // node count resolving both the polynomial part and the oscillation
  BigReal max_dt = 0;
  for (std::size_t s = spec.order - 1; s < spec.count; ++s)
    max_dt = std::max(max_dt, spec.knots[s + 1] - spec.knots[s]);
  const auto osc = static_cast<unsigned>((omega * max_dt / c).convert_to<double>());
  const unsigned nodes = std::max(spec.order + 2, osc + 4);
  bm.m = detail::spline_matrix_by_quadrature(
      ctx, spec,
      [&](const BigReal &r) { return specfun::sph_bessel_j(ctx, L, omega * r / c); },
      nodes, false);
  return bm;
}

} // namespace fbdirac::basis
