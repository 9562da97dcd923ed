#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <stdexcept>
#include <string>

namespace fbdirac {

namespace mp = boost::multiprecision;

//! Arbitrary-precision real. Working precision is variable per value;
//! fresh values are created at the precision installed by ScopedPrecision.
using BigReal = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

//! Exact integer / rational scratch types for combinatorial coefficients.
using BigInt = mp::mpz_int;
using BigRat = mp::mpq_rational;

//! Significant-decimal-digit count threaded through all arithmetic.
//! Every operation taking a ctx returns values with relative rounding
//! error at most 10^(1-digits).
struct PrecisionCtx {
  unsigned digits = 34;

  explicit PrecisionCtx(unsigned d = 34) : digits(d) {
    if (d < 16)
      throw std::invalid_argument("PrecisionCtx: digits must be >= 16");
  }

  //! Absolute tolerance scale 10^(-digits).
  BigReal eps() const;
};

//! RAII guard: installs `digits` as the default precision for newly
//! created BigReals, restores the previous default on exit.
class ScopedPrecision {
public:
  explicit ScopedPrecision(unsigned digits)
      : saved_(BigReal::default_precision()) {
    BigReal::default_precision(digits);
  }
  explicit ScopedPrecision(const PrecisionCtx &ctx)
      : ScopedPrecision(ctx.digits) {}
  ~ScopedPrecision() { BigReal::default_precision(saved_); }
  ScopedPrecision(const ScopedPrecision &) = delete;
  ScopedPrecision &operator=(const ScopedPrecision &) = delete;

private:
  unsigned saved_;
};

inline BigReal pow10(int e) {
  return mp::pow(BigReal(10), e);
}

//! Round x to ctx precision (value-preserving up to the final rounding).
inline BigReal round_to(const PrecisionCtx &ctx, BigReal x) {
  x.precision(ctx.digits);
  return x;
}

inline BigReal PrecisionCtx::eps() const {
  return pow10(-static_cast<int>(digits));
}

//! Full-precision decimal string (round-trips exactly at equal precision).
inline std::string to_full_string(const BigReal &x) {
  return x.str(0, std::ios_base::scientific);
}

//! Fixed significant-digit rendering for human-readable tables.
inline std::string to_digits_string(const BigReal &x, unsigned sig) {
  return x.str(sig, std::ios_base::scientific);
}

// ---------------------------------------------------------------------------
// Error taxonomy shared across the library.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Argument outside an operation's domain.
struct DomainError : Error {
  using Error::Error;
};

//! Gamma-type pole hit (nonpositive integer argument).
struct PoleError : DomainError {
  using DomainError::DomainError;
};

//! A series or iteration failed to reach tolerance within its cap.
struct ConvergenceError : Error {
  using Error::Error;
};

//! Matrix entry whose defining integral is non-integrable.
struct SingularEntryError : Error {
  using Error::Error;
};

//! Factorization failure: metric matrix not positive definite at the
//! working precision (basis too large for the digit count).
struct NotPositiveDefinite : Error {
  using Error::Error;
};

//! Second-order energy denominator collapsed (cascade pole).
struct ResonanceError : Error {
  using Error::Error;
};

//! Channel construction with no allowed intermediate symmetry.
struct SelectionRuleError : Error {
  using Error::Error;
};

//! Configuration / input file problem (maps to CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

} // namespace fbdirac
