#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmethod/arith.hpp"
#include "fmethod/bignat.hpp"
#include "fmethod/xreal.hpp"

namespace fmethod {

enum class SearchPolicy { strict, extend_up };

struct APIntervalQuery {
    BigNat a;
    BigNat n;
    BigNat lo;  // half-open [lo, hi)
    BigNat hi;
    SearchPolicy policy = SearchPolicy::strict;
    std::uint64_t extend_cap = 1'000'000;  // candidate cap, extend_up only
};

struct APIntervalResult {
    std::optional<BigNat> found;
    bool in_band = false;  // found < hi
    std::uint64_t scanned = 0;
    Primality certainty = Primality::prime;
};

// Smallest prime >= lo congruent to a mod n.  Strict: absent if that prime
// is >= hi.  ExtendUp: keeps going past hi up to extend_cap candidates.
APIntervalResult find_prime_in_ap_interval(const APIntervalQuery& q,
                                           const FactorBudget& budget = {});

// Smallest prime p >= start with p = a mod n (a reduced mod n internally).
BigNat least_prime_in_ap(const BigNat& a, const BigNat& n, const BigNat& start,
                         std::uint64_t cap = 100'000'000,
                         const FactorBudget& budget = {});

// Exact data of a psi difference: psi(x+h,a,n) - psi(x,a,n) equals
// log(product) where product multiplies p once for every prime power
// p^k = a (mod n) in the window.
struct PsiBlock {
    BigNat product = 1;
    std::uint64_t terms = 0;
};

// Window of integers m in [m_lo, m_hi], m = a (mod n).
PsiBlock psi_block(const BigNat& m_lo, const BigNat& m_hi, const BigNat& a,
                   const BigNat& n, std::uint64_t range_cap = 1'000'000'000ull);

// psi(x+h,a,n) - psi(x,a,n) by direct summation; the returned value is the
// correctly rounded log of the exact prime-power product over the window.
XReal psi_diff(const XReal& x, const XReal& h, const BigNat& a, const BigNat& n,
               std::uint64_t range_cap = 1'000'000'000ull,
               mpfr_prec_t prec = XReal::kDefaultPrec);

enum class WidthMode { bertrand, short_interval };

struct LinnikScanConfig {
    std::uint64_t n_max = 10;
    XReal kappa;
    WidthMode mode = WidthMode::bertrand;
    XReal eps;
    bool sample_only = false;  // only a in {1, n-1} instead of all coprime a
    std::uint64_t extend_cap = 1'000'000;
    std::uint64_t least_prime_cap = 100'000'000;
    mpfr_prec_t prec = XReal::kDefaultPrec;
};

struct LinnikRow {
    std::uint64_t n = 0;
    std::uint64_t a = 0;
    BigNat x;
    BigNat band_lo;
    BigNat band_hi;
    std::optional<BigNat> found;
    bool in_band = false;
    std::optional<XReal> overshoot;  // (found - x) / band width
    std::optional<BigNat> least_prime;
    std::optional<XReal> empirical_exponent;  // log(least_prime)/log(n)
    bool failed = false;
    std::string fail_reason;
};

std::vector<LinnikRow> linnik_scan(const LinnikScanConfig& cfg);
void write_linnik_csv(std::ostream& out, const std::vector<LinnikRow>& rows);
void write_linnik_json(std::ostream& out, const std::vector<LinnikRow>& rows);

}  // namespace fmethod
