#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fmethod/bignat.hpp"
#include "fmethod/xreal.hpp"

namespace fmethod {

// How a primality claim was certified.  Below 2^64 the Miller-Rabin witness
// set is deterministic and `prime` is a proof; above, the BPSW battery plus
// extra rounds yields `probable_prime` and reports must say so.
enum class Primality { composite, prime, probable_prime };

struct FactorBudget {
    std::uint32_t trial_bound = 1'000'000;     // trial division by primes below this
    std::uint64_t rho_iter_cap = 1ull << 28;   // Pollard-Brent iterations per polynomial
    int rho_poly_tries = 8;
    int extra_mr_rounds = 24;                  // beyond BPSW, n >= 2^64 only
};

struct FactorEntry {
    BigNat prime;
    unsigned exponent;
    Primality certainty;
};

struct Factorization {
    BigNat value;
    std::vector<FactorEntry> factors;  // primes strictly increasing, exponents >= 1

    unsigned omega() const { return static_cast<unsigned>(factors.size()); }
    std::uint64_t divisor_count() const {
        std::uint64_t d = 1;
        for (const auto& f : factors) d *= f.exponent + 1;
        return d;
    }
    bool deterministic() const {
        for (const auto& f : factors)
            if (f.certainty != Primality::prime) return false;
        return true;
    }
};

// Trial division, then Pollard-Brent rho, then a budget error.  n >= 1.
Factorization factorize(const BigNat& n, const FactorBudget& budget = {});
Factorization factorize_u64(std::uint64_t n);

Primality classify_prime(const BigNat& n, const FactorBudget& budget = {});
bool is_prime(const BigNat& n, const FactorBudget& budget = {});
bool is_prime_u64(std::uint64_t n);  // deterministic witness set

int mobius(std::uint64_t n);
std::vector<std::uint64_t> divisors(std::uint64_t n);
std::uint64_t divisor_count(std::uint64_t n);

// Least e >= 1 with g^e = 1 mod p, by factoring p-1 and stripping prime
// factors.  p prime, 1 <= g < p.
BigNat multiplicative_order(const BigNat& g, const BigNat& p,
                            const FactorBudget& budget = {});
BigNat multiplicative_order(const BigNat& g, const BigNat& p,
                            const Factorization& p_minus_1);

// Smallest primitive root mod p; 1 for p = 2.
BigNat primitive_root(const BigNat& p, const FactorBudget& budget = {});
BigNat primitive_root(const BigNat& p, const Factorization& p_minus_1);

// log p when m = p^k, else 0.
XReal von_mangoldt(std::uint64_t m, mpfr_prec_t prec = XReal::kDefaultPrec);
std::optional<std::pair<std::uint64_t, unsigned>> prime_power_decompose(std::uint64_t m);

// Primes below 10^6, built once.
const std::vector<std::uint32_t>& small_primes();

// Segmented sieve over [lo, hi); requires hi <= 10^12.
std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi);

namespace detail {
// Exposed for tests: the strong Lucas probable-prime test (Selfridge
// parameters) used inside the BPSW battery.  n odd, n > 3, not a square.
bool strong_lucas_selfridge(const BigNat& n);
std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m);
}  // namespace detail

}  // namespace fmethod
