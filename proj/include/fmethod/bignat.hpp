#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace fmethod {

// Arbitrary-precision natural number.  All operations in this project keep
// values non-negative; boundaries that could go negative assert or clamp
// explicitly at the call site.
using BigNat = mpz_class;

inline BigNat bignat_pow(std::uint64_t base, unsigned long exp) {
    BigNat r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
    return r;
}

inline BigNat bignat_pow(const BigNat& base, unsigned long exp) {
    BigNat r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

// (base^exp) mod m, exact.
inline BigNat powmod(const BigNat& base, const BigNat& exp, const BigNat& m) {
    BigNat r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline bool fits_u64(const BigNat& v) {
    return mpz_sgn(v.get_mpz_t()) >= 0 && mpz_sizeinbase(v.get_mpz_t(), 2) <= 64;
}

inline std::uint64_t to_u64(const BigNat& v) {
    std::uint64_t lo = mpz_getlimbn(v.get_mpz_t(), 0);
    return mpz_size(v.get_mpz_t()) == 0 ? 0 : lo;
}

inline BigNat from_u64(std::uint64_t v) {
    BigNat r;
    mpz_import(r.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
    return r;
}

inline std::string to_string(const BigNat& v) { return v.get_str(10); }

inline std::optional<BigNat> parse_bignat(const std::string& s) {
    if (s.empty()) return std::nullopt;
    BigNat r;
    if (mpz_set_str(r.get_mpz_t(), s.c_str(), 10) != 0 || r < 0) return std::nullopt;
    return r;
}

}  // namespace fmethod
