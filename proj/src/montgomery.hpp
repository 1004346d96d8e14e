#pragma once

// Fixed-width Montgomery arithmetic for odd moduli up to kMaxLimbs words.
// Internal to the arith module: backs the Miller-Rabin witness loop and
// Pollard-Brent rho for the ~160-bit numbers this project factors, where
// mpz-level modular reduction is the bottleneck.

#include <gmp.h>

#include <cstdint>
#include <cstring>

namespace fmethod::detail {

inline constexpr int kMaxLimbs = 4;

struct MontCtx {
    int nl = 0;                    // limb count of the modulus
    mp_limb_t n[kMaxLimbs];        // modulus, odd
    mp_limb_t rr[kMaxLimbs];       // R^2 mod n,  R = 2^(64*nl)
    mp_limb_t one[kMaxLimbs];      // R mod n (Montgomery image of 1)
    mp_limb_t ninv = 0;            // -n^{-1} mod 2^64

    // m must be odd and occupy at most kMaxLimbs limbs.
    bool init(const mpz_t m) {
        nl = static_cast<int>(mpz_size(m));
        if (nl == 0 || nl > kMaxLimbs || mpz_sgn(m) <= 0 || mpz_even_p(m)) return false;
        for (int i = 0; i < nl; i++) n[i] = mpz_getlimbn(m, i);
        // ninv = -n^{-1} mod 2^64 by Newton iteration
        mp_limb_t inv = n[0];
        for (int i = 0; i < 6; i++) inv *= 2 - n[0] * inv;
        ninv = static_cast<mp_limb_t>(0) - inv;
        // one = R mod n, rr = R^2 mod n via mpn division
        mp_limb_t big[2 * kMaxLimbs + 1];
        std::memset(big, 0, sizeof(big));
        big[nl] = 1;  // R
        mp_limb_t q[kMaxLimbs + 2];
        mpn_tdiv_qr(q, one, 0, big, nl + 1, n, nl);
        std::memset(big, 0, sizeof(big));
        big[2 * nl] = 1;  // R^2
        mpn_tdiv_qr(q, rr, 0, big, 2 * nl + 1, n, nl);
        return true;
    }

    // r = REDC(t) for a 2*nl-limb t.  t is clobbered.
    void redc(mp_limb_t* r, mp_limb_t* t) const {
        mp_limb_t carry = 0;
        for (int i = 0; i < nl; i++) {
            mp_limb_t m = t[i] * ninv;
            mp_limb_t c = mpn_addmul_1(t + i, n, nl, m);
            carry += mpn_add_1(t + i + nl, t + i + nl, nl - i, c);
        }
        // result in t[nl..2nl-1], plus carry beyond
        if (carry != 0 || mpn_cmp(t + nl, n, nl) >= 0) {
            mpn_sub_n(r, t + nl, n, nl);
        } else {
            std::memcpy(r, t + nl, nl * sizeof(mp_limb_t));
        }
    }

    void mul(mp_limb_t* r, const mp_limb_t* a, const mp_limb_t* b) const {
        mp_limb_t t[2 * kMaxLimbs];
        mpn_mul_n(t, a, b, nl);
        redc(r, t);
    }

    void sqr(mp_limb_t* r, const mp_limb_t* a) const {
        mp_limb_t t[2 * kMaxLimbs];
        mpn_sqr(t, a, nl);
        redc(r, t);
    }

    // r = (a + b) mod n, operands already reduced
    void add(mp_limb_t* r, const mp_limb_t* a, const mp_limb_t* b) const {
        mp_limb_t c = mpn_add_n(r, a, b, nl);
        if (c != 0 || mpn_cmp(r, n, nl) >= 0) mpn_sub_n(r, r, n, nl);
    }

    // r = |a - b| mod n (as the non-negative difference of reduced operands)
    void sub_abs(mp_limb_t* r, const mp_limb_t* a, const mp_limb_t* b) const {
        if (mpn_cmp(a, b, nl) >= 0) {
            mpn_sub_n(r, a, b, nl);
        } else {
            mpn_sub_n(r, b, a, nl);
        }
    }

    // to Montgomery domain
    void to_mont(mp_limb_t* r, const mpz_t v) const {
        mp_limb_t tmp[kMaxLimbs];
        std::memset(tmp, 0, sizeof(tmp));
        int vs = static_cast<int>(mpz_size(v));
        for (int i = 0; i < vs && i < nl; i++) tmp[i] = mpz_getlimbn(v, i);
        mul(r, tmp, rr);
    }

    void from_mont(mpz_t out, const mp_limb_t* a) const {
        mp_limb_t t[2 * kMaxLimbs];
        std::memset(t, 0, sizeof(t));
        std::memcpy(t, a, nl * sizeof(mp_limb_t));
        mp_limb_t r[kMaxLimbs];
        redc(r, t);
        mpz_t tmp;
        mpz_init(tmp);
        mpz_import(tmp, nl, -1, sizeof(mp_limb_t), 0, 0, r);
        mpz_set(out, tmp);
        mpz_clear(tmp);
    }

    bool eq(const mp_limb_t* a, const mp_limb_t* b) const {
        return mpn_cmp(a, b, nl) == 0;
    }

    bool is_zero(const mp_limb_t* a) const {
        for (int i = 0; i < nl; i++)
            if (a[i] != 0) return false;
        return true;
    }

    // Montgomery image of n-1 (i.e. -1)
    void minus_one(mp_limb_t* r) const { mpn_sub_n(r, n, one, nl); }

    // r = a^e mod n, a in Montgomery form, e an ordinary mpz exponent >= 0
    void pow(mp_limb_t* r, const mp_limb_t* a, const mpz_t e) const {
        mp_limb_t base[kMaxLimbs];
        std::memcpy(base, a, nl * sizeof(mp_limb_t));
        std::memcpy(r, one, nl * sizeof(mp_limb_t));
        if (mpz_sgn(e) == 0) return;
        long bits = static_cast<long>(mpz_sizeinbase(e, 2));
        for (long i = bits - 1; i >= 0; i--) {
            sqr(r, r);
            if (mpz_tstbit(e, static_cast<mp_bitcnt_t>(i))) mul(r, r, base);
        }
    }
};

}  // namespace fmethod::detail
