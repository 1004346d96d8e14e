#pragma once

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

#include "fmethod/bignat.hpp"

namespace fmethod {

// Rounding direction for a single operation.  Every XReal operation either
// rounds to nearest or takes an explicit direction, so directed (outward)
// rounding is always visible at the call site.
enum class Round { nearest, down, up };

inline mpfr_rnd_t to_mpfr(Round r) {
    switch (r) {
        case Round::down: return MPFR_RNDD;
        case Round::up: return MPFR_RNDU;
        default: return MPFR_RNDN;
    }
}

// Extended-precision real, a value-semantic wrapper over mpfr_t.  Precision
// is per-value; binary operations produce results at the larger operand
// precision.  The value of a given XReal is exact (a dyadic rational or a
// special); rounding happens only when an operation constructs a new one.
class XReal {
public:
    static constexpr mpfr_prec_t kDefaultPrec = 128;

    XReal() : XReal(kDefaultPrec) {}
    explicit XReal(mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    XReal(const XReal& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    XReal(XReal&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    XReal& operator=(const XReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    XReal& operator=(XReal&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~XReal() { mpfr_clear(v_); }

    static XReal of(long v, mpfr_prec_t prec = kDefaultPrec) {
        XReal r(prec);
        mpfr_set_si(r.v_, v, MPFR_RNDN);
        return r;
    }
    static XReal of(int v, mpfr_prec_t prec = kDefaultPrec) {
        return of(static_cast<long>(v), prec);
    }
    static XReal of_u64(std::uint64_t v, mpfr_prec_t prec = kDefaultPrec) {
        XReal r(prec);
        mpfr_set_uj(r.v_, v, MPFR_RNDN);
        return r;
    }
    static XReal of(double v, mpfr_prec_t prec = kDefaultPrec) {
        XReal r(prec);
        mpfr_set_d(r.v_, v, MPFR_RNDN);
        return r;
    }
    static XReal of(const BigNat& v, mpfr_prec_t prec = kDefaultPrec,
                    Round rnd = Round::nearest) {
        XReal r(prec);
        mpfr_set_z(r.v_, v.get_mpz_t(), to_mpfr(rnd));
        return r;
    }

    // Parses a decimal literal ("21", "-3.5", "1e-3").  Returns false on any
    // trailing garbage or empty input.
    static bool parse_decimal(const std::string& s, mpfr_prec_t prec, XReal& out,
                              Round rnd = Round::nearest) {
        if (s.empty()) return false;
        XReal r(prec);
        char* end = nullptr;
        int rc = mpfr_strtofr(r.v_, s.c_str(), &end, 10, to_mpfr(rnd));
        (void)rc;
        if (end == nullptr || *end != '\0' || end == s.c_str()) return false;
        out = std::move(r);
        return true;
    }

    // Parses the exact hex form produced by to_hex().
    static bool parse_hex(const std::string& s, mpfr_prec_t prec, XReal& out) {
        if (s.empty()) return false;
        XReal r(prec);
        char* end = nullptr;
        mpfr_strtofr(r.v_, s.c_str(), &end, 16, MPFR_RNDN);
        if (end == nullptr || *end != '\0' || end == s.c_str()) return false;
        out = std::move(r);
        return true;
    }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    int cmp(const XReal& o) const { return mpfr_cmp(v_, o.v_); }
    int cmp(const BigNat& o) const { return mpfr_cmp_z(v_, o.get_mpz_t()); }
    int cmp(long o) const { return mpfr_cmp_si(v_, o); }

    friend bool operator<(const XReal& a, const XReal& b) { return a.cmp(b) < 0; }
    friend bool operator<=(const XReal& a, const XReal& b) { return a.cmp(b) <= 0; }
    friend bool operator>(const XReal& a, const XReal& b) { return a.cmp(b) > 0; }
    friend bool operator>=(const XReal& a, const XReal& b) { return a.cmp(b) >= 0; }
    friend bool operator==(const XReal& a, const XReal& b) { return a.cmp(b) == 0; }

    friend XReal add(const XReal& a, const XReal& b, Round rnd = Round::nearest) {
        XReal r(joint_prec(a, b));
        mpfr_add(r.v_, a.v_, b.v_, to_mpfr(rnd));
        return r;
    }
    friend XReal sub(const XReal& a, const XReal& b, Round rnd = Round::nearest) {
        XReal r(joint_prec(a, b));
        mpfr_sub(r.v_, a.v_, b.v_, to_mpfr(rnd));
        return r;
    }
    friend XReal mul(const XReal& a, const XReal& b, Round rnd = Round::nearest) {
        XReal r(joint_prec(a, b));
        mpfr_mul(r.v_, a.v_, b.v_, to_mpfr(rnd));
        return r;
    }
    friend XReal div(const XReal& a, const XReal& b, Round rnd = Round::nearest) {
        XReal r(joint_prec(a, b));
        mpfr_div(r.v_, a.v_, b.v_, to_mpfr(rnd));
        return r;
    }

    friend XReal operator+(const XReal& a, const XReal& b) { return add(a, b); }
    friend XReal operator-(const XReal& a, const XReal& b) { return sub(a, b); }
    friend XReal operator*(const XReal& a, const XReal& b) { return mul(a, b); }
    friend XReal operator/(const XReal& a, const XReal& b) { return div(a, b); }

    XReal operator-() const {
        XReal r(precision());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }
    XReal abs() const {
        XReal r(precision());
        mpfr_abs(r.v_, v_, MPFR_RNDN);
        return r;
    }

    XReal round_to(mpfr_prec_t prec, Round rnd = Round::nearest) const {
        XReal r(prec);
        mpfr_set(r.v_, v_, to_mpfr(rnd));
        return r;
    }

    // Exact floor/ceil to an integer; value must be finite and, for floor,
    // non-negative results are the callers' concern.
    BigNat floor_bignat() const {
        BigNat r;
        mpfr_get_z(r.get_mpz_t(), v_, MPFR_RNDD);
        return r;
    }
    BigNat ceil_bignat() const {
        BigNat r;
        mpfr_get_z(r.get_mpz_t(), v_, MPFR_RNDU);
        return r;
    }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    // Exact textual form (hex mantissa), round-trips bit-exactly through
    // parse_hex at the same precision.
    std::string to_hex() const {
        char* s = nullptr;
        mpfr_asprintf(&s, "%Ra", v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

    // Decimal rendering with the given number of significant digits; used by
    // the CSV/JSON report writers (deterministic for a given value).
    std::string to_decimal(int sig_digits) const {
        char* s = nullptr;
        mpfr_asprintf(&s, "%.*Rg", sig_digits, v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

private:
    static mpfr_prec_t joint_prec(const XReal& a, const XReal& b) {
        return std::max(mpfr_get_prec(a.v_), mpfr_get_prec(b.v_));
    }
    mpfr_t v_;
};

inline XReal log_x(const XReal& a, Round rnd = Round::nearest) {
    XReal r(a.precision());
    mpfr_log(r.raw(), a.raw(), to_mpfr(rnd));
    return r;
}

inline XReal exp_x(const XReal& a, Round rnd = Round::nearest) {
    XReal r(a.precision());
    mpfr_exp(r.raw(), a.raw(), to_mpfr(rnd));
    return r;
}

inline XReal log_of(const BigNat& n, mpfr_prec_t prec, Round rnd = Round::nearest) {
    XReal t(prec), r(prec);
    mpfr_set_z(t.raw(), n.get_mpz_t(), to_mpfr(rnd));
    mpfr_log(r.raw(), t.raw(), to_mpfr(rnd));
    return r;
}

inline XReal log_of_u64(std::uint64_t n, mpfr_prec_t prec, Round rnd = Round::nearest) {
    XReal t = XReal::of_u64(n, prec);
    XReal r(prec);
    mpfr_log(r.raw(), t.raw(), to_mpfr(rnd));
    return r;
}

// a^b at the precision of a.
inline XReal pow_x(const XReal& a, const XReal& b, Round rnd = Round::nearest) {
    XReal r(std::max(a.precision(), b.precision()));
    mpfr_pow(r.raw(), a.raw(), b.raw(), to_mpfr(rnd));
    return r;
}

}  // namespace fmethod
