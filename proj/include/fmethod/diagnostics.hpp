#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmethod/bignat.hpp"
#include "fmethod/xreal.hpp"

namespace fmethod {

enum class ObstructionKind { divisor_blowup, polynomial_gap, chain_contradiction };

std::string obstruction_kind_name(ObstructionKind k);

// Witness that d(n) outruns exp(log n / (2 log log n)), plus the divisor
// pairing identity sum log d = d(n) log n / 2 re-checked both in floating
// point and as the exact integer identity prod(divisors) = n^(d/2).
struct BlowupWitness {
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    XReal threshold_up;  // outward upper bound of the right-hand side
    XReal pairing_lhs;
    XReal pairing_rhs;
    bool product_identity = false;
};

// Per-prime margins certifying q^(2k) + 1 > q^(3k/2) by exact squared
// comparison: margin = (q^(2k)+1)^2 - q^(3k) > 0.
struct GapWitness {
    unsigned k = 0;
    std::uint64_t q_max = 0;
    std::vector<std::pair<std::uint64_t, BigNat>> rows;
};

// Endpoints of the growth sandwich chain at n = q1 q2 for a monotone table
// t: the chain forces 2 t(n)^2 > t(n)^3, contradictory exactly when
// t(n) > 2.
struct ChainWitness {
    std::uint64_t q1 = 0, q2 = 0, n = 0;
    std::vector<std::pair<std::uint64_t, XReal>> t_points;  // sorted by m
    XReal r_q1;  // t(q1^2)^3
    XReal r_q2;  // t(q2^2)^3
    XReal r_n;   // t(n)^2
    XReal two_t_sq;
    XReal mid;  // (r_q1 + r_q2)/2
    XReal t_cubed;
    bool contradiction = false;
    std::string note;
};

struct ObstructionCertificate {
    ObstructionKind kind = ObstructionKind::divisor_blowup;
    mpfr_prec_t precision_bits = XReal::kDefaultPrec;
    bool verified = false;
    std::optional<BlowupWitness> blowup;
    std::optional<GapWitness> gap;
    std::optional<ChainWitness> chain;
};

// Scans primorial-shaped candidates plus an exhaustive sweep below 10^6 for
// n in [16, search_bound] maximizing d(n) (smallest such n on ties).
ObstructionCertificate divisor_blowup_witness(std::uint64_t search_bound,
                                              mpfr_prec_t prec = XReal::kDefaultPrec);

ObstructionCertificate polynomial_gap_check(unsigned k, std::uint64_t q_max,
                                            mpfr_prec_t prec = XReal::kDefaultPrec);

ObstructionCertificate chain_contradiction_demo(
    const std::map<std::uint64_t, XReal>& t_table, std::uint64_t q1, std::uint64_t q2,
    mpfr_prec_t prec = XReal::kDefaultPrec);

// t(m) = log m at the six points the chain needs.
std::map<std::uint64_t, XReal> chain_log_table(std::uint64_t q1, std::uint64_t q2,
                                               mpfr_prec_t prec = XReal::kDefaultPrec);
std::map<std::uint64_t, XReal> chain_constant_table(std::uint64_t q1, std::uint64_t q2,
                                                    long value,
                                                    mpfr_prec_t prec = XReal::kDefaultPrec);

void save_certificate(std::ostream& out, const ObstructionCertificate& cert);
ObstructionCertificate load_certificate(std::istream& in);

// Recomputes every derived field and inequality from the stored witness
// primitives; true iff they reproduce bit-exactly and the verified flag
// matches the recomputed outcome.
bool reverify_certificate(const ObstructionCertificate& cert);

}  // namespace fmethod
