#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fmethod/xreal.hpp"

namespace fmethod {

enum class RateKind { multiplicative, tower, explicit_table };

// Target rate function r.  Multiplicative kind is the log-scale object: its
// value at n is the sum of the rule values over the prime powers q^a
// exactly dividing n (so r(1) = 0).  Tower kind is r(n) = iota(n) * log n.
// Explicit kind is a finite table.
struct RateSpec {
    RateKind kind = RateKind::multiplicative;
    mpfr_prec_t precision_bits = XReal::kDefaultPrec;

    // multiplicative: r(p^a) = kappa * a * log p, with optional per-prime-power
    // overrides
    XReal kappa;
    std::map<std::pair<std::uint64_t, unsigned>, XReal> overrides;

    // explicit_table
    std::uint64_t max_n = 0;
    std::map<std::uint64_t, XReal> table;
};

RateSpec make_kappa_rate(const std::string& kappa_decimal,
                         mpfr_prec_t prec = XReal::kDefaultPrec);
RateSpec make_tower_rate(mpfr_prec_t prec = XReal::kDefaultPrec);
RateSpec make_explicit_rate(std::vector<std::pair<std::uint64_t, XReal>> entries,
                            std::uint64_t max_n,
                            mpfr_prec_t prec = XReal::kDefaultPrec);

// Key-value text document; see README for the schema.  Throws ParseError
// citing line and field.
RateSpec load_rate_spec(const std::string& path);
RateSpec parse_rate_spec(std::istream& in);

XReal eval_r(const RateSpec& spec, std::uint64_t n);
// Mobius transform s(n) = sum_{d|n} mu(d) r(n/d), accumulated in ascending
// divisor order at the spec precision.
XReal eval_s(const RateSpec& spec, std::uint64_t n);

// Least k with n below the k-th iterated exponential of e.  The comparison
// is certified by interval evaluation at escalating precision.
unsigned iota(std::uint64_t n);

struct RoundtripReport {
    std::uint64_t n_max = 0;
    XReal max_residual;
    std::uint64_t worst_n = 0;
    XReal tolerance_at_worst;
    std::vector<std::uint64_t> violations;  // n where residual exceeded tol(n)
    bool ok() const { return violations.empty(); }
};

// Re-sums s over divisors and compares with r, n <= n_max.
RoundtripReport mobius_roundtrip_check(const RateSpec& spec, std::uint64_t n_max);

}  // namespace fmethod
