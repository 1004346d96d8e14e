#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fmethod/bignat.hpp"
#include "fmethod/fsequence.hpp"

namespace fmethod {

// One coordinate of the truncated product system: the additive group of
// F_p acted on by multiplication with lambda = g^((p-1)/m), whose
// multiplicative order is m.  p = 1 encodes the one-point component.
struct TruncComponent {
    std::uint64_t m = 0;
    std::uint64_t p = 1;
    std::uint64_t lambda = 0;
};

struct TruncatedSystem {
    std::vector<TruncComponent> comps;  // m = 1..M
};

// Builds components for m = 1..M.  Throws BudgetError when some p_m exceeds
// size_cap.  With certify_orders, checks each multiplier's multiplicative
// order equals m and throws Error otherwise; oracle_compare builds without
// certification so corrupted inputs surface as count mismatches instead.
TruncatedSystem build_truncated(const FSequence& seq, std::uint64_t M,
                                std::uint64_t size_cap = 1'000'000,
                                bool certify_orders = true);

// Counts x in F_p with lambda^n x = x by literal iteration over all x.
std::uint64_t component_fixed_count(const TruncComponent& comp, std::uint64_t n);

// Product of the per-component counts: the fixed points of the n-th iterate
// on the truncated product.
BigNat brute_fixed_points(const TruncatedSystem& sys, std::uint64_t n);

// Second-level oracle: enumerates the full product group (total size
// capped) and applies the map literally to every element.
BigNat brute_fixed_points_full_product(const TruncatedSystem& sys, std::uint64_t n,
                                       std::uint64_t total_cap = 1'000'000);

// Least k >= 1 with lambda^k x = x, by iteration.
std::uint64_t least_period(const TruncatedSystem& sys, std::uint64_t m, std::uint64_t x);

struct OracleRow {
    std::uint64_t n = 0;
    BigNat formula;  // product of p_d over d | n, d <= M
    BigNat brute;
    bool match = false;
};

struct OracleReport {
    std::vector<OracleRow> rows;
    bool all_match() const {
        for (const auto& r : rows)
            if (!r.match) return false;
        return true;
    }
};

OracleReport oracle_compare(const FSequence& seq, std::uint64_t M, std::uint64_t n_max,
                            std::uint64_t size_cap = 1'000'000);

void write_oracle_csv(std::ostream& out, const OracleReport& rep);
void write_oracle_json(std::ostream& out, const OracleReport& rep);

}  // namespace fmethod
