#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmethod/fsequence.hpp"
#include "fmethod/prime_search.hpp"
#include "fmethod/rates.hpp"

namespace fmethod {

enum class SynthMode { ratio, log_band };

struct SynthOptions {
    std::uint64_t n_max = 1;
    SynthMode mode = SynthMode::log_band;
    XReal eps;  // ratio mode only, must be > 0 there
    SearchPolicy policy = SearchPolicy::extend_up;
    std::uint64_t n0 = 1;
    mpfr_prec_t precision_bits = 0;  // 0: take the rate spec's precision
    std::uint64_t extend_cap = 1'000'000;
    int threads = 1;
    FactorBudget budget;
};

struct SynthStats {
    std::uint64_t units = 0;
    std::uint64_t in_band = 0;
    std::uint64_t extended = 0;  // found beyond the band (extend_up)
    std::uint64_t hypothesis_violations = 0;
    std::vector<std::uint64_t> probable_prime_ns;
    std::vector<std::uint64_t> infeasible_unit_ns;  // units with s(n) > 0
};

// Entry n gets p_n = 1 below n0, when s(n) has no room (exp(s(n)) < n+1,
// which covers s = 0), and otherwise the smallest prime = 1 (mod n) at or
// above exp(s(n)), with band membership certified against the exact
// endpoints by interval evaluation at escalating precision.
FSequence synthesize(const RateSpec& spec, const SynthOptions& opts,
                     SynthStats* stats = nullptr);

struct TowerOptions {
    std::uint64_t n_max = 1;
    XReal kappa;  // must be > 13.4
    XReal c;      // must be > 1
    mpfr_prec_t precision_bits = XReal::kDefaultPrec;
    std::uint64_t extend_cap = 1'000'000;
    FactorBudget budget;
};

struct TowerCertRow {
    std::uint64_t q = 0;
    unsigned a = 0;
    XReal delta;  // r(q^a) minus the running sum of chosen logs
    BigNat p = 1;
    bool prime_chosen = false;
    bool in_band = false;
    bool failed = false;
    std::string fail_reason;
};

struct TowerCertificate {
    mpfr_prec_t precision_bits = XReal::kDefaultPrec;
    std::uint64_t n_max = 0;
    XReal kappa;
    XReal c;
    std::vector<TowerCertRow> rows;  // ordered by (q, a)
};

FSequence synthesize_tower(const TowerOptions& opts, TowerCertificate* cert = nullptr,
                           SynthStats* stats = nullptr);

void save_tower_certificate(std::ostream& out, const TowerCertificate& cert);
TowerCertificate load_tower_certificate(std::istream& in);

struct TowerReplayResult {
    bool ok = true;
    std::vector<std::uint64_t> violations;  // prime powers where the bound failed
};

// Recomputes the per-chain bound |sum of chosen logs - r(q^a)| <=
// log(c q^(a kappa)) from the sequence alone, with outward rounding, at
// every prime power up to the certificate range.
TowerReplayResult replay_tower_certificate(const FSequence& seq,
                                           const TowerCertificate& cert);

// Exact product of p_d over divisors d of n.
BigNat count_periodic(const FSequence& seq, std::uint64_t n);
// Sum of log p_d at the sequence precision.
XReal log_count(const FSequence& seq, std::uint64_t n);

struct GrowthRow {
    std::uint64_t n = 0;
    XReal r;
    XReal s;
    XReal logF;
    XReal ratio_exp;                // logF - r
    std::optional<XReal> ratio_log; // logF / r when r != 0
    XReal error_budget;
    bool within_budget = true;
    bool all_in_band = true;  // every non-unit divisor entry was in band
};

struct GrowthReport {
    std::string mode;
    mpfr_prec_t precision_bits = XReal::kDefaultPrec;
    std::vector<GrowthRow> rows;
    bool all_within() const {
        for (const auto& r : rows)
            if (!r.within_budget) return false;
        return true;
    }
};

// Per-n recomputation of log F against the rate, with the per-mode error
// budget: ratio sums log(1 + d^(-1-eps)) over prime divisors entries, log
// mode charges log 2 per non-unit divisor, tower replays the per-chain
// bound; unit entries with nonzero s are charged |s(d)|.
GrowthReport verify_growth(const FSequence& seq, const RateSpec& spec,
                           std::uint64_t n_lo, std::uint64_t n_hi);

void write_growth_csv(std::ostream& out, const GrowthReport& rep);
void write_growth_json(std::ostream& out, const GrowthReport& rep);

}  // namespace fmethod
