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

// How an entry's p_n was selected.  unit: p_n = 1.  ratio: narrow interval
// [exp(s), exp(s)(1+n^{-1-eps})).  log_band: doubling interval
// [exp(s), 2 exp(s)).  tower: per-prime-power greedy chain.
enum class SelectionRule { unit, ratio, log_band, tower };

std::string rule_name(SelectionRule r);
std::optional<SelectionRule> rule_from_name(const std::string& s);

struct FEntry {
    BigNat p = 1;  // 1 or a certified prime with p = 1 (mod n)
    BigNat g = 0;  // 0 iff p == 1, else the smallest primitive root mod p
    SelectionRule rule = SelectionRule::unit;
    bool in_band = false;  // units carry false
    XReal lo;              // outward-rounded selection interval; 0,0 for units
    XReal hi;
    Primality certainty = Primality::prime;  // of p when p != 1 (not serialized)
};

struct FSeqMeta {
    mpfr_prec_t precision_bits = XReal::kDefaultPrec;
    std::string mode = "manual";  // ratio | log | tower | manual
    std::optional<XReal> eps;     // ratio mode
    std::optional<XReal> kappa;   // tower mode
    std::optional<XReal> c;       // tower mode
    std::uint64_t n0 = 1;
};

struct FSequence {
    FSeqMeta meta;
    std::vector<FEntry> entries;  // entries[i] holds n = i+1

    std::uint64_t size() const { return entries.size(); }
    const FEntry& at(std::uint64_t n) const;  // 1-based, throws beyond length
    FEntry& at(std::uint64_t n);
};

// Line-oriented text format, one record per n; XReal endpoints in exact hex
// so files round-trip bit-exactly.
void save_fsequence(std::ostream& out, const FSequence& seq);
FSequence load_fsequence(std::istream& in);
void save_fsequence_file(const std::string& path, const FSequence& seq);
FSequence load_fsequence_file(const std::string& path);

struct ValidationIssue {
    std::uint64_t n;
    std::string what;
};

// Re-checks the sequence conditions entry by entry: p_1 = 1, each p prime or
// 1, p = 1 (mod n), g = 0 iff p = 1, g a primitive root (order p-1), in-band
// entries lie inside their stored interval.  probable_prime_ns collects
// entries whose primality is probabilistic (>= 2^64) for report labeling.
std::vector<ValidationIssue> validate_fsequence(
    const FSequence& seq, std::vector<std::uint64_t>* probable_prime_ns = nullptr,
    const FactorBudget& budget = {});

}  // namespace fmethod
