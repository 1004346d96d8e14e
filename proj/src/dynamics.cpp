#include "fmethod/dynamics.hpp"

#include <json.hpp>

#include <ostream>

#include "fmethod/arith.hpp"
#include "fmethod/errors.hpp"

namespace fmethod {

TruncatedSystem build_truncated(const FSequence& seq, std::uint64_t M,
                                std::uint64_t size_cap, bool certify_orders) {
    if (M > seq.size())
        throw ConfigError("build_truncated: M exceeds sequence length");
    TruncatedSystem sys;
    for (std::uint64_t m = 1; m <= M; m++) {
        const FEntry& e = seq.at(m);
        TruncComponent c;
        c.m = m;
        if (e.p == 1) {
            sys.comps.push_back(c);
            continue;
        }
        if (!fits_u64(e.p) || to_u64(e.p) > size_cap)
            throw BudgetError("build_truncated: p_" + std::to_string(m) +
                              " exceeds the oracle size cap");
        c.p = to_u64(e.p);
        BigNat exp = (e.p - 1) / BigNat(static_cast<unsigned long>(m));
        c.lambda = to_u64(powmod(e.g, exp, e.p));
        if (certify_orders) {
            BigNat ord = multiplicative_order(BigNat(static_cast<unsigned long>(c.lambda)),
                                              e.p);
            if (ord != BigNat(static_cast<unsigned long>(m)))
                throw Error("build_truncated: multiplier order mismatch at m=" +
                            std::to_string(m));
        }
        sys.comps.push_back(c);
    }
    return sys;
}

std::uint64_t component_fixed_count(const TruncComponent& comp, std::uint64_t n) {
    if (comp.p == 1) return 1;
    const std::uint64_t p = comp.p;
    const std::uint64_t c = detail::powmod_u64(comp.lambda, n, p);
    std::uint64_t count = 0;
    for (std::uint64_t x = 0; x < p; x++) {
        std::uint64_t cx = static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(c) * x % p);
        if (cx == x) count++;
    }
    return count;
}

BigNat brute_fixed_points(const TruncatedSystem& sys, std::uint64_t n) {
    BigNat prod = 1;
    for (const auto& comp : sys.comps)
        prod *= BigNat(static_cast<unsigned long>(component_fixed_count(comp, n)));
    return prod;
}

BigNat brute_fixed_points_full_product(const TruncatedSystem& sys, std::uint64_t n,
                                       std::uint64_t total_cap) {
    BigNat total = 1;
    for (const auto& comp : sys.comps) total *= BigNat(static_cast<unsigned long>(comp.p));
    if (!fits_u64(total) || to_u64(total) > total_cap)
        throw BudgetError("full-product oracle: group size exceeds cap");

    std::vector<std::uint64_t> mult;  // lambda^n per component
    std::vector<std::uint64_t> sizes;
    for (const auto& comp : sys.comps) {
        sizes.push_back(comp.p);
        mult.push_back(comp.p == 1 ? 0 : detail::powmod_u64(comp.lambda, n, comp.p));
    }
    std::vector<std::uint64_t> state(sys.comps.size(), 0);
    std::uint64_t fixed = 0;
    while (true) {
        bool is_fixed = true;
        for (size_t i = 0; i < state.size(); i++) {
            if (sizes[i] == 1) continue;
            std::uint64_t image = static_cast<std::uint64_t>(
                static_cast<unsigned __int128>(mult[i]) * state[i] % sizes[i]);
            if (image != state[i]) {
                is_fixed = false;
                break;
            }
        }
        if (is_fixed) fixed++;
        // mixed-radix increment
        size_t i = 0;
        while (i < state.size()) {
            if (++state[i] < sizes[i]) break;
            state[i] = 0;
            i++;
        }
        if (i == state.size()) break;
    }
    return BigNat(static_cast<unsigned long>(fixed));
}

std::uint64_t least_period(const TruncatedSystem& sys, std::uint64_t m, std::uint64_t x) {
    if (m < 1 || m > sys.comps.size())
        throw ConfigError("least_period: no component at m=" + std::to_string(m));
    const TruncComponent& comp = sys.comps[m - 1];
    if (x >= comp.p) throw ConfigError("least_period: x out of range");
    if (x == 0) return 1;
    std::uint64_t y = x, k = 0;
    do {
        y = static_cast<std::uint64_t>(static_cast<unsigned __int128>(comp.lambda) * y %
                                       comp.p);
        k++;
    } while (y != x);
    return k;
}

OracleReport oracle_compare(const FSequence& seq, std::uint64_t M, std::uint64_t n_max,
                            std::uint64_t size_cap) {
    TruncatedSystem sys = build_truncated(seq, M, size_cap, /*certify_orders=*/false);
    OracleReport rep;
    for (std::uint64_t n = 1; n <= n_max; n++) {
        OracleRow row;
        row.n = n;
        row.formula = 1;
        for (std::uint64_t d : divisors(n)) {
            if (d <= M) row.formula *= seq.at(d).p;
        }
        row.brute = brute_fixed_points(sys, n);
        row.match = row.formula == row.brute;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void write_oracle_csv(std::ostream& out, const OracleReport& rep) {
    out << "n,formula_count,brute_count,match\n";
    for (const auto& r : rep.rows) {
        out << r.n << ',' << to_string(r.formula) << ',' << to_string(r.brute) << ','
            << (r.match ? 1 : 0) << '\n';
    }
}

void write_oracle_json(std::ostream& out, const OracleReport& rep) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json o;
        o["n"] = r.n;
        o["formula_count"] = to_string(r.formula);
        o["brute_count"] = to_string(r.brute);
        o["match"] = r.match;
        arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
}

}  // namespace fmethod
