#include "fmethod/prime_search.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <ostream>

#include "fmethod/errors.hpp"

namespace fmethod {

namespace {

// first candidate >= lo with candidate = a (mod n)
BigNat first_candidate(const BigNat& a, const BigNat& n, const BigNat& lo) {
    BigNat delta = ((a - lo) % n + n) % n;
    return lo + delta;
}

void check_query(const APIntervalQuery& q) {
    if (q.n < 1) throw ConfigError("invalid query: modulus n must be >= 1");
    if (q.a < 0 || q.a >= q.n) throw ConfigError("invalid query: need 0 <= a < n");
    BigNat g;
    mpz_gcd(g.get_mpz_t(), q.a.get_mpz_t(), q.n.get_mpz_t());
    if (g != 1) throw ConfigError("invalid query: gcd(a, n) != 1");
    if (q.lo >= q.hi) throw ConfigError("invalid query: need lo < hi");
}

}  // namespace

APIntervalResult find_prime_in_ap_interval(const APIntervalQuery& q,
                                           const FactorBudget& budget) {
    check_query(q);
    APIntervalResult res;
    BigNat c = first_candidate(q.a, q.n, q.lo);
    while (true) {
        if (q.policy == SearchPolicy::strict && c >= q.hi) return res;
        if (q.policy == SearchPolicy::extend_up && res.scanned >= q.extend_cap)
            throw BudgetError("find_prime_in_ap_interval: candidate cap exceeded (n=" +
                              to_string(q.n) + ", a=" + to_string(q.a) + ")");
        res.scanned++;
        Primality cls = classify_prime(c, budget);
        if (cls != Primality::composite) {
            res.found = c;
            res.in_band = c < q.hi;
            res.certainty = cls;
            return res;
        }
        c += q.n;
    }
}

BigNat least_prime_in_ap(const BigNat& a, const BigNat& n, const BigNat& start,
                         std::uint64_t cap, const FactorBudget& budget) {
    if (n < 1) throw ConfigError("least_prime_in_ap: modulus must be >= 1");
    BigNat ar = ((a % n) + n) % n;
    BigNat g;
    mpz_gcd(g.get_mpz_t(), ar.get_mpz_t(), n.get_mpz_t());
    if (g != 1) throw ConfigError("least_prime_in_ap: gcd(a, n) != 1");
    BigNat from = start < 2 ? BigNat(2) : start;
    BigNat c = first_candidate(ar, n, from);
    for (std::uint64_t scanned = 0; scanned < cap; scanned++) {
        if (classify_prime(c, budget) != Primality::composite) return c;
        c += n;
    }
    throw BudgetError("least_prime_in_ap: candidate cap exceeded (n=" + to_string(n) +
                      ", a=" + to_string(ar) + ")");
}

PsiBlock psi_block(const BigNat& m_lo_in, const BigNat& m_hi_in, const BigNat& a,
                   const BigNat& n, std::uint64_t range_cap) {
    PsiBlock out;
    if (n < 1) throw ConfigError("psi_block: modulus must be >= 1");
    BigNat m_lo = m_lo_in < 2 ? BigNat(2) : m_lo_in;
    if (m_hi_in < m_lo) return out;
    if (!fits_u64(m_hi_in) || to_u64(m_hi_in) > 1'000'000'000'000ull)
        throw BudgetError("psi_block: window beyond the 10^12 sieve bound");
    std::uint64_t lo = to_u64(m_lo), hi = to_u64(m_hi_in);
    if (hi - lo + 1 > range_cap)
        throw BudgetError("psi_block: window wider than the summation budget");

    std::uint64_t av = 0, nv = 0;
    bool small_mod = fits_u64(n);
    if (small_mod) {
        nv = to_u64(n);
        av = to_u64(((a % n) + n) % n);
    }

    auto in_class = [&](std::uint64_t m) {
        if (small_mod) return m % nv == av % nv;
        BigNat mm = from_u64(m);
        return mpz_congruent_p(mm.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t()) != 0;
    };

    // balanced product accumulation (sizes roughly double up the stack)
    std::vector<BigNat> stack;
    auto push_factor = [&](std::uint64_t p) {
        out.terms++;
        stack.push_back(from_u64(p));
        while (stack.size() >= 2 &&
               mpz_size(stack[stack.size() - 1].get_mpz_t()) >=
                   mpz_size(stack[stack.size() - 2].get_mpz_t())) {
            BigNat top = stack.back();
            stack.pop_back();
            stack.back() *= top;
        }
    };

    // primes in [lo, hi], segmented
    const std::uint64_t seg = 1 << 22;
    const auto& base = small_primes();
    std::vector<bool> comp;
    for (std::uint64_t s0 = lo; s0 <= hi;) {
        std::uint64_t s1 = std::min(hi, s0 + seg - 1);
        comp.assign(s1 - s0 + 1, false);
        for (std::uint32_t p : base) {
            std::uint64_t p2 = static_cast<std::uint64_t>(p) * p;
            if (p2 > s1) break;
            std::uint64_t start = std::max(p2, (s0 + p - 1) / p * p);
            for (std::uint64_t j = start; j <= s1; j += p) comp[j - s0] = true;
        }
        for (std::uint64_t v = s0; v <= s1; v++) {
            if (!comp[v - s0] && in_class(v)) push_factor(v);
        }
        if (s1 == hi) break;
        s0 = s1 + 1;
    }
    // proper prime powers p^k, k >= 2
    for (std::uint32_t p : base) {
        std::uint64_t pk = static_cast<std::uint64_t>(p) * p;
        if (pk > hi) break;
        for (; pk <= hi; pk *= p) {
            if (pk >= lo && in_class(pk)) push_factor(p);
            if (pk > hi / p) break;
        }
    }
    for (const auto& f : stack) out.product *= f;
    return out;
}

XReal psi_diff(const XReal& x, const XReal& h, const BigNat& a, const BigNat& n,
               std::uint64_t range_cap, mpfr_prec_t prec) {
    if (x.sign() <= 0) throw ConfigError("psi_diff: need x > 0");
    if (h.sign() < 0) throw ConfigError("psi_diff: need h >= 0");
    BigNat g;
    BigNat ar = ((a % n) + n) % n;
    mpz_gcd(g.get_mpz_t(), ar.get_mpz_t(), n.get_mpz_t());
    if (g != 1) throw ConfigError("psi_diff: gcd(a, n) != 1");
    // window (x, x+h]: integers floor(x)+1 .. floor(x+h)
    mpfr_prec_t wide = std::max<mpfr_prec_t>(x.precision(), h.precision()) + 64;
    XReal upper = add(x.round_to(wide), h.round_to(wide));
    BigNat m_lo = x.floor_bignat() + 1;
    BigNat m_hi = upper.floor_bignat();
    PsiBlock block = psi_block(m_lo, m_hi, ar, n, range_cap);
    return log_of(block.product, prec);
}

namespace {

std::string fmt_opt_bignat(const std::optional<BigNat>& v) {
    return v ? to_string(*v) : std::string();
}

std::string fmt_opt_xreal(const std::optional<XReal>& v) {
    return v ? v->to_decimal(15) : std::string();
}

}  // namespace

std::vector<LinnikRow> linnik_scan(const LinnikScanConfig& cfg) {
    if (cfg.n_max < 2) throw ConfigError("linnik_scan: n_max must be >= 2");
    if (cfg.kappa.sign() <= 0) throw ConfigError("linnik_scan: kappa must be > 0");
    std::vector<LinnikRow> rows;
    const mpfr_prec_t prec = cfg.prec;
    for (std::uint64_t n = 2; n <= cfg.n_max; n++) {
        std::vector<std::uint64_t> residues;
        if (cfg.sample_only) {
            residues.push_back(1);
            if (n > 2 && std::gcd(n - 1, n) == 1) residues.push_back(n - 1);
        } else {
            for (std::uint64_t a = 1; a < n; a++)
                if (std::gcd(a, n) == 1) residues.push_back(a);
        }
        // x = ceil(n^kappa) + 1
        XReal nk = pow_x(XReal::of_u64(n, prec), cfg.kappa, Round::up);
        BigNat x = nk.ceil_bignat() + 1;
        if (x < 2) x = 2;
        BigNat hi;
        if (cfg.mode == WidthMode::bertrand) {
            // [x, (1+eps) x)
            XReal w = mul(add(XReal::of(1, prec), cfg.eps), XReal::of(x, prec), Round::up);
            hi = w.ceil_bignat();
        } else {
            // [x, x + x / n^(1+eps))
            XReal den = pow_x(XReal::of_u64(n, prec), add(XReal::of(1, prec), cfg.eps),
                              Round::down);
            XReal w = div(XReal::of(x, prec), den, Round::up);
            hi = x + w.ceil_bignat();
        }
        if (hi <= x) hi = x + 1;

        for (std::uint64_t a : residues) {
            LinnikRow row;
            row.n = n;
            row.a = a;
            row.x = x;
            row.band_lo = x;
            row.band_hi = hi;
            try {
                APIntervalQuery q{BigNat(static_cast<unsigned long>(a)),
                                  BigNat(static_cast<unsigned long>(n)),
                                  x,
                                  hi,
                                  SearchPolicy::extend_up,
                                  cfg.extend_cap};
                APIntervalResult res = find_prime_in_ap_interval(q);
                row.found = res.found;
                row.in_band = res.in_band;
                if (res.found) {
                    XReal num = XReal::of(*res.found - x, prec);
                    XReal den = XReal::of(hi - x, prec);
                    row.overshoot = div(num, den);
                }
                row.least_prime = least_prime_in_ap(
                    BigNat(static_cast<unsigned long>(a)),
                    BigNat(static_cast<unsigned long>(n)), 2, cfg.least_prime_cap);
                row.empirical_exponent =
                    div(log_of(*row.least_prime, prec), log_of_u64(n, prec));
            } catch (const BudgetError& e) {
                row.failed = true;
                row.fail_reason = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_linnik_csv(std::ostream& out, const std::vector<LinnikRow>& rows) {
    out << "n,a,x,band_lo,band_hi,found,in_band,overshoot,least_prime,empirical_exponent\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.a << ',' << to_string(r.x) << ',' << to_string(r.band_lo)
            << ',' << to_string(r.band_hi) << ',' << fmt_opt_bignat(r.found) << ','
            << (r.in_band ? 1 : 0) << ',' << fmt_opt_xreal(r.overshoot) << ','
            << fmt_opt_bignat(r.least_prime) << ',' << fmt_opt_xreal(r.empirical_exponent)
            << '\n';
    }
}

void write_linnik_json(std::ostream& out, const std::vector<LinnikRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["n"] = r.n;
        o["a"] = r.a;
        o["x"] = to_string(r.x);
        o["band_lo"] = to_string(r.band_lo);
        o["band_hi"] = to_string(r.band_hi);
        o["found"] = fmt_opt_bignat(r.found);
        o["in_band"] = r.in_band;
        o["overshoot"] = fmt_opt_xreal(r.overshoot);
        o["least_prime"] = fmt_opt_bignat(r.least_prime);
        o["empirical_exponent"] = fmt_opt_xreal(r.empirical_exponent);
        arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
}

}  // namespace fmethod
