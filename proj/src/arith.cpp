#include "fmethod/arith.hpp"

#include <algorithm>
#include <cstring>

#include "fmethod/errors.hpp"
#include "montgomery.hpp"

namespace fmethod {

const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> primes = [] {
        constexpr std::uint32_t bound = 1'000'000;
        std::vector<bool> sieve(bound + 1, true);
        std::vector<std::uint32_t> out;
        for (std::uint32_t i = 2; i <= bound; i++) {
            if (sieve[i]) {
                out.push_back(i);
                for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= bound; j += i)
                    sieve[j] = false;
            }
        }
        return out;
    }();
    return primes;
}

namespace detail {

std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    unsigned __int128 r = 1, base = b % m;
    while (e > 0) {
        if (e & 1) r = r * base % m;
        base = base * base % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
}

namespace {

bool mr_witness_u64(std::uint64_t n, std::uint64_t a, std::uint64_t d, int s) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; i++) {
        x = static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * x % n);
        if (x == n - 1) return true;
    }
    return false;
}

}  // namespace
}  // namespace detail

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                            29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    if (n < 41ull * 41ull) return true;
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        s++;
    }
    // complete witness set for all n < 3.3*10^24, in particular all uint64
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                            29ull, 31ull, 37ull}) {
        if (!detail::mr_witness_u64(n, a, d, s)) return false;
    }
    return true;
}

namespace detail {
namespace {

// strong Miller-Rabin witness on mpz, Montgomery fast path for <= 4 limbs
bool mr_witness_mpz(const BigNat& n, const BigNat& base) {
    BigNat d = n - 1;
    mp_bitcnt_t s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    BigNat b = base % n;
    if (b == 0) return true;

    MontCtx ctx;
    if (ctx.init(n.get_mpz_t())) {
        mp_limb_t x[kMaxLimbs], mone[kMaxLimbs], bm[kMaxLimbs];
        ctx.to_mont(bm, b.get_mpz_t());
        ctx.minus_one(mone);
        ctx.pow(x, bm, d.get_mpz_t());
        if (ctx.eq(x, ctx.one) || ctx.eq(x, mone)) return true;
        for (mp_bitcnt_t i = 1; i < s; i++) {
            ctx.sqr(x, x);
            if (ctx.eq(x, mone)) return true;
        }
        return false;
    }

    BigNat x = powmod(b, d, n);
    if (x == 1 || x == n - 1) return true;
    for (mp_bitcnt_t i = 1; i < s; i++) {
        x = x * x % n;
        if (x == n - 1) return true;
    }
    return false;
}

}  // namespace

bool strong_lucas_selfridge(const BigNat& n) {
    // Selfridge method A: first D in 5, -7, 9, -11, ... with (D/n) = -1
    long d_abs = 5;
    int sign = 1;
    long D = 0;
    while (true) {
        long cand = sign * d_abs;
        int j = mpz_si_kronecker(cand, n.get_mpz_t());
        if (j == -1) {
            D = cand;
            break;
        }
        if (j == 0) {
            // shares a factor with n (|cand| < n here, n not a square)
            return n == BigNat(std::abs(cand));
        }
        d_abs += 2;
        sign = -sign;
        if (d_abs > 1000000) return false;  // unreachable for non-squares
    }
    // P = 1, Q = (1-D)/4
    BigNat Q = (BigNat(1) - BigNat(D)) / 4;
    BigNat Dz = BigNat(D);

    BigNat t = n + 1;
    mp_bitcnt_t s = mpz_scan1(t.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(t.get_mpz_t(), t.get_mpz_t(), s);  // n+1 = t * 2^s, t odd

    // half = (n+1)/2 used for division by 2 mod n
    const BigNat half = (n + 1) / 2;
    auto halve = [&](BigNat& v) {
        if (mpz_odd_p(v.get_mpz_t())) v += n;
        mpz_fdiv_q_2exp(v.get_mpz_t(), v.get_mpz_t(), 1);
        v %= n;
        (void)half;
    };

    // ladder over bits of t, most significant first
    BigNat U = 0, V = 2, Qk = 1;
    long bits = static_cast<long>(mpz_sizeinbase(t.get_mpz_t(), 2));
    for (long i = bits - 1; i >= 0; i--) {
        // double: U_{2k} = U*V, V_{2k} = V^2 - 2 Q^k, Q^{2k}
        U = U * V % n;
        V = (V * V - 2 * Qk) % n;
        Qk = Qk * Qk % n;
        if (mpz_tstbit(t.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
            // increment with P = 1: U_{k+1} = (U + V)/2, V_{k+1} = (D U + V)/2
            BigNat U2 = U + V;
            BigNat V2 = Dz * U + V;
            halve(U2);
            halve(V2);
            U = U2;
            V = V2;
            Qk = Qk * Q % n;
        }
    }
    U %= n;
    if (U < 0) U += n;
    V %= n;
    if (V < 0) V += n;
    Qk %= n;
    if (Qk < 0) Qk += n;

    if (U == 0 || V == 0) return true;
    for (mp_bitcnt_t r = 1; r < s; r++) {
        V = (V * V - 2 * Qk) % n;
        if (V < 0) V += n;
        if (V == 0) return true;
        Qk = Qk * Qk % n;
    }
    return false;
}

}  // namespace detail

Primality classify_prime(const BigNat& n, const FactorBudget& budget) {
    if (n < 2) return Primality::composite;
    if (fits_u64(n))
        return is_prime_u64(to_u64(n)) ? Primality::prime : Primality::composite;

    // n >= 2^64 from here
    const auto& primes = small_primes();
    for (size_t i = 0; i < 100; i++) {
        if (mpz_divisible_ui_p(n.get_mpz_t(), primes[i])) return Primality::composite;
    }
    if (mpz_perfect_square_p(n.get_mpz_t())) return Primality::composite;
    if (!detail::mr_witness_mpz(n, 2)) return Primality::composite;
    if (!detail::strong_lucas_selfridge(n)) return Primality::composite;
    for (int i = 1; i <= budget.extra_mr_rounds; i++) {
        if (!detail::mr_witness_mpz(n, BigNat(primes[i]))) return Primality::composite;
    }
    return Primality::probable_prime;
}

bool is_prime(const BigNat& n, const FactorBudget& budget) {
    return classify_prime(n, budget) != Primality::composite;
}

namespace {

// Pollard-Brent rho over the fixed-width Montgomery core; n odd composite,
// not divisible by small primes, at most 4 limbs.  Deterministic.
BigNat rho_brent_mont(const BigNat& n, const FactorBudget& budget) {
    detail::MontCtx ctx;
    if (!ctx.init(n.get_mpz_t())) throw BudgetError("internal: montgomery init failed");
    const int nl = ctx.nl;
    for (int poly = 1; poly <= budget.rho_poly_tries; poly++) {
        mp_limb_t c[detail::kMaxLimbs], x[detail::kMaxLimbs], y[detail::kMaxLimbs],
            ys[detail::kMaxLimbs], q[detail::kMaxLimbs], diff[detail::kMaxLimbs];
        BigNat cz = poly, start = 2;
        ctx.to_mont(c, cz.get_mpz_t());
        ctx.to_mont(y, start.get_mpz_t());
        std::memcpy(q, ctx.one, sizeof(q));
        std::uint64_t iters = 0;
        std::uint64_t r = 1;
        const std::uint64_t batch = 128;
        BigNat g = 1;
        while (g == 1 && iters < budget.rho_iter_cap) {
            std::memcpy(x, y, sizeof(x));
            for (std::uint64_t i = 0; i < r; i++) {
                ctx.sqr(y, y);
                ctx.add(y, y, c);
            }
            std::uint64_t k = 0;
            while (k < r && g == 1) {
                std::memcpy(ys, y, sizeof(ys));
                std::uint64_t lim = std::min(batch, r - k);
                for (std::uint64_t i = 0; i < lim; i++) {
                    ctx.sqr(y, y);
                    ctx.add(y, y, c);
                    ctx.sub_abs(diff, x, y);
                    ctx.mul(q, q, diff);
                }
                iters += lim;
                // gcd(q*R mod n, n) = gcd(q, n) since R is coprime to n
                BigNat qz;
                mpz_import(qz.get_mpz_t(), nl, -1, sizeof(mp_limb_t), 0, 0, q);
                mpz_gcd(g.get_mpz_t(), qz.get_mpz_t(), n.get_mpz_t());
                k += lim;
            }
            r *= 2;
        }
        if (g == n) {
            // backtrack one step at a time
            g = 1;
            std::memcpy(y, ys, sizeof(y));
            while (g == 1) {
                ctx.sqr(y, y);
                ctx.add(y, y, c);
                ctx.sub_abs(diff, x, y);
                BigNat dz;
                mpz_import(dz.get_mpz_t(), nl, -1, sizeof(mp_limb_t), 0, 0, diff);
                mpz_gcd(g.get_mpz_t(), dz.get_mpz_t(), n.get_mpz_t());
            }
        }
        if (g != 1 && g != n) return g;
    }
    throw BudgetError("factoring budget exhausted (rho) for " + to_string(n));
}

// mpz fallback for moduli beyond the fixed-width core
BigNat rho_brent_mpz(const BigNat& n, const FactorBudget& budget) {
    for (int poly = 1; poly <= budget.rho_poly_tries; poly++) {
        BigNat x = 2, y = 2, ys = 2, q = 1, g = 1, diff;
        std::uint64_t iters = 0, r = 1;
        const std::uint64_t batch = 128;
        while (g == 1 && iters < budget.rho_iter_cap) {
            x = y;
            for (std::uint64_t i = 0; i < r; i++) y = (y * y + poly) % n;
            std::uint64_t k = 0;
            while (k < r && g == 1) {
                ys = y;
                std::uint64_t lim = std::min(batch, r - k);
                for (std::uint64_t i = 0; i < lim; i++) {
                    y = (y * y + poly) % n;
                    diff = x - y;
                    mpz_abs(diff.get_mpz_t(), diff.get_mpz_t());
                    q = q * diff % n;
                }
                iters += lim;
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += lim;
            }
            r *= 2;
        }
        if (g == n) {
            g = 1;
            y = ys;
            while (g == 1) {
                y = (y * y + poly) % n;
                diff = x - y;
                mpz_abs(diff.get_mpz_t(), diff.get_mpz_t());
                mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
            }
        }
        if (g != 1 && g != n) return g;
    }
    throw BudgetError("factoring budget exhausted (rho) for " + to_string(n));
}

BigNat rho_split(const BigNat& n, const FactorBudget& budget) {
    if (mpz_size(n.get_mpz_t()) <= static_cast<size_t>(detail::kMaxLimbs))
        return rho_brent_mont(n, budget);
    return rho_brent_mpz(n, budget);
}

void factor_rec(const BigNat& m, const FactorBudget& budget,
                std::vector<std::pair<BigNat, unsigned>>& out) {
    if (m == 1) return;
    if (is_prime(m, budget)) {
        out.emplace_back(m, 1);
        return;
    }
    unsigned long k = 2;
    if (mpz_perfect_power_p(m.get_mpz_t())) {
        BigNat root;
        for (k = 2; k <= mpz_sizeinbase(m.get_mpz_t(), 2); k++) {
            if (mpz_root(root.get_mpz_t(), m.get_mpz_t(), k) != 0) {
                std::vector<std::pair<BigNat, unsigned>> sub;
                factor_rec(root, budget, sub);
                for (auto& [p, e] : sub) out.emplace_back(p, e * k);
                return;
            }
        }
    }
    BigNat d = rho_split(m, budget);
    factor_rec(d, budget, out);
    factor_rec(m / d, budget, out);
}

}  // namespace

Factorization factorize(const BigNat& n, const FactorBudget& budget) {
    if (n < 1) throw ConfigError("factorize requires n >= 1");
    Factorization fac;
    fac.value = n;
    if (n == 1) return fac;

    BigNat rem = n;
    std::vector<std::pair<BigNat, unsigned>> found;
    for (std::uint32_t p : small_primes()) {
        if (p >= budget.trial_bound) break;
        if (BigNat(p) * p > rem) break;
        if (mpz_divisible_ui_p(rem.get_mpz_t(), p)) {
            unsigned e = 0;
            do {
                mpz_divexact_ui(rem.get_mpz_t(), rem.get_mpz_t(), p);
                e++;
            } while (mpz_divisible_ui_p(rem.get_mpz_t(), p));
            found.emplace_back(BigNat(p), e);
        }
        if (rem == 1) break;
    }
    if (rem > 1) factor_rec(rem, budget, found);

    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < found.size(); i++) {
        if (!fac.factors.empty() && fac.factors.back().prime == found[i].first) {
            fac.factors.back().exponent += found[i].second;
        } else {
            fac.factors.push_back({found[i].first, found[i].second,
                                   classify_prime(found[i].first, budget)});
        }
    }
    return fac;
}

Factorization factorize_u64(std::uint64_t n) {
    return factorize(from_u64(n));
}

int mobius(std::uint64_t n) {
    if (n == 0) throw ConfigError("mobius requires n >= 1");
    if (n == 1) return 1;
    Factorization f = factorize_u64(n);
    for (const auto& e : f.factors)
        if (e.exponent >= 2) return 0;
    return (f.omega() % 2 == 0) ? 1 : -1;
}

std::vector<std::uint64_t> divisors(std::uint64_t n) {
    if (n == 0) throw ConfigError("divisors requires n >= 1");
    Factorization f = factorize_u64(n);
    std::vector<std::uint64_t> out{1};
    for (const auto& e : f.factors) {
        std::uint64_t p = to_u64(e.prime);
        size_t base = out.size();
        std::uint64_t pk = 1;
        for (unsigned k = 1; k <= e.exponent; k++) {
            pk *= p;
            for (size_t i = 0; i < base; i++) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t divisor_count(std::uint64_t n) {
    if (n == 0) throw ConfigError("divisor_count requires n >= 1");
    return factorize_u64(n).divisor_count();
}

BigNat multiplicative_order(const BigNat& g, const BigNat& p,
                            const Factorization& p_minus_1) {
    if (p < 2 || g < 1 || g >= p) throw ConfigError("multiplicative_order: need 1 <= g < p");
    BigNat e = p - 1;
    for (const auto& f : p_minus_1.factors) {
        for (unsigned i = 0; i < f.exponent; i++) {
            BigNat cand = e / f.prime;
            if (powmod(g, cand, p) == 1)
                e = cand;
            else
                break;
        }
    }
    return e;
}

BigNat multiplicative_order(const BigNat& g, const BigNat& p, const FactorBudget& budget) {
    return multiplicative_order(g, p, factorize(p - 1, budget));
}

BigNat primitive_root(const BigNat& p, const Factorization& p_minus_1) {
    if (p == 2) return 1;
    const BigNat pm1 = p - 1;
    std::vector<BigNat> cofactors;
    cofactors.reserve(p_minus_1.factors.size());
    for (const auto& f : p_minus_1.factors) cofactors.push_back(pm1 / f.prime);
    for (BigNat g = 2;; g++) {
        bool ok = true;
        for (const auto& e : cofactors) {
            if (powmod(g, e, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
}

BigNat primitive_root(const BigNat& p, const FactorBudget& budget) {
    if (p == 2) return 1;
    return primitive_root(p, factorize(p - 1, budget));
}

std::optional<std::pair<std::uint64_t, unsigned>> prime_power_decompose(std::uint64_t m) {
    if (m < 2) return std::nullopt;
    Factorization f = factorize_u64(m);
    if (f.omega() != 1) return std::nullopt;
    return std::make_pair(to_u64(f.factors[0].prime), f.factors[0].exponent);
}

XReal von_mangoldt(std::uint64_t m, mpfr_prec_t prec) {
    if (m == 0) throw ConfigError("von_mangoldt requires m >= 1");
    auto pp = prime_power_decompose(m);
    if (!pp) return XReal(prec);
    return log_of_u64(pp->first, prec);
}

std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi) {
    if (hi > 1'000'000'000'000ull)
        throw BudgetError("primes_in_range: hi exceeds the 10^12 sieve bound");
    std::vector<std::uint64_t> out;
    if (hi <= lo || hi <= 2) return out;
    if (lo < 2) lo = 2;
    const auto& base = small_primes();
    const std::uint64_t span = hi - lo;
    std::vector<bool> comp(span, false);
    for (std::uint32_t p : base) {
        std::uint64_t p2 = static_cast<std::uint64_t>(p) * p;
        if (p2 >= hi) break;
        std::uint64_t start = std::max(p2, (lo + p - 1) / p * p);
        for (std::uint64_t j = start; j < hi; j += p) comp[j - lo] = true;
    }
    for (std::uint64_t v = lo; v < hi; v++) {
        if (!comp[v - lo]) out.push_back(v);
    }
    return out;
}

}  // namespace fmethod
