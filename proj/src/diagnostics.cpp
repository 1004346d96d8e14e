#include "fmethod/diagnostics.hpp"

#include <algorithm>
#include <sstream>

#include "fmethod/arith.hpp"
#include "fmethod/errors.hpp"

namespace fmethod {

std::string obstruction_kind_name(ObstructionKind k) {
    switch (k) {
        case ObstructionKind::divisor_blowup: return "divisor_blowup";
        case ObstructionKind::polynomial_gap: return "polynomial_gap";
        case ObstructionKind::chain_contradiction: return "chain_contradiction";
    }
    return "divisor_blowup";
}

namespace {

std::optional<ObstructionKind> kind_from_name(const std::string& s) {
    if (s == "divisor_blowup") return ObstructionKind::divisor_blowup;
    if (s == "polynomial_gap") return ObstructionKind::polynomial_gap;
    if (s == "chain_contradiction") return ObstructionKind::chain_contradiction;
    return std::nullopt;
}

// outward upper bound of exp(log n / (2 log log n))
XReal blowup_threshold_up(std::uint64_t n, mpfr_prec_t prec) {
    XReal num = log_of_u64(n, prec, Round::up);
    XReal inner = log_of_u64(n, prec, Round::down);
    XReal den = mul(XReal::of(2, prec), log_x(inner, Round::down), Round::down);
    XReal quot = div(num, den, Round::up);
    return exp_x(quot, Round::up);
}

struct BlowupDerived {
    XReal threshold_up;
    XReal pairing_lhs;
    XReal pairing_rhs;
    bool product_identity;
    bool verified;
};

BlowupDerived derive_blowup(std::uint64_t n, std::uint64_t d, mpfr_prec_t prec) {
    BlowupDerived out{blowup_threshold_up(n, prec), XReal(prec), XReal(prec), false, false};
    auto divs = divisors(n);

    // sum of log d in ascending divisor order
    XReal lhs(prec);
    for (std::uint64_t dv : divs)
        if (dv > 1) lhs = add(lhs, log_of_u64(dv, prec));
    out.pairing_lhs = lhs;
    out.pairing_rhs =
        div(mul(XReal::of_u64(d, prec), log_of_u64(n, prec)), XReal::of(2, prec));

    // exact: prod of divisors equals n^(d/2) (odd d means n is a square)
    BigNat prod = 1;
    for (std::uint64_t dv : divs) prod *= from_u64(dv);
    BigNat expect;
    if (d % 2 == 0) {
        expect = bignat_pow(from_u64(n), d / 2);
    } else {
        BigNat root;
        mpz_sqrt(root.get_mpz_t(), from_u64(n).get_mpz_t());
        expect = bignat_pow(from_u64(n), (d - 1) / 2) * root;
    }
    out.product_identity = prod == expect;

    XReal tol(prec);
    mpfr_set_ui_2exp(tol.raw(), 1, -(prec - 20), MPFR_RNDN);
    tol = mul(tol, XReal::of_u64(d, prec));
    bool pairing_ok = sub(out.pairing_lhs, out.pairing_rhs).abs() <= tol;
    bool dominates = out.threshold_up.cmp(from_u64(d)) < 0;
    out.verified =
        dominates && pairing_ok && out.product_identity && divisor_count(n) == d;
    return out;
}

}  // namespace

ObstructionCertificate divisor_blowup_witness(std::uint64_t search_bound,
                                              mpfr_prec_t prec) {
    if (search_bound < 16) throw ConfigError("divisor_blowup_witness: bound must be >= 16");

    std::uint64_t best_n = 0, best_d = 0;
    auto consider = [&](std::uint64_t n, std::uint64_t d) {
        if (n < 16 || n > search_bound) return;
        if (d > best_d || (d == best_d && n < best_n)) {
            best_d = d;
            best_n = n;
        }
    };

    // exhaustive divisor-count sieve below min(bound, 10^6)
    std::uint64_t sweep = std::min<std::uint64_t>(search_bound, 1'000'000);
    {
        std::vector<std::uint32_t> dc(sweep + 1, 0);
        for (std::uint64_t i = 1; i <= sweep; i++)
            for (std::uint64_t j = i; j <= sweep; j += i) dc[j]++;
        for (std::uint64_t v = 16; v <= sweep; v++) consider(v, dc[v]);
    }

    // primorial-style candidates: non-increasing exponents over small primes
    {
        static const std::uint64_t ps[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
        struct Frame {
            std::uint64_t n;
            std::uint64_t d;
            unsigned idx;
            unsigned max_exp;
        };
        std::vector<Frame> stack{{1, 1, 0, 64}};
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            consider(f.n, f.d);
            if (f.idx >= sizeof(ps) / sizeof(ps[0])) continue;
            std::uint64_t p = ps[f.idx];
            std::uint64_t n = f.n;
            for (unsigned e = 1; e <= f.max_exp; e++) {
                if (n > search_bound / p) break;
                n *= p;
                stack.push_back({n, f.d * (e + 1), f.idx + 1, e});
            }
        }
    }

    if (best_n == 0)
        throw Error("divisor_blowup_witness: no witness at or below the bound");
    // keep only genuine witnesses: d(n) must beat the threshold
    BlowupDerived derived = derive_blowup(best_n, best_d, prec);
    if (!(derived.threshold_up.cmp(from_u64(best_d)) < 0))
        throw Error("divisor_blowup_witness: best candidate does not clear the threshold");

    ObstructionCertificate cert;
    cert.kind = ObstructionKind::divisor_blowup;
    cert.precision_bits = prec;
    cert.blowup = BlowupWitness{best_n, best_d, derived.threshold_up, derived.pairing_lhs,
                                derived.pairing_rhs, derived.product_identity};
    cert.verified = derived.verified;
    return cert;
}

namespace {

BigNat gap_margin(std::uint64_t q, unsigned k) {
    BigNat lhs = bignat_pow(from_u64(q), 2 * k) + 1;
    lhs *= lhs;
    BigNat rhs = bignat_pow(from_u64(q), 3 * k);
    return lhs - rhs;
}

}  // namespace

ObstructionCertificate polynomial_gap_check(unsigned k, std::uint64_t q_max,
                                            mpfr_prec_t prec) {
    if (k < 1) throw ConfigError("polynomial_gap_check: k must be >= 1");
    if (q_max < 3) throw ConfigError("polynomial_gap_check: q_max must be >= 3");
    ObstructionCertificate cert;
    cert.kind = ObstructionKind::polynomial_gap;
    cert.precision_bits = prec;
    GapWitness w;
    w.k = k;
    w.q_max = q_max;
    bool all_positive = true;
    for (std::uint32_t q : small_primes()) {
        if (q > q_max) break;
        BigNat margin = gap_margin(q, k);
        if (margin <= 0) all_positive = false;
        w.rows.emplace_back(q, std::move(margin));
    }
    cert.gap = std::move(w);
    cert.verified = all_positive;
    return cert;
}

std::map<std::uint64_t, XReal> chain_log_table(std::uint64_t q1, std::uint64_t q2,
                                               mpfr_prec_t prec) {
    std::map<std::uint64_t, XReal> t;
    std::uint64_t n = q1 * q2;
    for (std::uint64_t m : {q1, q2, n, q1 * q1, q2 * q2, n * n})
        t[m] = log_of_u64(m, prec);
    return t;
}

std::map<std::uint64_t, XReal> chain_constant_table(std::uint64_t q1, std::uint64_t q2,
                                                    long value, mpfr_prec_t prec) {
    std::map<std::uint64_t, XReal> t;
    std::uint64_t n = q1 * q2;
    for (std::uint64_t m : {q1, q2, n, q1 * q1, q2 * q2, n * n})
        t[m] = XReal::of(value, prec);
    return t;
}

namespace {

struct ChainDerived {
    XReal r_q1, r_q2, r_n, two_t_sq, mid, t_cubed;
    bool contradiction;
    std::string note;
};

ChainDerived derive_chain(const std::map<std::uint64_t, XReal>& t, std::uint64_t q1,
                          std::uint64_t q2, mpfr_prec_t prec) {
    std::uint64_t n = q1 * q2;
    auto at = [&](std::uint64_t m) { return t.at(m).round_to(prec); };
    auto cube = [&](const XReal& v) { return mul(v, mul(v, v)); };
    ChainDerived d{cube(at(q1 * q1)), cube(at(q2 * q2)), mul(at(n), at(n)),
                   XReal(prec),       XReal(prec),       XReal(prec),
                   false,             ""};
    XReal tn = at(n);
    d.two_t_sq = mul(XReal::of(2, prec), mul(tn, tn));
    d.t_cubed = cube(tn);
    d.mid = div(add(d.r_q1, d.r_q2), XReal::of(2, prec));
    // certified 2 t(n)^2 < t(n)^3, i.e. t(n) > 2
    XReal up = mul(XReal::of(2, prec), mul(tn, tn, Round::up), Round::up);
    XReal down = mul(tn, mul(tn, tn, Round::down), Round::down);
    d.contradiction = up < down;
    d.note = d.contradiction
                 ? "sandwiched growth at q1, q2 and n=q1*q2 forces 2 t(n)^2 > t(n)^3, "
                   "impossible since t(n) > 2"
                 : "t(n) <= 2: endpoints do not conflict at this point; the argument "
                   "needs t unbounded";
    return d;
}

void check_chain_inputs(const std::map<std::uint64_t, XReal>& t, std::uint64_t q1,
                        std::uint64_t q2) {
    if (q1 == q2) throw ConfigError("chain demo: q1 != q2 required");
    if (!is_prime_u64(q1) || !is_prime_u64(q2))
        throw ConfigError("chain demo: q1 and q2 must be prime");
    std::uint64_t n = q1 * q2;
    for (std::uint64_t m : {q1, q2, n, q1 * q1, q2 * q2, n * n}) {
        if (!t.count(m))
            throw ConfigError("chain demo: table does not cover m=" + std::to_string(m));
    }
    // monotone non-decreasing on the supplied points
    const XReal* prev = nullptr;
    for (const auto& [m, v] : t) {
        if (prev && *prev > v)
            throw ConfigError("chain demo: t must be non-decreasing on supplied points");
        prev = &v;
    }
}

}  // namespace

ObstructionCertificate chain_contradiction_demo(const std::map<std::uint64_t, XReal>& t,
                                                std::uint64_t q1, std::uint64_t q2,
                                                mpfr_prec_t prec) {
    check_chain_inputs(t, q1, q2);
    ChainDerived d = derive_chain(t, q1, q2, prec);
    ObstructionCertificate cert;
    cert.kind = ObstructionKind::chain_contradiction;
    cert.precision_bits = prec;
    ChainWitness w;
    w.q1 = q1;
    w.q2 = q2;
    w.n = q1 * q2;
    for (const auto& [m, v] : t) w.t_points.emplace_back(m, v.round_to(prec));
    w.r_q1 = d.r_q1;
    w.r_q2 = d.r_q2;
    w.r_n = d.r_n;
    w.two_t_sq = d.two_t_sq;
    w.mid = d.mid;
    w.t_cubed = d.t_cubed;
    w.contradiction = d.contradiction;
    w.note = d.note;
    cert.chain = std::move(w);
    cert.verified = d.contradiction;
    return cert;
}

void save_certificate(std::ostream& out, const ObstructionCertificate& cert) {
    out << "obstruction-certificate v1\n";
    out << "kind " << obstruction_kind_name(cert.kind) << "\n";
    out << "precision_bits " << cert.precision_bits << "\n";
    switch (cert.kind) {
        case ObstructionKind::divisor_blowup: {
            const auto& w = *cert.blowup;
            out << "n " << w.n << "\n";
            out << "d " << w.d << "\n";
            out << "threshold " << w.threshold_up.to_hex() << "\n";
            out << "pairing_lhs " << w.pairing_lhs.to_hex() << "\n";
            out << "pairing_rhs " << w.pairing_rhs.to_hex() << "\n";
            out << "product_identity " << (w.product_identity ? 1 : 0) << "\n";
            break;
        }
        case ObstructionKind::polynomial_gap: {
            const auto& w = *cert.gap;
            out << "k " << w.k << "\n";
            out << "q_max " << w.q_max << "\n";
            out << "rows " << w.rows.size() << "\n";
            for (const auto& [q, margin] : w.rows)
                out << "row " << q << ' ' << to_string(margin) << "\n";
            break;
        }
        case ObstructionKind::chain_contradiction: {
            const auto& w = *cert.chain;
            out << "q1 " << w.q1 << "\n";
            out << "q2 " << w.q2 << "\n";
            out << "n " << w.n << "\n";
            out << "t_points " << w.t_points.size() << "\n";
            for (const auto& [m, v] : w.t_points)
                out << "t " << m << ' ' << v.to_hex() << "\n";
            out << "r_q1 " << w.r_q1.to_hex() << "\n";
            out << "r_q2 " << w.r_q2.to_hex() << "\n";
            out << "r_n " << w.r_n.to_hex() << "\n";
            out << "two_t_sq " << w.two_t_sq.to_hex() << "\n";
            out << "mid " << w.mid.to_hex() << "\n";
            out << "t_cubed " << w.t_cubed.to_hex() << "\n";
            out << "contradiction " << (w.contradiction ? 1 : 0) << "\n";
            out << "note " << w.note << "\n";
            break;
        }
    }
    out << "verified " << (cert.verified ? 1 : 0) << "\n";
}

ObstructionCertificate load_certificate(std::istream& in) {
    ObstructionCertificate cert;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& field) -> void {
        throw ParseError("malformed obstruction certificate", lineno, field);
    };
    auto next = [&]() -> std::istringstream {
        if (!std::getline(in, line)) fail("eof");
        lineno++;
        return std::istringstream(line);
    };
    {
        auto is = next();
        std::string a, b;
        is >> a >> b;
        if (a != "obstruction-certificate" || b != "v1") fail("header");
    }
    {
        auto is = next();
        std::string key, name;
        is >> key >> name;
        auto k = kind_from_name(name);
        if (key != "kind" || !k) fail("kind");
        cert.kind = *k;
    }
    {
        auto is = next();
        std::string key;
        is >> key >> cert.precision_bits;
        if (key != "precision_bits" || cert.precision_bits < 100) fail("precision_bits");
    }
    auto read_hex = [&](std::istringstream& is, const std::string& field) {
        std::string hex;
        if (!(is >> hex)) fail(field);
        XReal v(cert.precision_bits);
        if (!XReal::parse_hex(hex, cert.precision_bits, v)) fail(field);
        return v;
    };
    auto expect_key = [&](std::istringstream& is, const std::string& want) {
        std::string key;
        if (!(is >> key) || key != want) fail(want);
    };

    switch (cert.kind) {
        case ObstructionKind::divisor_blowup: {
            BlowupWitness w;
            {
                auto is = next();
                expect_key(is, "n");
                if (!(is >> w.n)) fail("n");
            }
            {
                auto is = next();
                expect_key(is, "d");
                if (!(is >> w.d)) fail("d");
            }
            {
                auto is = next();
                expect_key(is, "threshold");
                w.threshold_up = read_hex(is, "threshold");
            }
            {
                auto is = next();
                expect_key(is, "pairing_lhs");
                w.pairing_lhs = read_hex(is, "pairing_lhs");
            }
            {
                auto is = next();
                expect_key(is, "pairing_rhs");
                w.pairing_rhs = read_hex(is, "pairing_rhs");
            }
            {
                auto is = next();
                expect_key(is, "product_identity");
                int v = 0;
                if (!(is >> v)) fail("product_identity");
                w.product_identity = v != 0;
            }
            cert.blowup = std::move(w);
            break;
        }
        case ObstructionKind::polynomial_gap: {
            GapWitness w;
            std::uint64_t rows = 0;
            {
                auto is = next();
                expect_key(is, "k");
                if (!(is >> w.k)) fail("k");
            }
            {
                auto is = next();
                expect_key(is, "q_max");
                if (!(is >> w.q_max)) fail("q_max");
            }
            {
                auto is = next();
                expect_key(is, "rows");
                if (!(is >> rows)) fail("rows");
            }
            for (std::uint64_t i = 0; i < rows; i++) {
                auto is = next();
                expect_key(is, "row");
                std::uint64_t q = 0;
                std::string margin;
                if (!(is >> q >> margin)) fail("row");
                auto m = parse_bignat(margin);
                if (!m) fail("row");
                w.rows.emplace_back(q, *m);
            }
            cert.gap = std::move(w);
            break;
        }
        case ObstructionKind::chain_contradiction: {
            ChainWitness w;
            std::uint64_t pts = 0;
            {
                auto is = next();
                expect_key(is, "q1");
                if (!(is >> w.q1)) fail("q1");
            }
            {
                auto is = next();
                expect_key(is, "q2");
                if (!(is >> w.q2)) fail("q2");
            }
            {
                auto is = next();
                expect_key(is, "n");
                if (!(is >> w.n)) fail("n");
            }
            {
                auto is = next();
                expect_key(is, "t_points");
                if (!(is >> pts)) fail("t_points");
            }
            for (std::uint64_t i = 0; i < pts; i++) {
                auto is = next();
                expect_key(is, "t");
                std::uint64_t m = 0;
                if (!(is >> m)) fail("t");
                w.t_points.emplace_back(m, read_hex(is, "t"));
            }
            const std::pair<const char*, XReal*> fields[] = {
                {"r_q1", &w.r_q1},   {"r_q2", &w.r_q2}, {"r_n", &w.r_n},
                {"two_t_sq", &w.two_t_sq}, {"mid", &w.mid},  {"t_cubed", &w.t_cubed}};
            for (const auto& [key, dst] : fields) {
                auto is = next();
                expect_key(is, key);
                *dst = read_hex(is, key);
            }
            {
                auto is = next();
                expect_key(is, "contradiction");
                int v = 0;
                if (!(is >> v)) fail("contradiction");
                w.contradiction = v != 0;
            }
            {
                auto is = next();
                expect_key(is, "note");
                std::string rest;
                std::getline(is, rest);
                if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
                w.note = rest;
            }
            cert.chain = std::move(w);
            break;
        }
    }
    {
        auto is = next();
        expect_key(is, "verified");
        int v = 0;
        if (!(is >> v)) fail("verified");
        cert.verified = v != 0;
    }
    return cert;
}

bool reverify_certificate(const ObstructionCertificate& cert) {
    const mpfr_prec_t prec = cert.precision_bits;
    switch (cert.kind) {
        case ObstructionKind::divisor_blowup: {
            if (!cert.blowup) return false;
            const auto& w = *cert.blowup;
            BlowupDerived d = derive_blowup(w.n, w.d, prec);
            return d.threshold_up == w.threshold_up && d.pairing_lhs == w.pairing_lhs &&
                   d.pairing_rhs == w.pairing_rhs &&
                   d.product_identity == w.product_identity && d.verified == cert.verified;
        }
        case ObstructionKind::polynomial_gap: {
            if (!cert.gap) return false;
            const auto& w = *cert.gap;
            bool all_positive = true;
            size_t i = 0;
            for (std::uint32_t q : small_primes()) {
                if (q > w.q_max) break;
                if (i >= w.rows.size()) return false;
                if (w.rows[i].first != q) return false;
                BigNat margin = gap_margin(q, w.k);
                if (margin != w.rows[i].second) return false;
                if (margin <= 0) all_positive = false;
                i++;
            }
            return i == w.rows.size() && all_positive == cert.verified;
        }
        case ObstructionKind::chain_contradiction: {
            if (!cert.chain) return false;
            const auto& w = *cert.chain;
            if (w.n != w.q1 * w.q2) return false;
            std::map<std::uint64_t, XReal> t;
            for (const auto& [m, v] : w.t_points) t.emplace(m, v);
            try {
                check_chain_inputs(t, w.q1, w.q2);
            } catch (const ConfigError&) {
                return false;
            }
            ChainDerived d = derive_chain(t, w.q1, w.q2, prec);
            return d.r_q1 == w.r_q1 && d.r_q2 == w.r_q2 && d.r_n == w.r_n &&
                   d.two_t_sq == w.two_t_sq && d.mid == w.mid &&
                   d.t_cubed == w.t_cubed && d.contradiction == w.contradiction &&
                   d.contradiction == cert.verified;
        }
    }
    return false;
}

}  // namespace fmethod
