#include "fmethod/rates.hpp"

#include <fstream>
#include <sstream>

#include "fmethod/arith.hpp"
#include "fmethod/errors.hpp"

namespace fmethod {

RateSpec make_kappa_rate(const std::string& kappa_decimal, mpfr_prec_t prec) {
    RateSpec spec;
    spec.kind = RateKind::multiplicative;
    spec.precision_bits = prec;
    if (!XReal::parse_decimal(kappa_decimal, prec, spec.kappa))
        throw ConfigError("bad kappa literal: " + kappa_decimal);
    return spec;
}

RateSpec make_tower_rate(mpfr_prec_t prec) {
    RateSpec spec;
    spec.kind = RateKind::tower;
    spec.precision_bits = prec;
    return spec;
}

RateSpec make_explicit_rate(std::vector<std::pair<std::uint64_t, XReal>> entries,
                            std::uint64_t max_n, mpfr_prec_t prec) {
    RateSpec spec;
    spec.kind = RateKind::explicit_table;
    spec.precision_bits = prec;
    spec.max_n = max_n;
    for (auto& [n, v] : entries) spec.table[n] = v.round_to(prec);
    return spec;
}

XReal eval_r(const RateSpec& spec, std::uint64_t n) {
    if (n == 0) throw ConfigError("eval_r requires n >= 1");
    const mpfr_prec_t prec = spec.precision_bits;
    switch (spec.kind) {
        case RateKind::multiplicative: {
            XReal acc(prec);
            if (n == 1) return acc;
            Factorization f = factorize_u64(n);
            for (const auto& e : f.factors) {
                std::uint64_t q = to_u64(e.prime);
                auto ov = spec.overrides.find({q, e.exponent});
                XReal term(prec);
                if (ov != spec.overrides.end()) {
                    term = ov->second.round_to(prec);
                } else {
                    // kappa * a * log q, left to right, round-to-nearest
                    term = mul(mul(spec.kappa.round_to(prec), XReal::of_u64(e.exponent, prec)),
                               log_of_u64(q, prec));
                }
                acc = add(acc, term);
            }
            return acc;
        }
        case RateKind::tower: {
            unsigned k = iota(n);
            return mul(XReal::of_u64(k, prec), log_of_u64(n, prec));
        }
        case RateKind::explicit_table: {
            if (n == 1) {
                auto it = spec.table.find(1);
                if (it == spec.table.end()) return XReal(prec);
                return it->second;
            }
            if (n > spec.max_n)
                throw ConfigError("explicit rate table: n=" + std::to_string(n) +
                                  " beyond max_n=" + std::to_string(spec.max_n));
            auto it = spec.table.find(n);
            if (it == spec.table.end())
                throw ConfigError("explicit rate table: missing entry for n=" +
                                  std::to_string(n));
            return it->second;
        }
    }
    throw ConfigError("eval_r: bad rate kind");
}

XReal eval_s(const RateSpec& spec, std::uint64_t n) {
    if (n == 0) throw ConfigError("eval_s requires n >= 1");
    const mpfr_prec_t prec = spec.precision_bits;
    XReal acc(prec);
    for (std::uint64_t d : divisors(n)) {
        int mu = mobius(d);
        if (mu == 0) continue;
        XReal term = eval_r(spec, n / d);
        acc = (mu > 0) ? add(acc, term) : sub(acc, term);
    }
    return acc;
}

namespace {

// Certified comparison of integer n against the k-th iterated exponential of
// e.  Returns true iff n < ^k e.  The tower is irrational for every k, so
// interval evaluation at some finite precision always decides.
bool below_tower(std::uint64_t n, unsigned k) {
    for (mpfr_prec_t prec = 96; prec <= 8 * 4096; prec *= 2) {
        XReal lo = XReal::of(1, prec), hi = XReal::of(1, prec);
        bool overflow_hi = false;
        for (unsigned i = 0; i < k; i++) {
            lo = exp_x(lo, Round::down);
            hi = exp_x(hi, Round::up);
            if (!hi.is_finite()) {
                overflow_hi = true;
                break;
            }
        }
        XReal nn = XReal::of_u64(n, prec);
        if (overflow_hi || !lo.is_finite()) {
            // lower bound already astronomically above any uint64
            return true;
        }
        if (nn.cmp(lo) <= 0) return true;
        if (nn.cmp(hi) >= 0) return false;
    }
    throw Error("iota: precision exhausted certifying tower comparison");
}

}  // namespace

unsigned iota(std::uint64_t n) {
    if (n == 0) throw ConfigError("iota requires n >= 1");
    for (unsigned k = 1;; k++) {
        if (below_tower(n, k)) return k;
    }
}

RoundtripReport mobius_roundtrip_check(const RateSpec& spec, std::uint64_t n_max) {
    const mpfr_prec_t prec = spec.precision_bits;
    RoundtripReport rep;
    rep.n_max = n_max;
    rep.max_residual = XReal(prec);
    rep.tolerance_at_worst = XReal(prec);

    // max |r| over the whole range enters the tolerance
    XReal max_r(prec);
    std::vector<XReal> r_cache;
    r_cache.reserve(n_max + 1);
    r_cache.push_back(XReal(prec));  // unused slot 0
    for (std::uint64_t m = 1; m <= n_max; m++) {
        r_cache.push_back(eval_r(spec, m));
        XReal a = r_cache.back().abs();
        if (a > max_r) max_r = a;
    }

    XReal ulp_scale(prec);
    mpfr_set_ui_2exp(ulp_scale.raw(), 1, -(prec - 20), MPFR_RNDN);

    for (std::uint64_t n = 1; n <= n_max; n++) {
        XReal acc(prec);
        for (std::uint64_t d : divisors(n)) acc = add(acc, eval_s(spec, d));
        XReal residual = sub(acc, r_cache[n]).abs();
        XReal tol = mul(mul(ulp_scale, XReal::of_u64(divisor_count(n), prec)), max_r);
        if (residual > rep.max_residual) {
            rep.max_residual = residual;
            rep.worst_n = n;
            rep.tolerance_at_worst = tol;
        }
        if (residual > tol) rep.violations.push_back(n);
    }
    return rep;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

RateSpec parse_rate_spec(std::istream& in) {
    struct Item {
        int line;
        std::vector<std::string> toks;
    };
    std::vector<Item> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = tokenize(line);
        if (!toks.empty()) items.push_back({lineno, std::move(toks)});
    }

    // first pass: precision and kind
    mpfr_prec_t prec = XReal::kDefaultPrec;
    std::string kind_str;
    for (const auto& it : items) {
        if (it.toks[0] == "precision_bits") {
            if (it.toks.size() != 2)
                throw ParseError("expected: precision_bits <bits>", it.line, "precision_bits");
            long b = std::atol(it.toks[1].c_str());
            if (b < 100 || b > 1 << 20)
                throw ParseError("precision_bits must be in [100, 2^20]", it.line,
                                 "precision_bits");
            prec = b;
        } else if (it.toks[0] == "kind") {
            if (it.toks.size() != 2) throw ParseError("expected: kind <name>", it.line, "kind");
            kind_str = it.toks[1];
        }
    }
    if (kind_str.empty()) throw ParseError("missing 'kind' line", 1, "kind");

    RateSpec spec;
    spec.precision_bits = prec;
    if (kind_str == "multiplicative")
        spec.kind = RateKind::multiplicative;
    else if (kind_str == "tower")
        spec.kind = RateKind::tower;
    else if (kind_str == "explicit")
        spec.kind = RateKind::explicit_table;
    else
        throw ParseError("kind must be multiplicative|tower|explicit", 1, "kind");

    bool have_rule = false, have_kappa = false;
    for (const auto& it : items) {
        const auto& t = it.toks;
        const std::string& key = t[0];
        if (key == "precision_bits" || key == "kind") continue;
        if (key == "rule") {
            if (spec.kind != RateKind::multiplicative)
                throw ParseError("'rule' only valid for kind multiplicative", it.line, "rule");
            if (t.size() != 2 || t[1] != "kappa*a*log(p)")
                throw ParseError("only rule kappa*a*log(p) is supported", it.line, "rule");
            have_rule = true;
        } else if (key == "kappa") {
            if (spec.kind != RateKind::multiplicative)
                throw ParseError("'kappa' only valid for kind multiplicative", it.line, "kappa");
            if (t.size() != 2 || !XReal::parse_decimal(t[1], prec, spec.kappa))
                throw ParseError("bad kappa value", it.line, "kappa");
            have_kappa = true;
        } else if (key == "rpa") {
            if (spec.kind != RateKind::multiplicative)
                throw ParseError("'rpa' only valid for kind multiplicative", it.line, "rpa");
            if (t.size() != 4) throw ParseError("expected: rpa <p> <a> <value>", it.line, "rpa");
            auto p = parse_bignat(t[1]);
            long a = std::atol(t[2].c_str());
            XReal v(prec);
            if (!p || !fits_u64(*p) || !is_prime_u64(to_u64(*p)))
                throw ParseError("rpa: p must be prime", it.line, "rpa");
            if (a < 1) throw ParseError("rpa: a must be >= 1", it.line, "rpa");
            if (!XReal::parse_decimal(t[3], prec, v))
                throw ParseError("rpa: bad value", it.line, "rpa");
            spec.overrides[{to_u64(*p), static_cast<unsigned>(a)}] = v;
        } else if (key == "max_n") {
            if (spec.kind != RateKind::explicit_table)
                throw ParseError("'max_n' only valid for kind explicit", it.line, "max_n");
            if (t.size() != 2) throw ParseError("expected: max_n <n>", it.line, "max_n");
            spec.max_n = std::strtoull(t[1].c_str(), nullptr, 10);
            if (spec.max_n < 1) throw ParseError("max_n must be >= 1", it.line, "max_n");
        } else if (key == "r") {
            if (spec.kind != RateKind::explicit_table)
                throw ParseError("'r' rows only valid for kind explicit", it.line, "r");
            if (t.size() != 3) throw ParseError("expected: r <n> <value>", it.line, "r");
            std::uint64_t n = std::strtoull(t[1].c_str(), nullptr, 10);
            XReal v(prec);
            if (n < 1) throw ParseError("r: n must be >= 1", it.line, "r");
            if (!XReal::parse_decimal(t[2], prec, v))
                throw ParseError("r: bad value", it.line, "r");
            spec.table[n] = v;
        } else {
            throw ParseError("unknown key '" + key + "'", it.line, key);
        }
    }

    if (spec.kind == RateKind::multiplicative) {
        if (!have_rule || !have_kappa)
            throw ParseError("multiplicative spec needs 'rule kappa*a*log(p)' and 'kappa'", 1,
                             have_rule ? "kappa" : "rule");
    }
    if (spec.kind == RateKind::explicit_table) {
        if (spec.max_n == 0) throw ParseError("explicit spec needs 'max_n'", 1, "max_n");
        if (auto it = spec.table.find(1); it != spec.table.end() && !it->second.is_zero())
            throw ParseError("explicit table entry for n=1 must be 0", 1, "r");
        for (std::uint64_t n = 2; n <= spec.max_n; n++) {
            if (!spec.table.count(n))
                throw ParseError("explicit table does not cover n=" + std::to_string(n), 1, "r");
        }
        for (const auto& [n, v] : spec.table) {
            if (n > spec.max_n)
                throw ParseError("explicit table entry n=" + std::to_string(n) +
                                     " beyond max_n",
                                 1, "r");
        }
    }
    return spec;
}

RateSpec load_rate_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open rate spec file: " + path);
    return parse_rate_spec(in);
}

}  // namespace fmethod
