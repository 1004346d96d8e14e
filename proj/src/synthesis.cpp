#include "fmethod/synthesis.hpp"

#include <json.hpp>

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fmethod/errors.hpp"

namespace fmethod {

namespace {

// An interval endpoint of the form sum of coeff * exp(arg) with positive
// integer coefficients and dyadic args.  Such values are transcendental
// (args are not all zero in selection paths), so comparisons against
// integers are always decidable at some finite precision.
struct ExpSum {
    std::vector<std::pair<unsigned long, XReal>> terms;

    XReal eval(mpfr_prec_t prec, Round rnd) const {
        XReal acc(prec);
        for (const auto& [coeff, arg] : terms) {
            XReal e = exp_x(arg.round_to(prec, rnd == Round::down ? Round::down : Round::up), rnd);
            acc = add(acc, mul(XReal::of_u64(coeff, prec), e, rnd), rnd);
        }
        return acc;
    }
};

// -1 if v < endpoint, +1 if v > endpoint, certified.
int certified_cmp(const BigNat& v, const ExpSum& ep, mpfr_prec_t base_prec) {
    for (mpfr_prec_t p = base_prec + 64; p <= 8 * base_prec + 1024; p *= 2) {
        XReal lo = ep.eval(p, Round::down);
        XReal hi = ep.eval(p, Round::up);
        if (lo.cmp(v) >= 0) return -1;  // v <= lo <= value, v != value
        if (hi.cmp(v) <= 0) return +1;  // v >= hi >= value
    }
    throw Error("synthesis: precision exhausted certifying an interval endpoint");
}

struct EntryOutcome {
    FEntry entry;
    bool hypothesis_violated = false;
    bool infeasible_unit = false;
};

template <typename F>
void parallel_for(std::uint64_t lo, std::uint64_t hi, int threads, F f) {
    if (threads <= 1 || hi - lo <= 1) {
        for (std::uint64_t i = lo; i < hi; i++) f(i);
        return;
    }
    std::atomic<std::uint64_t> next{lo};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (int t = 0; t < threads; t++) {
        pool.emplace_back([&] {
            while (true) {
                std::uint64_t i = next.fetch_add(1);
                if (i >= hi) break;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

FEntry unit_entry(mpfr_prec_t prec) {
    FEntry e;
    e.p = 1;
    e.g = 0;
    e.rule = SelectionRule::unit;
    e.in_band = false;
    e.lo = XReal(prec);
    e.hi = XReal(prec);
    return e;
}

// Certified selection of the smallest prime = 1 (mod n) at or above the real
// value of lo_ep, with band upper endpoint hi_ep.  hi_int bounds the strict
// scan; extend_up keeps going.
struct Selection {
    BigNat p;
    Primality certainty;
    bool in_band;
};

std::optional<Selection> select_prime(std::uint64_t n, const ExpSum& lo_ep,
                                      const ExpSum& hi_ep, SearchPolicy policy,
                                      std::uint64_t extend_cap, mpfr_prec_t prec,
                                      const FactorBudget& budget) {
    BigNat lo_int = lo_ep.eval(prec, Round::down).floor_bignat();
    if (lo_int < 2) lo_int = 2;
    BigNat hi_int = hi_ep.eval(prec, Round::up).ceil_bignat();
    BigNat start = lo_int;
    BigNat nz(static_cast<unsigned long>(n));
    while (true) {
        APIntervalQuery q{1, nz, start, hi_int, policy, extend_cap};
        if (q.lo >= q.hi) {
            if (policy == SearchPolicy::strict) return std::nullopt;
            q.hi = q.lo + 1;
        }
        APIntervalResult res = find_prime_in_ap_interval(q, budget);
        if (!res.found) return std::nullopt;  // strict, nothing below hi_int
        const BigNat& p = *res.found;
        if (certified_cmp(p, lo_ep, prec) < 0) {
            // fringe integer below the real lower endpoint
            start = p + nz;
            continue;
        }
        bool band = certified_cmp(p, hi_ep, prec) < 0;
        if (policy == SearchPolicy::strict && !band) return std::nullopt;
        return Selection{p, res.certainty, band};
    }
}

}  // namespace

FSequence synthesize(const RateSpec& spec_in, const SynthOptions& opts, SynthStats* stats) {
    RateSpec spec = spec_in;
    if (opts.precision_bits != 0) spec.precision_bits = opts.precision_bits;
    const mpfr_prec_t prec = spec.precision_bits;
    if (opts.n_max < 1) throw ConfigError("synthesize: n_max must be >= 1");
    if (opts.mode == SynthMode::ratio && opts.eps.sign() <= 0)
        throw ConfigError("synthesize: ratio mode requires eps > 0");

    FSequence seq;
    seq.meta.precision_bits = prec;
    seq.meta.mode = opts.mode == SynthMode::ratio ? "ratio" : "log";
    seq.meta.n0 = opts.n0;
    if (opts.mode == SynthMode::ratio) seq.meta.eps = opts.eps.round_to(prec);
    seq.entries.assign(opts.n_max, FEntry{});

    std::vector<EntryOutcome> out(opts.n_max);
    XReal hyp_const(prec);
    XReal::parse_decimal(opts.mode == SynthMode::ratio ? "20.1" : "13.4", prec, hyp_const);

    parallel_for(1, opts.n_max + 1, opts.threads, [&](std::uint64_t n) {
        EntryOutcome& oc = out[n - 1];
        if (n == 1 || n < opts.n0) {
            oc.entry = unit_entry(prec);
            return;
        }
        XReal s = eval_s(spec, n);
        ExpSum lo_ep{{{1, s}}};

        // infeasible-interval rule subsumes s = 0 and negative s
        BigNat np1(static_cast<unsigned long>(n + 1));
        bool feasible = s.sign() > 0 && certified_cmp(np1, lo_ep, prec) < 0;
        if (!feasible) {
            oc.entry = unit_entry(prec);
            oc.infeasible_unit = s.sign() > 0;
            return;
        }

        // theorem-hypothesis flag: s(n) > const * log n, per mode
        if (!(s > mul(hyp_const, log_of_u64(n, prec)))) oc.hypothesis_violated = true;

        ExpSum hi_ep;
        if (opts.mode == SynthMode::log_band) {
            hi_ep.terms = {{2, s}};
        } else {
            XReal w = mul(add(XReal::of(1, prec), opts.eps.round_to(prec)),
                          log_of_u64(n, prec));
            XReal u = sub(s, w);
            hi_ep.terms = {{1, s}, {1, u}};
        }
        auto sel = select_prime(n, lo_ep, hi_ep, opts.policy, opts.extend_cap, prec,
                                opts.budget);
        if (!sel) {
            throw SynthesisError("synthesize: no admissible prime for n=" +
                                     std::to_string(n) + " under strict policy",
                                 n);
        }
        FEntry e;
        e.p = sel->p;
        e.g = primitive_root(sel->p, opts.budget);
        e.rule = opts.mode == SynthMode::ratio ? SelectionRule::ratio
                                               : SelectionRule::log_band;
        e.in_band = sel->in_band;
        e.certainty = sel->certainty;
        e.lo = lo_ep.eval(prec, Round::down);
        e.hi = hi_ep.eval(prec, Round::up);
        oc.entry = std::move(e);
    });

    for (std::uint64_t n = 1; n <= opts.n_max; n++) {
        seq.entries[n - 1] = std::move(out[n - 1].entry);
        if (stats) {
            const FEntry& e = seq.entries[n - 1];
            if (e.p == 1) {
                stats->units++;
                if (out[n - 1].infeasible_unit) stats->infeasible_unit_ns.push_back(n);
            } else if (e.in_band) {
                stats->in_band++;
            } else {
                stats->extended++;
            }
            if (out[n - 1].hypothesis_violated) stats->hypothesis_violations++;
            if (e.p != 1 && e.certainty == Primality::probable_prime)
                stats->probable_prime_ns.push_back(n);
        }
    }
    return seq;
}

FSequence synthesize_tower(const TowerOptions& opts, TowerCertificate* cert,
                           SynthStats* stats) {
    const mpfr_prec_t prec = opts.precision_bits;
    XReal thirteen4(prec);
    XReal::parse_decimal("13.4", prec, thirteen4);
    if (!(opts.kappa > thirteen4))
        throw ConfigError("synthesize_tower: kappa must exceed 13.4");
    if (!(opts.c > XReal::of(1, prec)))
        throw ConfigError("synthesize_tower: c must exceed 1");
    if (opts.n_max < 1) throw ConfigError("synthesize_tower: n_max must be >= 1");

    RateSpec tower = make_tower_rate(prec);
    FSequence seq;
    seq.meta.precision_bits = prec;
    seq.meta.mode = "tower";
    seq.meta.kappa = opts.kappa.round_to(prec);
    seq.meta.c = opts.c.round_to(prec);
    for (std::uint64_t n = 0; n < opts.n_max; n++) seq.entries.push_back(unit_entry(prec));

    if (cert) {
        cert->precision_bits = prec;
        cert->n_max = opts.n_max;
        cert->kappa = opts.kappa.round_to(prec);
        cert->c = opts.c.round_to(prec);
        cert->rows.clear();
    }

    const XReal log_c = log_x(opts.c.round_to(prec));
    const XReal kappa = opts.kappa.round_to(prec);

    for (std::uint32_t q : small_primes()) {
        if (q > opts.n_max) break;
        XReal running(prec);  // sum of log p_{q^i} chosen so far in this chain
        std::uint64_t m = q;
        for (unsigned a = 1; m <= opts.n_max; a++) {
            XReal r_m = eval_r(tower, m);
            XReal delta = sub(r_m, running);
            XReal lq = log_of_u64(q, prec);
            XReal thr = add(log_c, mul(kappa, mul(XReal::of_u64(a, prec), lq)));

            TowerCertRow row;
            row.q = q;
            row.a = a;
            row.delta = delta;
            if (delta.abs() > thr) {
                if (delta.sign() < 0) {
                    // cannot happen for non-decreasing r; keep the chain honest
                    row.failed = true;
                    row.fail_reason = "negative surplus beyond threshold";
                } else {
                    try {
                        ExpSum lo_ep{{{1, delta}}};
                        ExpSum hi_ep{{{2, delta}}};
                        auto sel = select_prime(m, lo_ep, hi_ep, SearchPolicy::extend_up,
                                                opts.extend_cap, prec, opts.budget);
                        FEntry e;
                        e.p = sel->p;
                        e.g = primitive_root(sel->p, opts.budget);
                        e.rule = SelectionRule::tower;
                        e.in_band = sel->in_band;
                        e.certainty = sel->certainty;
                        e.lo = lo_ep.eval(prec, Round::down);
                        e.hi = hi_ep.eval(prec, Round::up);
                        running = add(running, log_of(sel->p, prec));
                        row.p = sel->p;
                        row.prime_chosen = true;
                        row.in_band = sel->in_band;
                        seq.entries[m - 1] = std::move(e);
                    } catch (const BudgetError& err) {
                        row.failed = true;
                        row.fail_reason = err.what();
                    }
                }
            }
            if (cert) cert->rows.push_back(std::move(row));
            if (m > opts.n_max / q) break;
            m *= q;
        }
    }

    if (stats) {
        for (std::uint64_t n = 1; n <= opts.n_max; n++) {
            const FEntry& e = seq.entries[n - 1];
            if (e.p == 1)
                stats->units++;
            else if (e.in_band)
                stats->in_band++;
            else
                stats->extended++;
            if (e.p != 1 && e.certainty == Primality::probable_prime)
                stats->probable_prime_ns.push_back(n);
        }
    }
    return seq;
}

void save_tower_certificate(std::ostream& out, const TowerCertificate& cert) {
    out << "tower-certificate v1\n";
    out << "precision_bits " << cert.precision_bits << "\n";
    out << "n_max " << cert.n_max << "\n";
    out << "kappa " << cert.kappa.to_hex() << "\n";
    out << "c " << cert.c.to_hex() << "\n";
    out << "rows " << cert.rows.size() << "\n";
    for (const auto& r : cert.rows) {
        out << r.q << ' ' << r.a << ' ' << r.delta.to_hex() << ' ' << to_string(r.p) << ' '
            << (r.prime_chosen ? 1 : 0) << ' ' << (r.in_band ? 1 : 0) << ' '
            << (r.failed ? 1 : 0) << '\n';
    }
}

TowerCertificate load_tower_certificate(std::istream& in) {
    TowerCertificate cert;
    std::string line;
    int lineno = 0;
    auto need = [&](bool ok, const std::string& field) {
        if (!ok) throw ParseError("malformed tower certificate", lineno, field);
    };
    need(static_cast<bool>(std::getline(in, line)), "header");
    lineno++;
    need(line == "tower-certificate v1", "header");
    std::uint64_t rows = 0;
    for (std::string key; in >> key;) {
        lineno++;
        if (key == "precision_bits") {
            need(static_cast<bool>(in >> cert.precision_bits), key);
        } else if (key == "n_max") {
            need(static_cast<bool>(in >> cert.n_max), key);
        } else if (key == "kappa" || key == "c") {
            std::string hex;
            need(static_cast<bool>(in >> hex), key);
            XReal v(cert.precision_bits);
            need(XReal::parse_hex(hex, cert.precision_bits, v), key);
            (key == "kappa" ? cert.kappa : cert.c) = v;
        } else if (key == "rows") {
            need(static_cast<bool>(in >> rows), key);
            break;
        } else {
            need(false, key);
        }
    }
    for (std::uint64_t i = 0; i < rows; i++) {
        TowerCertRow r;
        std::string delta_hex, p_str;
        int chosen = 0, in_band = 0, failed = 0;
        lineno++;
        need(static_cast<bool>(in >> r.q >> r.a >> delta_hex >> p_str >> chosen >>
                               in_band >> failed),
             "row");
        r.delta = XReal(cert.precision_bits);
        need(XReal::parse_hex(delta_hex, cert.precision_bits, r.delta), "row");
        auto p = parse_bignat(p_str);
        need(static_cast<bool>(p), "row");
        r.p = *p;
        r.prime_chosen = chosen != 0;
        r.in_band = in_band != 0;
        r.failed = failed != 0;
        cert.rows.push_back(std::move(r));
    }
    return cert;
}

TowerReplayResult replay_tower_certificate(const FSequence& seq,
                                           const TowerCertificate& cert) {
    TowerReplayResult out;
    const mpfr_prec_t prec = cert.precision_bits + 64;
    RateSpec tower = make_tower_rate(prec);
    for (std::uint32_t q : small_primes()) {
        if (q > cert.n_max) break;
        XReal sum_lo(prec), sum_hi(prec);
        std::uint64_t m = q;
        for (unsigned a = 1; m <= cert.n_max; a++) {
            // r(q^a) bounds: iota is exact, log directed
            unsigned k = iota(m);
            XReal r_lo = mul(XReal::of_u64(k, prec), log_of_u64(m, prec, Round::down),
                             Round::down);
            XReal r_hi = mul(XReal::of_u64(k, prec), log_of_u64(m, prec, Round::up),
                             Round::up);
            XReal dev1 = sub(sum_hi, r_lo, Round::up);
            XReal dev2 = sub(r_hi, sum_lo, Round::up);
            XReal dev = dev1 > dev2 ? dev1 : dev2;  // certified >= |sum - r|
            XReal thr_lo =
                add(log_x(cert.c.round_to(prec, Round::down), Round::down),
                    mul(cert.kappa.round_to(prec, Round::down),
                        mul(XReal::of_u64(a, prec), log_of_u64(q, prec, Round::down),
                            Round::down),
                        Round::down),
                    Round::down);
            if (!(dev <= thr_lo)) {
                out.ok = false;
                out.violations.push_back(m);
            }
            const FEntry& e = seq.at(m);
            if (e.p != 1) {
                sum_lo = add(sum_lo, log_of(e.p, prec, Round::down), Round::down);
                sum_hi = add(sum_hi, log_of(e.p, prec, Round::up), Round::up);
            }
            if (m > cert.n_max / q) break;
            m *= q;
        }
    }
    return out;
}

BigNat count_periodic(const FSequence& seq, std::uint64_t n) {
    BigNat prod = 1;
    for (std::uint64_t d : divisors(n)) prod *= seq.at(d).p;
    return prod;
}

XReal log_count(const FSequence& seq, std::uint64_t n) {
    const mpfr_prec_t prec = seq.meta.precision_bits;
    XReal acc(prec);
    for (std::uint64_t d : divisors(n)) {
        const FEntry& e = seq.at(d);
        if (e.p != 1) acc = add(acc, log_of(e.p, prec));
    }
    return acc;
}

namespace {

XReal log2_upper(mpfr_prec_t prec) {
    XReal two = XReal::of(2, prec);
    return log_x(two, Round::up);
}

}  // namespace

GrowthReport verify_growth(const FSequence& seq, const RateSpec& spec_in,
                           std::uint64_t n_lo, std::uint64_t n_hi) {
    RateSpec spec = spec_in;
    spec.precision_bits = seq.meta.precision_bits;
    const mpfr_prec_t prec = seq.meta.precision_bits;
    const std::string& mode = seq.meta.mode;
    if (n_lo < 1 || n_hi > seq.size() || n_lo > n_hi)
        throw ConfigError("verify_growth: bad n range");
    if (mode == "ratio" && !seq.meta.eps)
        throw ConfigError("verify_growth: ratio sequence lacks eps metadata");
    if (mode == "tower" && (!seq.meta.kappa || !seq.meta.c))
        throw ConfigError("verify_growth: tower sequence lacks kappa/c metadata");

    GrowthReport rep;
    rep.mode = mode;
    rep.precision_bits = prec;
    const XReal l2up = log2_upper(prec);

    for (std::uint64_t n = n_lo; n <= n_hi; n++) {
        GrowthRow row;
        row.n = n;
        row.r = (mode == "tower") ? eval_r(make_tower_rate(prec), n) : eval_r(spec, n);
        row.s = (mode == "tower") ? eval_s(make_tower_rate(prec), n) : eval_s(spec, n);
        row.logF = log_count(seq, n);
        row.ratio_exp = sub(row.logF, row.r);
        if (!row.r.is_zero()) row.ratio_log = div(row.logF, row.r);

        XReal budget(prec);
        if (mode == "tower") {
            // per-chain replay bound: target is the sum of r at top prime
            // powers, budget the sum of log(c q^(a kappa))
            XReal target(prec);
            Factorization f = factorize_u64(n);
            for (const auto& fe : f.factors) {
                std::uint64_t q = to_u64(fe.prime);
                std::uint64_t m = 1;
                for (unsigned i = 0; i < fe.exponent; i++) m *= q;
                target = add(target, eval_r(make_tower_rate(prec), m));
                XReal thr = add(log_x(seq.meta.c->round_to(prec), Round::up),
                                mul(seq.meta.kappa->round_to(prec),
                                    mul(XReal::of_u64(fe.exponent, prec),
                                        log_of_u64(q, prec, Round::up), Round::up),
                                    Round::up),
                                Round::up);
                budget = add(budget, thr, Round::up);
            }
            row.error_budget = budget;
            XReal dev = sub(row.logF, target).abs();
            row.within_budget = dev <= budget;
        } else {
            for (std::uint64_t d : divisors(n)) {
                const FEntry& e = seq.at(d);
                if (e.rule == SelectionRule::unit) {
                    // unit correction: charge |s(d)| for every unit divisor
                    budget = add(budget, eval_s(spec, d).abs(), Round::up);
                    continue;
                }
                if (!e.in_band) row.all_in_band = false;
                if (mode == "ratio") {
                    // upper bound of log(1 + d^(-1-eps))
                    XReal a_lo = mul(add(XReal::of(1, prec),
                                         seq.meta.eps->round_to(prec, Round::down),
                                         Round::down),
                                     log_of_u64(d, prec, Round::down), Round::down);
                    XReal x_up = exp_x(-a_lo, Round::up);
                    XReal term(prec);
                    mpfr_log1p(term.raw(), x_up.raw(), MPFR_RNDU);
                    budget = add(budget, term, Round::up);
                } else {
                    budget = add(budget, l2up, Round::up);
                }
            }
            row.error_budget = budget;
            row.within_budget = row.ratio_exp.abs() <= budget;
        }
        if (mode == "tower") {
            for (std::uint64_t d : divisors(n)) {
                const FEntry& e = seq.at(d);
                if (e.rule != SelectionRule::unit && !e.in_band) row.all_in_band = false;
            }
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void write_growth_csv(std::ostream& out, const GrowthReport& rep) {
    out << "n,r,s,logF,ratio_exp,ratio_log,error_budget,within_budget\n";
    for (const auto& r : rep.rows) {
        out << r.n << ',' << r.r.to_decimal(15) << ',' << r.s.to_decimal(15) << ','
            << r.logF.to_decimal(15) << ',' << r.ratio_exp.to_decimal(15) << ','
            << (r.ratio_log ? r.ratio_log->to_decimal(15) : std::string()) << ','
            << r.error_budget.to_decimal(15) << ',' << (r.within_budget ? 1 : 0) << '\n';
    }
}

void write_growth_json(std::ostream& out, const GrowthReport& rep) {
    nlohmann::ordered_json doc;
    doc["mode"] = rep.mode;
    doc["precision_bits"] = static_cast<long>(rep.precision_bits);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json o;
        o["n"] = r.n;
        o["r"] = r.r.to_decimal(15);
        o["s"] = r.s.to_decimal(15);
        o["logF"] = r.logF.to_decimal(15);
        o["ratio_exp"] = r.ratio_exp.to_decimal(15);
        o["ratio_log"] = r.ratio_log ? r.ratio_log->to_decimal(15) : std::string();
        o["error_budget"] = r.error_budget.to_decimal(15);
        o["within_budget"] = r.within_budget;
        arr.push_back(std::move(o));
    }
    doc["rows"] = std::move(arr);
    out << doc.dump(2) << '\n';
}

}  // namespace fmethod
