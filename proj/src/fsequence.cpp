#include "fmethod/fsequence.hpp"

#include <fstream>
#include <sstream>

#include "fmethod/errors.hpp"

namespace fmethod {

std::string rule_name(SelectionRule r) {
    switch (r) {
        case SelectionRule::unit: return "unit";
        case SelectionRule::ratio: return "ratio";
        case SelectionRule::log_band: return "log";
        case SelectionRule::tower: return "tower";
    }
    return "unit";
}

std::optional<SelectionRule> rule_from_name(const std::string& s) {
    if (s == "unit") return SelectionRule::unit;
    if (s == "ratio") return SelectionRule::ratio;
    if (s == "log") return SelectionRule::log_band;
    if (s == "tower") return SelectionRule::tower;
    return std::nullopt;
}

const FEntry& FSequence::at(std::uint64_t n) const {
    if (n < 1 || n > entries.size())
        throw ConfigError("sequence index n=" + std::to_string(n) + " beyond length " +
                          std::to_string(entries.size()));
    return entries[n - 1];
}

FEntry& FSequence::at(std::uint64_t n) {
    if (n < 1 || n > entries.size())
        throw ConfigError("sequence index n=" + std::to_string(n) + " beyond length " +
                          std::to_string(entries.size()));
    return entries[n - 1];
}

void save_fsequence(std::ostream& out, const FSequence& seq) {
    out << "fsequence v1\n";
    out << "precision_bits " << seq.meta.precision_bits << "\n";
    out << "mode " << seq.meta.mode << "\n";
    out << "n0 " << seq.meta.n0 << "\n";
    if (seq.meta.eps) out << "eps " << seq.meta.eps->to_hex() << "\n";
    if (seq.meta.kappa) out << "kappa " << seq.meta.kappa->to_hex() << "\n";
    if (seq.meta.c) out << "c " << seq.meta.c->to_hex() << "\n";
    out << "entries " << seq.entries.size() << "\n";
    for (std::uint64_t n = 1; n <= seq.entries.size(); n++) {
        const FEntry& e = seq.entries[n - 1];
        out << n << ' ' << to_string(e.p) << ' ' << to_string(e.g) << ' '
            << rule_name(e.rule) << ' ' << (e.in_band ? 1 : 0) << ' ' << e.lo.to_hex()
            << ' ' << e.hi.to_hex() << '\n';
    }
}

FSequence load_fsequence(std::istream& in) {
    FSequence seq;
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            lineno++;
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line() || line != "fsequence v1")
        throw ParseError("expected header 'fsequence v1'", lineno == 0 ? 1 : lineno, "header");

    std::uint64_t expect_entries = 0;
    bool have_entries_line = false;
    while (next_line()) {
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "precision_bits") {
            long b = 0;
            if (!(is >> b) || b < 100)
                throw ParseError("bad precision_bits", lineno, "precision_bits");
            seq.meta.precision_bits = b;
        } else if (key == "mode") {
            if (!(is >> seq.meta.mode)) throw ParseError("bad mode", lineno, "mode");
        } else if (key == "n0") {
            if (!(is >> seq.meta.n0)) throw ParseError("bad n0", lineno, "n0");
        } else if (key == "eps" || key == "kappa" || key == "c") {
            std::string hex;
            XReal v(seq.meta.precision_bits);
            if (!(is >> hex) || !XReal::parse_hex(hex, seq.meta.precision_bits, v))
                throw ParseError("bad hex real", lineno, key);
            if (key == "eps")
                seq.meta.eps = v;
            else if (key == "kappa")
                seq.meta.kappa = v;
            else
                seq.meta.c = v;
        } else if (key == "entries") {
            if (!(is >> expect_entries)) throw ParseError("bad entries count", lineno, "entries");
            have_entries_line = true;
            break;
        } else {
            throw ParseError("unknown header key '" + key + "'", lineno, key);
        }
    }
    if (!have_entries_line) throw ParseError("missing 'entries' line", lineno, "entries");

    seq.entries.reserve(expect_entries);
    for (std::uint64_t n = 1; n <= expect_entries; n++) {
        if (!next_line()) throw ParseError("truncated entry list", lineno, "entry");
        std::istringstream is(line);
        std::uint64_t n_read = 0;
        std::string p_str, g_str, rule_str, lo_hex, hi_hex;
        int in_band = 0;
        if (!(is >> n_read >> p_str >> g_str >> rule_str >> in_band >> lo_hex >> hi_hex))
            throw ParseError("malformed entry record", lineno, "entry");
        if (n_read != n) throw ParseError("entry out of order", lineno, "entry");
        FEntry e;
        auto p = parse_bignat(p_str);
        auto g = parse_bignat(g_str);
        auto rule = rule_from_name(rule_str);
        if (!p || !g || !rule) throw ParseError("malformed entry fields", lineno, "entry");
        e.p = *p;
        e.g = *g;
        e.rule = *rule;
        e.in_band = in_band != 0;
        e.lo = XReal(seq.meta.precision_bits);
        e.hi = XReal(seq.meta.precision_bits);
        if (!XReal::parse_hex(lo_hex, seq.meta.precision_bits, e.lo) ||
            !XReal::parse_hex(hi_hex, seq.meta.precision_bits, e.hi))
            throw ParseError("malformed interval endpoints", lineno, "entry");
        seq.entries.push_back(std::move(e));
    }
    return seq;
}

void save_fsequence_file(const std::string& path, const FSequence& seq) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write sequence file: " + path);
    save_fsequence(out, seq);
}

FSequence load_fsequence_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open sequence file: " + path);
    return load_fsequence(in);
}

std::vector<ValidationIssue> validate_fsequence(const FSequence& seq,
                                                std::vector<std::uint64_t>* probable_prime_ns,
                                                const FactorBudget& budget) {
    std::vector<ValidationIssue> issues;
    auto bad = [&](std::uint64_t n, std::string what) {
        issues.push_back({n, std::move(what)});
    };
    if (!seq.entries.empty() && seq.entries[0].p != 1) bad(1, "p_1 must be 1");
    for (std::uint64_t n = 1; n <= seq.entries.size(); n++) {
        const FEntry& e = seq.entries[n - 1];
        if (e.p == 1) {
            if (e.g != 0) bad(n, "unit entry must have g = 0");
            if (e.rule != SelectionRule::unit) bad(n, "p = 1 entry must carry rule unit");
            if (e.in_band) bad(n, "unit entry must not claim in_band");
            continue;
        }
        if (e.rule == SelectionRule::unit) bad(n, "prime entry carries rule unit");
        Primality cls = classify_prime(e.p, budget);
        if (cls == Primality::composite) {
            bad(n, "p is composite");
            continue;
        }
        if (cls == Primality::probable_prime && probable_prime_ns)
            probable_prime_ns->push_back(n);
        BigNat nz(static_cast<unsigned long>(n));
        if ((e.p - 1) % nz != 0) bad(n, "p != 1 (mod n)");
        if (e.g < 1 || e.g >= e.p) {
            bad(n, "g out of range");
            continue;
        }
        try {
            BigNat ord = multiplicative_order(e.g, e.p, budget);
            if (ord != e.p - 1) bad(n, "g is not a primitive root mod p");
        } catch (const BudgetError& err) {
            bad(n, std::string("order certification hit factoring budget: ") + err.what());
        }
        if (e.in_band) {
            if (e.lo.cmp(e.p) > 0 || e.hi.cmp(e.p) <= 0)
                bad(n, "in_band entry lies outside its stored interval");
        }
    }
    return issues;
}

}  // namespace fmethod
