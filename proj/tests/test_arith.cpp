#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fmethod/arith.hpp>
#include <fmethod/errors.hpp>

#include <random>

using namespace fmethod;

TEST_CASE("factorize matches the worked examples") {
    CHECK(factorize(1).factors.empty());

    Factorization f12 = factorize(12);
    REQUIRE(f12.factors.size() == 2);
    CHECK(f12.factors[0].prime == 2);
    CHECK(f12.factors[0].exponent == 2);
    CHECK(f12.factors[1].prime == 3);
    CHECK(f12.factors[1].exponent == 1);

    Factorization f = factorize(720720);
    REQUIRE(f.factors.size() == 6);
    std::uint64_t ps[] = {2, 3, 5, 7, 11, 13};
    unsigned es[] = {4, 2, 1, 1, 1, 1};
    for (size_t i = 0; i < 6; i++) {
        CHECK(f.factors[i].prime == BigNat(static_cast<unsigned long>(ps[i])));
        CHECK(f.factors[i].exponent == es[i]);
    }
}

TEST_CASE("factorization reconstructs n and divisor_count matches") {
    for (std::uint64_t n = 1; n <= 10000; n++) {
        Factorization f = factorize_u64(n);
        BigNat prod = 1;
        std::uint64_t dc = 1;
        BigNat prev = 0;
        for (const auto& e : f.factors) {
            CHECK(e.exponent >= 1);
            CHECK(e.prime > prev);
            prev = e.prime;
            CHECK(is_prime(e.prime));
            prod *= bignat_pow(e.prime, e.exponent);
            dc *= e.exponent + 1;
        }
        CHECK(prod == from_u64(n));
        CHECK(divisor_count(n) == dc);
        CHECK(divisors(n).size() == dc);
    }
}

TEST_CASE("mobius examples and the fundamental divisor-sum identity") {
    CHECK(mobius(1) == 1);
    CHECK(mobius(6) == 1);
    CHECK(mobius(12) == 0);
    for (std::uint64_t n = 1; n <= 10000; n++) {
        long sum = 0;
        for (std::uint64_t d : divisors(n)) sum += mobius(d);
        CHECK(sum == (n == 1 ? 1 : 0));
    }
}

TEST_CASE("divisors examples") {
    CHECK(divisors(1) == std::vector<std::uint64_t>{1});
    CHECK(divisors(6) == std::vector<std::uint64_t>({1, 2, 3, 6}));
    CHECK(divisors(16) == std::vector<std::uint64_t>({1, 2, 4, 8, 16}));
    CHECK(divisor_count(1) == 1);
    CHECK(divisor_count(12) == 6);
    CHECK(divisor_count(720720) == 240);
}

TEST_CASE("is_prime agrees with trial division up to a million") {
    // sieve oracle
    const std::uint32_t bound = 1'000'000;
    std::vector<bool> sieve(bound + 1, true);
    sieve[0] = sieve[1] = false;
    for (std::uint32_t i = 2; static_cast<std::uint64_t>(i) * i <= bound; i++)
        if (sieve[i])
            for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= bound; j += i)
                sieve[j] = false;
    for (std::uint32_t n = 0; n <= bound; n++) {
        if (is_prime_u64(n) != sieve[n]) {
            CAPTURE(n);
            REQUIRE(is_prime_u64(n) == sieve[n]);
        }
    }
    CHECK_FALSE(is_prime(BigNat(1)));
    CHECK(is_prime(BigNat(101)));
    CHECK(is_prime(BigNat(1000003)));
}

TEST_CASE("strong Lucas test: primes pass, composite survivors are known pseudoprimes") {
    // strong Lucas pseudoprimes with Selfridge parameters below 20000
    const std::uint64_t known[] = {5459, 5777, 10877, 16109, 18971};
    for (std::uint64_t n = 15; n <= 20000; n += 2) {
        BigNat nz = from_u64(n);
        if (mpz_perfect_square_p(nz.get_mpz_t())) continue;
        bool lucas = detail::strong_lucas_selfridge(nz);
        if (is_prime_u64(n)) {
            CHECK(lucas);
        } else if (lucas) {
            bool expected = false;
            for (std::uint64_t k : known) expected |= (k == n);
            CAPTURE(n);
            CHECK(expected);
        }
    }
}

TEST_CASE("classify_prime above 2^64 reports probable primes") {
    // 2^89 - 1 is a Mersenne prime
    BigNat m89 = bignat_pow(BigNat(2), 89) - 1;
    CHECK(classify_prime(m89) == Primality::probable_prime);
    CHECK(classify_prime(m89 + 2) == Primality::composite);
    // below the 64-bit line the verdict is deterministic
    CHECK(classify_prime(BigNat("18446744073709551557")) == Primality::prime);
}

TEST_CASE("multiplicative_order examples") {
    CHECK(multiplicative_order(1, 7) == 1);
    CHECK(multiplicative_order(2, 7) == 3);
    CHECK(multiplicative_order(3, 7) == 6);
    CHECK_THROWS_AS(multiplicative_order(0, 7), ConfigError);
    CHECK_THROWS_AS(multiplicative_order(7, 7), ConfigError);
}

TEST_CASE("primitive_root examples and order property up to 1000") {
    CHECK(primitive_root(2) == 1);
    CHECK(primitive_root(7) == 3);
    CHECK(primitive_root(11) == 2);
    for (std::uint32_t p : small_primes()) {
        if (p > 1000) break;
        BigNat pz(p);
        BigNat g = primitive_root(pz);
        CHECK(multiplicative_order(g, pz) == pz - 1);
        // minimality: no smaller generator
        for (BigNat h = 1; h < g; h++) {
            CHECK(multiplicative_order(h, pz) != pz - 1);
        }
    }
}

TEST_CASE("von Mangoldt: zero off prime powers, log p on them") {
    CHECK(von_mangoldt(1).is_zero());
    CHECK(von_mangoldt(6).is_zero());
    XReal l2 = log_of_u64(2, 128);
    CHECK(von_mangoldt(8, 128) == l2);
    XReal l7 = log_of_u64(7, 128);
    CHECK(von_mangoldt(49, 128) == l7);
    CHECK(prime_power_decompose(1024) == std::make_pair<std::uint64_t, unsigned>(2, 10));
    CHECK_FALSE(prime_power_decompose(1).has_value());
    CHECK_FALSE(prime_power_decompose(12).has_value());
}

TEST_CASE("rho factoring splits hard semiprimes deterministically") {
    // two 46-bit primes
    BigNat p("70368744177757");
    BigNat q("70368744177643");
    REQUIRE(is_prime(p));
    REQUIRE(is_prime(q));
    Factorization f = factorize(p * q);
    REQUIRE(f.factors.size() == 2);
    CHECK(f.factors[0].prime == p);
    CHECK(f.factors[1].prime == q);

    // same twice: deterministic
    Factorization g = factorize(p * q);
    CHECK(g.factors[0].prime == f.factors[0].prime);
}

TEST_CASE("factorize on random words round-trips") {
    std::mt19937_64 rng(20240817);
    for (int i = 0; i < 200; i++) {
        std::uint64_t n = (rng() % (1ull << 40)) + 2;
        Factorization f = factorize_u64(n);
        BigNat prod = 1;
        for (const auto& e : f.factors) prod *= bignat_pow(e.prime, e.exponent);
        CHECK(prod == from_u64(n));
    }
}

TEST_CASE("primes_in_range matches direct testing") {
    auto ps = primes_in_range(100, 200);
    std::vector<std::uint64_t> expect;
    for (std::uint64_t v = 100; v < 200; v++)
        if (is_prime_u64(v)) expect.push_back(v);
    CHECK(ps == expect);
    CHECK(primes_in_range(0, 3) == std::vector<std::uint64_t>{2});
}
