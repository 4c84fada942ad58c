#include <doctest.h>
#include <random>

#include "fpresheaf/site.hpp"

using namespace fpre;

TEST_CASE("factor examples") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(4);

    auto cf_id = s->factor(FpMatrix::identity(3));
    CHECK(cf_id.rank == 3);
    CHECK(cf_id.flat().empty());
    CHECK(s->recompose(cf_id.flat(), 3, 3) == FpMatrix::identity(3));

    FpMatrix zero(2, 2);
    auto cf_zero = s->factor(zero);
    CHECK(cf_zero.rank == 0);
    CHECK(cf_zero.proj.size() == 2); // down to F^0
    CHECK(cf_zero.incl.size() == 2); // back up to F^2
    CHECK(s->recompose(cf_zero.flat(), 2, 2) == zero);

    FpMatrix row(1, 2);
    row.set(0, 0, 1);
    row.set(0, 1, 1);
    auto cf_row = s->factor(row);
    CHECK(cf_row.rank == 1);
    CHECK(cf_row.sigma.size() == 1); // a single transvection
    CHECK(cf_row.proj.size() == 1);
    CHECK(cf_row.incl.empty());
    CHECK(s->recompose(cf_row.flat(), 2, 1) == row);
}

TEST_CASE("factor recomposes exactly on full hom sets") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(4);
    for (std::uint32_t a = 0; a <= 3; ++a)
        for (std::uint32_t b = 0; b <= 3; ++b)
            for (std::uint64_t k = 0; k < linalg::hom_count(a, b); ++k) {
                FpMatrix f = FpMatrix::from_index(a, b, k);
                auto cf = s->factor(f);
                CHECK(cf.rank == linalg::rank(f));
                CHECK(s->recompose(cf.flat(), a, b) == f);
            }
    // spot checks at the window top
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        std::uint32_t a = rng() % 5, b = rng() % 5;
        FpMatrix f = FpMatrix::from_index(a, b, rng() % linalg::hom_count(a, b));
        CHECK(s->recompose(s->factor(f).flat(), a, b) == f);
    }
}

TEST_CASE("factor recomposes at odd primes") {
    for (unsigned p : {3u, 5u}) {
        fp::PrimeScope ps(p);
        auto s = site::make_site(3);
        for (std::uint32_t a = 0; a <= 2; ++a)
            for (std::uint32_t b = 0; b <= 2; ++b)
                for (std::uint64_t k = 0; k < linalg::hom_count(a, b); ++k) {
                    FpMatrix f = FpMatrix::from_index(a, b, k);
                    CHECK(s->recompose(s->factor(f).flat(), a, b) == f);
                }
        std::mt19937_64 rng(11);
        for (int t = 0; t < 100; ++t) {
            std::uint32_t a = 1 + rng() % 3, b = 1 + rng() % 3;
            FpMatrix f = FpMatrix::from_index(a, b, rng() % linalg::hom_count(a, b));
            CHECK(s->recompose(s->factor(f).flat(), a, b) == f);
        }
    }
}

TEST_CASE("gl_word handles every invertible matrix in the window") {
    for (unsigned p : {2u, 3u}) {
        fp::PrimeScope ps(p);
        auto s = site::make_site(3);
        for (std::uint32_t d = 1; d <= (p == 2 ? 3u : 2u); ++d) {
            for (std::uint64_t k = 0; k < linalg::hom_count(d, d); ++k) {
                FpMatrix m = FpMatrix::from_index(d, d, k);
                if (linalg::rank(m) != d) continue;
                site::Word w = s->gl_word(m);
                CHECK(s->recompose(w, d, d) == m);
            }
        }
    }
}

TEST_CASE("factorization is deterministic") {
    fp::PrimeScope p2(2);
    auto s1 = site::make_site(4);
    auto s2 = site::make_site(4);
    for (std::uint64_t k = 0; k < linalg::hom_count(3, 2); ++k) {
        FpMatrix f = FpMatrix::from_index(3, 2, k);
        CHECK(s1->factor(f).flat() == s2->factor(f).flat());
    }
}

TEST_CASE("window guard") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(2);
    CHECK_THROWS_AS(s->factor(FpMatrix::identity(3)), WindowExceeded);
}

TEST_CASE("generator inventory") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(4);
    // transvections per level plus iota/pi pairs
    std::size_t expect = 0;
    for (std::uint32_t d = 1; d <= 4; ++d) expect += d * d - d;
    expect += 2 * 4;
    CHECK(s->generators().size() == expect);

    fp::PrimeScope p3(3);
    auto s3 = site::make_site(2);
    bool has_dilation = false;
    for (const auto& g : s3->generators())
        if (g.kind == site::GenKind::Dilation) has_dilation = true;
    CHECK(has_dilation);
}
