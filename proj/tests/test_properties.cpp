#include <doctest.h>
#include <thread>

#include "property_suites.hpp"

using namespace fpre;

TEST_CASE("functoriality schedule for catalog objects") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::functoriality_suite(c, 0xfeedu);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("adjunction cardinality identity") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::adjunction_suite(c);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("q_n idempotence and degree bound") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::qn_suite(c);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("gamma additivity") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::gamma_additivity_suite(c);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("tower universality") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::tower_universality_suite(c);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("regular sets are Aut-stable") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::aut_stability_suite(c);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("growth fits are bounded by the finiteness degree") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    auto out = props::growth_bound_suite(c);
    CHECK_MESSAGE(out.ok, out.detail);
}

TEST_CASE("cross-effect degree coheres with the growth degree") {
    fp::PrimeScope p2(2);
    props::Catalog c = props::make_catalog(site::make_site(4));
    for (const auto& f : c.linears) {
        auto pd = lin::poly_degree(f);
        auto fit = growth::degree_fit(growth::profile(f));
        if (pd.degree) {
            CHECK(fit.kind == growth::FitKind::ExactDegree);
            CHECK(fit.degree == *pd.degree);
        } else {
            CHECK(fit.kind == growth::FitKind::NonPolynomialOnWindow);
        }
    }
}

TEST_CASE("pgroup gamma equals the sum over the graded pieces") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(3);
    for (auto g : {pg::heisenberg(s), pg::witt_sym(s), pg::elem_abelian(lin::ext_power(s, 2))}) {
        pg::FrattiniSeries series = pg::p_derived_series(g);
        for (int d = 0; d <= 3; ++d) {
            std::uint32_t total = 0;
            for (const auto& piece : series.graded) total += piece.dim(d);
            std::uint64_t order = g.group(d).order();
            std::uint32_t e = 0;
            while (order > 1) {
                order /= 2;
                ++e;
            }
            CHECK(total == e); // orders multiply along the series
        }
    }
}

TEST_CASE("odd prime functoriality") {
    fp::PrimeScope p3(3);
    auto s = site::make_site(2);
    CHECK(presheaf::validate(presheaf::gr(s, 1)).ok);
    CHECK(presheaf::validate(presheaf::gr_le(s, 1)).ok);
    CHECK(presheaf::validate(lin::sets_of(lin::sym_power(s, 2))).ok);
    CHECK(lin::validate(lin::tensor(lin::sym_power(s, 1), lin::sym_power(s, 1))).ok);
    pg::PGroupPresheaf heis = pg::heisenberg(s);
    CHECK(pg::validate(heis).ok);
    CHECK(pg::group_poly_degree(heis).degree == std::nullopt); // needs arity 3 > window 2
}

TEST_CASE("concurrent act_through is consistent") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(4);
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    std::vector<FpMatrix> morphisms;
    for (std::uint64_t k = 0; k < 64; ++k)
        morphisms.push_back(FpMatrix::from_index(3, 2, k % linalg::hom_count(3, 2)));
    std::vector<std::vector<std::uint32_t>> results(4);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            std::vector<std::uint32_t> acc;
            for (const auto& f : morphisms)
                for (auto v : g2.act(f)) acc.push_back(v);
            results[t] = std::move(acc);
        });
    for (auto& th : pool) th.join();
    CHECK(results[0] == results[1]);
    CHECK(results[0] == results[2]);
    CHECK(results[0] == results[3]);
}

TEST_CASE("seed changes sampling, not verdicts") {
    fp::PrimeScope p2(2);
    auto s = site::make_site(4);
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    for (std::uint64_t seed : {1ull, 99ull, 123456789ull})
        CHECK(presheaf::validate(g2, seed).ok);
}
