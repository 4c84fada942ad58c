#include <doctest.h>

#include "fpresheaf/pgroup.hpp"

using namespace fpre;

namespace {

std::shared_ptr<const site::TruncatedSite> site3() {
    static std::shared_ptr<const site::TruncatedSite> s = [] {
        fp::PrimeScope p2(2);
        return site::make_site(3);
    }();
    return s;
}

pg::GroupMorphismFamily heis_center_inclusion(const pg::PGroupPresheaf& lambda2,
                                              const pg::PGroupPresheaf& heis) {
    pg::GroupMorphismFamily fam;
    for (int d = 0; d <= heis.window(); ++d) {
        std::uint32_t dd = static_cast<std::uint32_t>(d);
        std::uint32_t wd = dd * (dd - 1) / 2;
        fam.maps.push_back([dd, wd](const pg::GElem& c) {
            pg::GElem out(2 * dd + wd, 0);
            for (std::uint32_t i = 0; i < wd; ++i) out[2 * dd + i] = c[i];
            return out;
        });
    }
    (void)lambda2;
    return fam;
}

pg::GroupMorphismFamily heis_abelianization(const pg::PGroupPresheaf& heis) {
    pg::GroupMorphismFamily fam;
    for (int d = 0; d <= heis.window(); ++d) {
        std::uint32_t dd = static_cast<std::uint32_t>(d);
        fam.maps.push_back([dd](const pg::GElem& e) {
            return pg::GElem(e.begin(), e.begin() + 2 * dd);
        });
    }
    return fam;
}

} // namespace

TEST_CASE("group axioms of the catalog groups") {
    fp::PrimeScope p2(2);
    CHECK(pg::TupleAbelianGroup({4}).check_axioms().empty());
    CHECK(pg::TupleAbelianGroup({2, 2, 2}).check_axioms().empty());
    CHECK(pg::HeisenbergGroup(2).check_axioms().empty());
    CHECK(pg::WittSymGroup(2).check_axioms().empty());
    fp::PrimeScope p3(3);
    CHECK(pg::HeisenbergGroup(1).check_axioms().empty());
    CHECK(pg::TupleAbelianGroup({9}).check_axioms().empty());
}

TEST_CASE("frattini subgroup examples") {
    fp::PrimeScope p2(2);
    pg::TupleAbelianGroup z4({4});
    auto phi = pg::frattini_subgroup(z4);
    REQUIRE(phi.size() == 2); // {0, 2}
    CHECK(phi[1] == pg::GElem{2});

    pg::TupleAbelianGroup e8({2, 2, 2});
    CHECK(pg::frattini_subgroup(e8).size() == 1);

    pg::HeisenbergGroup heis2(2); // order 32
    CHECK(heis2.order() == 32);
    auto phi_h = pg::frattini_subgroup(heis2);
    CHECK(phi_h.size() == 2); // the center Lambda^2(F_2^2), order 2

    pg::TupleAbelianGroup z6({6});
    CHECK_THROWS_AS(pg::frattini_subgroup(z6), NotAPGroup);
}

TEST_CASE("heisenberg presheaf validates") {
    fp::PrimeScope p2(2);
    auto s = site3();
    pg::PGroupPresheaf heis = pg::heisenberg(s);
    CHECK(heis.group(3).order() == 512);
    CHECK(validate(heis).ok);
}

TEST_CASE("p-derived series of the Heisenberg functor") {
    fp::PrimeScope p2(2);
    auto s = site3();
    pg::PGroupPresheaf heis = pg::heisenberg(s);
    pg::FrattiniSeries series = pg::p_derived_series(heis);
    REQUIRE(series.length() == 2);
    CHECK(series.graded[0].dims() == std::vector<std::uint32_t>{0, 2, 4, 6});
    CHECK(series.graded[1].dims() == std::vector<std::uint32_t>{0, 0, 1, 3});
    CHECK(lin::validate(series.graded[0]).ok);
    CHECK(lin::validate(series.graded[1]).ok);

    // graded pieces are naturally isomorphic to V + V and Lambda^2 V
    lin::LinFunctor vv = lin::direct_sum(lin::sym_power(s, 1), lin::sym_power(s, 1));
    lin::LinFunctor l2 = lin::ext_power(s, 2);
    auto find_iso = [&](const lin::LinFunctor& a, const lin::LinFunctor& b) {
        if (a.dims() != b.dims()) return false;
        auto basis = lin::nat_hom(a, b);
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << basis.size()); ++mask) {
            bool iso = true;
            for (int d = 0; d <= a.window() && iso; ++d) {
                FpMatrix m(b.dim(d), a.dim(d));
                for (std::size_t i = 0; i < basis.size(); ++i)
                    if (mask >> i & 1)
                        for (std::uint32_t r = 0; r < m.rows(); ++r)
                            for (std::uint32_t c = 0; c < m.cols(); ++c)
                                m.set(r, c, fp::add(m.at(r, c), basis[i].levels[d].at(r, c)));
                if (linalg::rank(m) != a.dim(d)) iso = false;
            }
            if (iso) return true;
        }
        return basis.empty() && a.dims() == std::vector<std::uint32_t>(a.window() + 1, 0);
    };
    CHECK(find_iso(series.graded[0], vv));
    CHECK(find_iso(series.graded[1], l2));
}

TEST_CASE("p-derived series of abelian and witt examples") {
    fp::PrimeScope p2(2);
    auto s = site3();
    // elementary abelian: length 1, graded is the functor itself
    pg::PGroupPresheaf ab = pg::elem_abelian(lin::ext_power(s, 2));
    pg::FrattiniSeries sa = pg::p_derived_series(ab);
    REQUIRE(sa.length() == 1);
    CHECK(sa.graded[0].dims() == lin::ext_power(s, 2).dims());

    // the symmetric-square cocycle extension: length 2,
    // graded (V + Lambda^2 V, V); levelwise (Z/4)^d x (Z/2)^{C(d,2)}
    pg::PGroupPresheaf w = pg::witt_sym(s);
    CHECK(validate(w).ok);
    pg::FrattiniSeries sw = pg::p_derived_series(w);
    REQUIRE(sw.length() == 2);
    CHECK(sw.graded[0].dims() == std::vector<std::uint32_t>{0, 1, 3, 6});
    CHECK(sw.graded[1].dims() == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("p-finiteness verdicts") {
    fp::PrimeScope p2(2);
    auto s = site3();
    pg::PFiniteResult h = pg::p_finite_test(pg::heisenberg(s));
    CHECK(h.p_finite);
    CHECK(h.degree.degree == 2);
    CHECK(h.series_length == 2);
    CHECK(h.gamma_exponents == std::vector<std::uint32_t>{0, 2, 5, 9}); // 2t + C(t,2)
    CHECK(h.gamma_fit.kind == growth::FitKind::ExactDegree);
    CHECK(h.gamma_fit.degree == 2);

    // degree 3 needs an arity-4 vanishing slot, so test on the window-4 site
    auto s4 = site::make_site(4);
    pg::PFiniteResult a = pg::p_finite_test(pg::elem_abelian(lin::ext_power(s4, 3)));
    CHECK(a.p_finite);
    CHECK(a.degree.degree == 3);

    // reduced function-space groups grow exponentially: not detected
    pg::PFiniteResult e = pg::p_finite_test(pg::elem_abelian(lin::ibar(s)));
    CHECK(!e.p_finite);
    CHECK(e.gamma_exponents == std::vector<std::uint32_t>{0, 1, 3, 7});
}

TEST_CASE("group cross-effects") {
    fp::PrimeScope p2(2);
    auto s = site3();
    pg::PGroupPresheaf heis = pg::heisenberg(s);
    auto cr2 = pg::group_cross_effect(heis, {1, 1});
    CHECK(cr2.size() == 2); // the central A (x) B part, Z/2
    auto cr3 = pg::group_cross_effect(heis, {1, 1, 1});
    CHECK(cr3.size() == 1);
    pg::GroupPolyDegree deg = pg::group_poly_degree(heis);
    CHECK(deg.degree == 2);

    // abelian agreement with the linear cross-effect
    for (auto f : {lin::sym_power(s, 2), lin::ext_power(s, 2), lin::sym_power(s, 1)}) {
        pg::PGroupPresheaf ab = pg::elem_abelian(f);
        auto gc = pg::group_cross_effect(ab, {1, 1});
        auto lc = lin::cross_effect(f, {1, 1});
        CHECK(gc.size() == fp::pow_u64(2, static_cast<unsigned>(lc.basis.size())));
        CHECK(pg::group_poly_degree(ab).degree == lin::poly_degree(f).degree);
    }

    // additive functor has degree 1
    CHECK(pg::group_poly_degree(pg::elem_abelian(lin::sym_power(s, 1))).degree == 1);
}

TEST_CASE("cross-effect exactness for the Heisenberg extension") {
    fp::PrimeScope p2(2);
    auto s = site3();
    pg::PGroupPresheaf heis = pg::heisenberg(s);
    pg::PGroupPresheaf center = pg::elem_abelian(lin::ext_power(s, 2));
    pg::PGroupPresheaf ab =
        pg::elem_abelian(lin::direct_sum(lin::sym_power(s, 1), lin::sym_power(s, 1)));

    pg::GroupMorphismFamily incl = heis_center_inclusion(center, heis);
    pg::GroupMorphismFamily proj = heis_abelianization(heis);
    CHECK(pg::cross_effect_exactness_check(center, heis, ab, incl, proj, 2));
    CHECK(pg::cross_effect_exactness_check(center, heis, ab, incl, proj, 1));

    // thickness: the degrees of kernel and quotient bound the middle
    auto dk = pg::group_poly_degree(center).degree;
    auto dg = pg::group_poly_degree(heis).degree;
    auto dq = pg::group_poly_degree(ab).degree;
    REQUIRE(dk);
    REQUIRE(dg);
    REQUIRE(dq);
    CHECK(*dg == std::max(*dk, *dq));
    CHECK(*dk <= *dg);
    CHECK(*dq <= *dg);

    // a non-exact input is rejected with a witness
    pg::GroupMorphismFamily bad_proj = proj;
    bad_proj.maps[2] = [](const pg::GElem& e) {
        return pg::GElem(4, 0); // constant map, not surjective
    };
    CHECK_THROWS_AS(
        pg::cross_effect_exactness_check(center, heis, ab, incl, bad_proj, 2), NotExact);

    // trivial kernel: cr_n G = cr_n Q via the identity
    pg::PGroupPresheaf triv = pg::elem_abelian(lin::constant_functor(s, 0));
    pg::GroupMorphismFamily triv_incl, id_proj;
    for (int d = 0; d <= 3; ++d) {
        std::uint32_t dd = static_cast<std::uint32_t>(d);
        std::uint32_t wd = dd * (dd - 1) / 2;
        triv_incl.maps.push_back([dd, wd](const pg::GElem&) { return pg::GElem(2 * dd + wd, 0); });
        id_proj.maps.push_back([](const pg::GElem& e) { return e; });
    }
    CHECK(pg::cross_effect_exactness_check(triv, heis, heis, triv_incl, id_proj, 2));
}

TEST_CASE("augmentation filtration") {
    fp::PrimeScope p2(2);
    pg::TupleAbelianGroup z2({2});
    pg::AugmentationFiltration a2 = pg::augmentation_filtration(z2);
    CHECK(a2.power_dims == std::vector<std::uint32_t>{1, 0});
    CHECK(a2.nilpotency_index == 2);

    pg::TupleAbelianGroup z4({4});
    pg::AugmentationFiltration a4 = pg::augmentation_filtration(z4);
    CHECK(a4.power_dims == std::vector<std::uint32_t>{3, 2, 1, 0});
    CHECK(a4.nilpotency_index == 4);
    CHECK(a4.dim_i_mod_i2 == 1);
    CHECK(a4.abelianization_match);

    pg::HeisenbergGroup heis2(2);
    pg::AugmentationFiltration ah = pg::augmentation_filtration(heis2);
    CHECK(ah.dim_i_mod_i2 == 4);
    CHECK(ah.dim_g_mod_frattini == 4);
    CHECK(ah.abelianization_match);
    REQUIRE(ah.nilpotency_index.has_value());
    CHECK(*ah.nilpotency_index <= 32);

    pg::TupleAbelianGroup big({2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2});
    CHECK_THROWS_AS(pg::augmentation_filtration(big), CapExceeded);
}

TEST_CASE("underlying presheaf of a group functor") {
    fp::PrimeScope p2(2);
    auto s = site3();
    pg::PGroupPresheaf heis = pg::heisenberg(s);
    presheaf::SetPresheaf u = pg::underlying_presheaf(heis);
    CHECK(u.sizes() == std::vector<std::uint32_t>{1, 4, 32, 512});
    CHECK(presheaf::validate(u).ok);
    lin::FinitenessResult fr = lin::finiteness_degree(u);
    REQUIRE(fr.degree.has_value());
    CHECK(*fr.degree == 2); // matches the graded polynomial degree

    // trivial group presheaf has degree 0
    pg::PGroupPresheaf triv = pg::elem_abelian(lin::constant_functor(s, 0));
    CHECK(lin::finiteness_degree(pg::underlying_presheaf(triv)).degree == 0);

    // elementary abelian V itself has degree 1
    pg::PGroupPresheaf v = pg::elem_abelian(lin::sym_power(s, 1));
    CHECK(lin::finiteness_degree(pg::underlying_presheaf(v)).degree == 1);
}

TEST_CASE("quotient groups") {
    fp::PrimeScope p2(2);
    auto parent = std::make_shared<pg::HeisenbergGroup>(2);
    auto center = pg::frattini_subgroup(*parent);
    pg::QuotientGroup q(parent, center);
    CHECK(q.order() == 16);
    CHECK(q.check_axioms().empty());
}
