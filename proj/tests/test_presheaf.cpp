#include <doctest.h>
#include <functional>
#include <numeric>
#include <set>

#include "fpresheaf/linfun.hpp"
#include "fpresheaf/presheaf.hpp"

using namespace fpre;

namespace {

std::shared_ptr<const site::TruncatedSite> site4() {
    static std::shared_ptr<const site::TruncatedSite> s = site::make_site(4);
    return s;
}

presheaf::EndSetTable regular_end_table(std::uint32_t n) {
    presheaf::EndSetTable z;
    z.n = n;
    std::uint64_t m = linalg::hom_count(n, n);
    z.size = static_cast<std::uint32_t>(m);
    z.act.assign(m, std::vector<std::uint32_t>(m));
    for (std::uint64_t k = 0; k < m; ++k) {
        FpMatrix fk = FpMatrix::from_index(n, n, k);
        for (std::uint64_t zz = 0; zz < m; ++zz)
            z.act[k][zz] =
                static_cast<std::uint32_t>(FpMatrix::from_index(n, n, zz).mul(fk).to_index());
    }
    return z;
}

presheaf::EndSetTable orbit_end_table(std::uint32_t n) {
    // Z = GL_n \ End(F^n), orbits keyed by row space
    std::uint64_t m = linalg::hom_count(n, n);
    std::vector<std::string> keys;
    std::vector<FpMatrix> reps;
    std::unordered_map<std::string, std::uint32_t> index;
    for (std::uint64_t k = 0; k < m; ++k) {
        FpMatrix f = FpMatrix::from_index(n, n, k);
        std::string key = linalg::rref(f).reduced.key();
        if (!index.count(key)) {
            index.emplace(key, static_cast<std::uint32_t>(reps.size()));
            reps.push_back(linalg::rref(f).reduced);
        }
    }
    presheaf::EndSetTable z;
    z.n = n;
    z.size = static_cast<std::uint32_t>(reps.size());
    z.act.assign(m, std::vector<std::uint32_t>(z.size));
    for (std::uint64_t k = 0; k < m; ++k) {
        FpMatrix fk = FpMatrix::from_index(n, n, k);
        for (std::uint32_t zz = 0; zz < z.size; ++zz) {
            FpMatrix rep(n, n);
            for (std::uint32_t r = 0; r < reps[zz].rows(); ++r)
                rep.set_row(r, reps[zz].row_vec(r));
            z.act[k][zz] = index.at(linalg::rref(rep.mul(fk)).reduced.key());
        }
    }
    return z;
}

presheaf::EndSetTable pointed_gr_table(std::uint32_t n) {
    presheaf::EndSetTable z;
    z.n = n;
    z.size = 2;
    std::uint64_t m = linalg::hom_count(n, n);
    z.act.assign(m, std::vector<std::uint32_t>(2));
    for (std::uint64_t k = 0; k < m; ++k) {
        z.act[k][0] = 0;
        z.act[k][1] = (linalg::rank(FpMatrix::from_index(n, n, k)) == n) ? 1 : 0;
    }
    return z;
}

} // namespace

TEST_CASE("catalog sizes") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    CHECK(g2.sizes() == std::vector<std::uint32_t>{1, 1, 2, 8, 36});
    presheaf::SetPresheaf gle2 = presheaf::gr_le(s, 2);
    CHECK(gle2.sizes() == std::vector<std::uint32_t>{1, 2, 5, 15, 51});
    presheaf::SetPresheaf h1 = presheaf::homset(s, 1);
    CHECK(h1.sizes() == std::vector<std::uint32_t>{1, 2, 4, 8, 16});
}

TEST_CASE("validation") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    CHECK(presheaf::validate(g2).ok);
    CHECK(presheaf::validate(presheaf::empty_presheaf(s)).ok);
    CHECK(presheaf::validate(presheaf::one_point(s)).ok);

    // plant a fault in one generator action
    std::vector<presheaf::ActTable> acts;
    for (std::uint32_t id = 0; id < s->generators().size(); ++id)
        acts.push_back(g2.gen_action(id));
    bool corrupted = false;
    for (std::uint32_t id = 0; id < acts.size() && !corrupted; ++id) {
        const auto& gen = s->gen(id);
        if (gen.src == 3 && gen.dst == 3 && acts[id].size() > 2) {
            std::swap(acts[id][0], acts[id][1]);
            corrupted = true;
        }
    }
    REQUIRE(corrupted);
    presheaf::SetPresheaf bad(s, "bad", g2.sizes(), acts);
    auto rep = presheaf::validate(bad);
    CHECK(!rep.ok);
    CHECK(!rep.witness.empty());
}

TEST_CASE("product, coproduct, wedge") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    presheaf::SetPresheaf prod = presheaf::product(g2, g2);
    CHECK(prod.size(3) == 64);
    CHECK(presheaf::validate(prod).ok);

    presheaf::SetPresheaf cop = presheaf::coproduct(g2, g2);
    for (int d = 0; d <= 4; ++d) CHECK(cop.size(d) == 2 * g2.size(d));
    CHECK(presheaf::validate(cop).ok);

    presheaf::SetPresheaf w = presheaf::wedge(g2, g2);
    CHECK(w.size(3) == 15); // 8 + 8 - 1
    CHECK(presheaf::validate(w).ok);

    CHECK_THROWS_AS(presheaf::wedge(cop, g2), UsageError);
}

TEST_CASE("components") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    auto comps = presheaf::components(g2);
    CHECK(comps.size() == 1);

    presheaf::SetPresheaf cop = presheaf::coproduct(g2, presheaf::one_point(s));
    auto comps2 = presheaf::components(cop);
    REQUIRE(comps2.size() == 2);
    for (int d = 0; d <= 4; ++d) {
        CHECK(comps2[0].fibers[d].size() == g2.size(d));
        CHECK(comps2[1].fibers[d].size() == 1);
        CHECK(comps2[0].fibers[d].size() + comps2[1].fibers[d].size() == cop.size(d));
    }
    presheaf::SetPresheaf first = presheaf::component_presheaf(cop, comps2[0]);
    CHECK(first.sizes() == g2.sizes());
    CHECK(presheaf::validate(first).ok);

    // a linear functor viewed as sets is connected when constant-free
    presheaf::SetPresheaf l2 = lin::sets_of(lin::ext_power(s, 2));
    CHECK(presheaf::components(l2).size() == 1);
}

TEST_CASE("rank filtration of exterior square sets") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf x = lin::sets_of(lin::ext_power(s, 2));
    CHECK(x.sizes() == std::vector<std::uint32_t>{1, 1, 2, 8, 64});
    presheaf::RankFiltration f = presheaf::rank_filtration(x);
    CHECK(f.regular[0].size() == 1);
    CHECK(f.regular[1].size() == 0);
    CHECK(f.regular[2].size() == 1);
    CHECK(f.regular[3].size() == 0);
    CHECK(f.regular[4].size() == 28);
    CHECK(!f.bounded_rank().has_value());

    auto c = presheaf::subquotient_count_check(x, f, 2, 4);
    CHECK(c.ok);
    CHECK(c.new_elements == 35);
    CHECK(c.predicted == 35);
    auto c2 = presheaf::subquotient_count_check(x, f, 4, 2); // n > dim V
    CHECK(c2.ok);
    CHECK(c2.new_elements == 0);
    CHECK(presheaf::regular_sets_aut_stable(x, f));
}

TEST_CASE("rank filtration of catalog presheaves") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    presheaf::RankFiltration f = presheaf::rank_filtration(g2);
    CHECK(f.bounded_rank() == 2);
    auto c = presheaf::subquotient_count_check(g2, f, 2, 3);
    CHECK(c.ok);
    CHECK(c.predicted == 7); // 1 * [3 choose 1]_2

    // the constant presheaf is exhausted at rank 0
    presheaf::SetPresheaf pt = presheaf::one_point(s);
    presheaf::RankFiltration fp_ = presheaf::rank_filtration(pt);
    CHECK(fp_.bounded_rank() == 0);
    for (int n = 1; n <= 4; ++n) CHECK(fp_.regular[n].empty());

    presheaf::SetPresheaf gle2 = presheaf::gr_le(s, 2);
    presheaf::RankFiltration fg = presheaf::rank_filtration(gle2);
    // |X_reg(n)| matches the orbit counts of GL_2 \ hom(F^n, F^2)
    CHECK(fg.regular[0].size() == 1);
    CHECK(fg.regular[1].size() == 1);
    CHECK(fg.regular[2].size() == 1);
    CHECK(fg.regular[3].empty());
    CHECK(fg.regular[4].empty());
    for (std::uint32_t n = 0; n <= 4; ++n)
        for (std::uint32_t v = 0; v <= 4; ++v)
            CHECK(presheaf::subquotient_count_check(gle2, fg, n, v).ok);
}

TEST_CASE("induced presheaf from the regular action") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::EndSetTable z = regular_end_table(2);
    CHECK(z.validate().empty());
    presheaf::SetPresheaf xz = presheaf::induced(s, z);
    presheaf::SetPresheaf h2 = presheaf::homset(s, 2);
    CHECK(xz.sizes() == h2.sizes()); // free orbit: X_Z = hom(-, F^2)
    CHECK(presheaf::validate(xz).ok);
}

TEST_CASE("induced presheaf from the orbit table is gr_le") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::EndSetTable z = orbit_end_table(2);
    CHECK(z.size == 5);
    CHECK(z.validate().empty());
    presheaf::SetPresheaf xz = presheaf::induced(s, z);
    CHECK(xz.sizes() == std::vector<std::uint32_t>{1, 2, 5, 15, 51});
    CHECK(presheaf::validate(xz).ok);
    // subspace-count oracle: |X_Z(F^t)| = sum_k [t choose k]_2, k <= 2
    for (std::uint32_t t = 0; t <= 4; ++t) {
        std::uint64_t total = 0;
        for (std::uint32_t k = 0; k <= 2 && k <= t; ++k)
            total += linalg::gaussian_binomial(t, k);
        CHECK(xz.size(t) == total);
    }
}

TEST_CASE("induced presheaf from the pointed table is gr") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::EndSetTable z = pointed_gr_table(2);
    CHECK(z.validate().empty());
    presheaf::SetPresheaf xz = presheaf::induced(s, z);
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    CHECK(xz.sizes() == g2.sizes());
    CHECK(presheaf::validate(xz).ok);

    // full-monoid cross-check: redo the quotient with every endomorphism as a
    // relation generator and compare section counts
    std::uint64_t m = linalg::hom_count(2, 2);
    for (std::uint32_t d = 0; d <= 4; ++d) {
        std::uint64_t h = linalg::hom_count(d, 2);
        std::vector<std::uint32_t> parent(z.size * h);
        std::iota(parent.begin(), parent.end(), 0u);
        std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t i) {
            while (parent[i] != i) {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            return i;
        };
        auto unite = [&](std::uint32_t a, std::uint32_t b) {
            a = find(a);
            b = find(b);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        };
        for (std::uint64_t k = 0; k < m; ++k) {
            FpMatrix f = FpMatrix::from_index(2, 2, k);
            for (std::uint64_t g = 0; g < h; ++g) {
                std::uint64_t fg = f.mul(FpMatrix::from_index(d, 2, g)).to_index();
                for (std::uint32_t zz = 0; zz < z.size; ++zz)
                    unite(static_cast<std::uint32_t>(z.act[k][zz] * h + g),
                          static_cast<std::uint32_t>(zz * h + fg));
            }
        }
        std::set<std::uint32_t> roots;
        for (std::uint32_t i = 0; i < parent.size(); ++i) roots.insert(find(i));
        CHECK(roots.size() == xz.size(d));
    }
}

TEST_CASE("EndSetTable file format") {
    fp::PrimeScope p2(2);
    presheaf::EndSetTable z = pointed_gr_table(2);
    std::string text = z.serialize();
    CHECK(text.substr(0, 11) == "n=2 size=2\n");
    CHECK(text.back() == '\n');
    presheaf::EndSetTable back = presheaf::EndSetTable::parse(text);
    CHECK(back.n == z.n);
    CHECK(back.size == z.size);
    CHECK(back.act == z.act);

    std::string path = "endset_test_tmp.txt";
    z.save(path);
    presheaf::EndSetTable loaded = presheaf::EndSetTable::load(path);
    CHECK(loaded.act == z.act);
    std::remove(path.c_str());

    // corrupt the identity action: validation must fail
    presheaf::EndSetTable badz = z;
    std::uint64_t id_idx = FpMatrix::identity(2).to_index();
    badz.act[id_idx][1] = 0;
    CHECK(!badz.validate().empty());

    CHECK_THROWS_AS(presheaf::EndSetTable::parse("garbage"), UsageError);
}

TEST_CASE("mono test") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    presheaf::SetPresheaf pt = presheaf::one_point(s);

    // identity is a monomorphism
    presheaf::PresheafMorphism idm;
    idm.src = &g2;
    idm.tgt = &g2;
    idm.comp.resize(5);
    for (int d = 0; d <= 4; ++d) {
        idm.comp[d].resize(g2.size(d));
        std::iota(idm.comp[d].begin(), idm.comp[d].end(), 0u);
    }
    CHECK(presheaf::mono_test(idm).mono);

    // the collapse to a point is not
    presheaf::PresheafMorphism collapse;
    collapse.src = &g2;
    collapse.tgt = &pt;
    collapse.comp.assign(5, {});
    for (int d = 0; d <= 4; ++d) collapse.comp[d].assign(g2.size(d), 0);
    auto res = presheaf::mono_test(collapse);
    CHECK(!res.mono);
    CHECK(res.detail.find("2") != std::string::npos); // witnessed at dimension 2

    // a non-natural family is rejected
    presheaf::PresheafMorphism badnat = idm;
    badnat.comp[2] = {1, 0};
    CHECK_THROWS_AS(presheaf::mono_test(badnat), NaturalityViolation);
}

TEST_CASE("act table memoization is consistent") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    FpMatrix f = FpMatrix::from_index(3, 2, 37);
    const auto& t1 = g2.act(f);
    const auto& t2 = g2.act(f);
    CHECK(&t1 == &t2);
    // exported cache re-imports cleanly into a fresh object
    presheaf::SetPresheaf g2b = presheaf::gr(s, 2);
    g2b.import_act_cache(g2.export_act_cache());
    CHECK(g2b.act(f) == t1);
}
