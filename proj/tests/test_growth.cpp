#include <doctest.h>

#include "fpresheaf/growth.hpp"

using namespace fpre;

namespace {

std::shared_ptr<const site::TruncatedSite> site4() {
    static std::shared_ptr<const site::TruncatedSite> s = [] {
        fp::PrimeScope p2(2);
        return site::make_site(4);
    }();
    return s;
}

} // namespace

TEST_CASE("profiles of catalog objects") {
    fp::PrimeScope p2(2);
    auto s = site4();
    growth::GrowthProfile l2 = growth::profile(lin::ext_power(s, 2));
    CHECK(l2.all_p_power());
    CHECK(l2.log_values() == std::vector<double>{0, 0, 1, 3, 6});

    growth::GrowthProfile g2 = growth::profile(presheaf::gr(s, 2));
    CHECK(!g2.all_p_power()); // 36 is not a power of two
    CHECK(g2.points[3].value == 8);
    CHECK(g2.points[4].value == 36);
    CHECK(growth::log_string(g2.points[4].log_p).substr(0, 6) == "5.1699");

    growth::GrowthProfile pt = growth::profile(presheaf::one_point(s));
    for (auto& c : pt.points) CHECK(c.log_p == 0.0);
}

TEST_CASE("degree fits") {
    fp::PrimeScope p2(2);
    auto s = site4();
    // S^3 dims C(t+2,3): exact degree 3 (needs the full 5-point window)
    growth::DegreeFit f3 = growth::degree_fit(growth::profile(lin::sym_power(s, 3)));
    CHECK(f3.kind == growth::FitKind::ExactDegree);
    CHECK(f3.degree == 3);

    growth::DegreeFit f0 = growth::degree_fit(growth::profile(presheaf::one_point(s)));
    CHECK(f0.kind == growth::FitKind::ExactDegree);
    CHECK(f0.degree == 0);

    // the reduced function-space functor is not polynomial on the window
    growth::DegreeFit fi = growth::degree_fit(growth::profile(lin::ibar(s)));
    CHECK(fi.kind == growth::FitKind::NonPolynomialOnWindow);

    // non-p-power profiles downgrade to consistency verdicts
    growth::DegreeFit fg = growth::degree_fit(growth::profile(presheaf::gr(s, 2)));
    CHECK(fg.kind == growth::FitKind::ConsistentWithDegree);
    CHECK(fg.degree == 2);
    growth::DegreeFit fgle = growth::degree_fit(growth::profile(presheaf::gr_le(s, 2)));
    CHECK(fgle.kind == growth::FitKind::ConsistentWithDegree);
    CHECK(fgle.degree <= 2);
}

TEST_CASE("additivity of gamma") {
    fp::PrimeScope p2(2);
    auto s = site4();
    presheaf::SetPresheaf x = presheaf::gr(s, 2);
    presheaf::SetPresheaf y = presheaf::gr_le(s, 1);
    growth::GrowthProfile px = growth::profile(x);
    growth::GrowthProfile py = growth::profile(y);
    growth::GrowthProfile pprod = growth::profile(presheaf::product(x, y));
    growth::GrowthProfile pcop = growth::profile(presheaf::coproduct(x, y));
    for (int t = 0; t <= 4; ++t) {
        CHECK(pprod.points[t].value == px.points[t].value * py.points[t].value);
        CHECK(pprod.points[t].log_p ==
              doctest::Approx(px.points[t].log_p + py.points[t].log_p).epsilon(1e-12));
        CHECK(pcop.points[t].value == px.points[t].value + py.points[t].value);
    }
}

TEST_CASE("csv emission") {
    fp::PrimeScope p2(2);
    auto s = site4();
    std::string csv = growth::to_csv(growth::profile(presheaf::gr(s, 2)));
    CHECK(csv.substr(0, 20) == "t,cardinality,log_p\n");
    CHECK(csv.find("\n3,8,3.0\n") != std::string::npos);
    CHECK(csv.find("\n4,36,5.169925001") != std::string::npos);
    CHECK(csv.back() == '\n');

    // large p-powers print exactly
    growth::GrowthProfile big = growth::profile_from_p_exponents({64});
    CHECK(growth::cardinality_string(big.points[0]) == "18446744073709551616");
}

TEST_CASE("linear functor growth equals dimension") {
    fp::PrimeScope p2(2);
    auto s = site4();
    lin::LinFunctor f = lin::sym_power(s, 2);
    growth::GrowthProfile pf = growth::profile(f);
    for (int t = 0; t <= 4; ++t) CHECK(pf.points[t].log_p == static_cast<double>(f.dim(t)));
}
