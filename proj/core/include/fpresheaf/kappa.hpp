#pragma once

#include "fpresheaf/linfun.hpp"

namespace fpre::kappa {

struct KappaDegree {
    std::uint32_t dim = 0;
    bool window_relative = false; // n exceeds the window: reported, not certified
};

// dim over F_2 of the natural maps X -> S^n, computed as nat_hom(q_n F[X], S^n).
// Requires p = 2.
KappaDegree kappa_degree(const presheaf::SetPresheaf& x, std::uint32_t n,
                         std::uint64_t cap = linalg::kDefaultEnumCap);

struct PoincareSeries {
    std::vector<std::uint32_t> dims; // n = 0..n_max
    std::vector<bool> window_relative;
};

PoincareSeries poincare(const presheaf::SetPresheaf& x, std::uint32_t n_max,
                        std::uint64_t cap = linalg::kDefaultEnumCap);

// Monomial count of the Dickson algebra in weight m; n = 1 (degrees {1}) or
// n = 2 (degrees {2, 3}). Larger n is not certifiable on the window.
std::uint64_t dickson_dim(std::uint32_t n, std::uint32_t m);

std::string poincare_csv(const PoincareSeries& s); // header "n,dim"

} // namespace fpre::kappa
