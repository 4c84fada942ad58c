#include "fpresheaf/kappa.hpp"

#include "fpresheaf/errors.hpp"

namespace fpre::kappa {

KappaDegree kappa_degree(const presheaf::SetPresheaf& x, std::uint32_t n, std::uint64_t cap) {
    if (fp::prime() != 2)
        throw RequiresP2("the degree-wise realization is implemented at p = 2 only");
    KappaDegree out;
    out.window_relative = static_cast<int>(n) > x.window();
    lin::LinFunctor fx = lin::linearize(x);
    lin::QnResult q = lin::q_n(fx, n, cap);
    lin::LinFunctor sn = (n == 0) ? lin::constant_functor(x.site(), 1)
                                  : lin::sym_power(x.site(), n);
    out.dim = static_cast<std::uint32_t>(lin::nat_hom(q.quotient, sn).size());
    return out;
}

PoincareSeries poincare(const presheaf::SetPresheaf& x, std::uint32_t n_max, std::uint64_t cap) {
    PoincareSeries s;
    for (std::uint32_t n = 0; n <= n_max; ++n) {
        KappaDegree k = kappa_degree(x, n, cap);
        s.dims.push_back(k.dim);
        s.window_relative.push_back(k.window_relative);
    }
    return s;
}

std::uint64_t dickson_dim(std::uint32_t n, std::uint32_t m) {
    if (n == 1) return 1; // polynomial algebra on one degree-1 generator
    if (n == 2) {
        // generators in degrees 2 and 3: count (a, b) >= 0 with 2a + 3b = m
        std::uint64_t count = 0;
        for (std::uint32_t b = 0; 3 * b <= m; ++b)
            if ((m - 3 * b) % 2 == 0) ++count;
        return count;
    }
    throw Unsupported("dickson_dim certified for n in {1, 2} only");
}

std::string poincare_csv(const PoincareSeries& s) {
    std::string out = "n,dim\n";
    for (std::size_t n = 0; n < s.dims.size(); ++n) {
        out += std::to_string(n);
        out.push_back(',');
        out += std::to_string(s.dims[n]);
        out.push_back('\n');
    }
    return out;
}

} // namespace fpre::kappa
