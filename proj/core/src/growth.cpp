#include "fpresheaf/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fpre::growth {

bool GrowthProfile::all_p_power() const {
    for (const auto& c : points)
        if (!c.p_power) return false;
    return true;
}

std::vector<double> GrowthProfile::log_values() const {
    std::vector<double> out;
    for (const auto& c : points) out.push_back(c.log_p);
    return out;
}

namespace {

Cardinality from_value(std::uint64_t v) {
    Cardinality c;
    c.value = v;
    c.value_fits = true;
    unsigned p = fp::prime();
    std::uint64_t x = v;
    std::uint32_t e = 0;
    while (x > 1 && x % p == 0) {
        x /= p;
        ++e;
    }
    c.p_power = (x == 1 && v >= 1);
    c.exponent = c.p_power ? e : 0;
    c.log_p = v ? std::log(static_cast<double>(v)) / std::log(static_cast<double>(p)) : 0.0;
    if (c.p_power) c.log_p = static_cast<double>(e);
    return c;
}

Cardinality from_exponent(std::uint32_t e) {
    Cardinality c;
    c.p_power = true;
    c.exponent = e;
    c.log_p = static_cast<double>(e);
    unsigned p = fp::prime();
    if (e < 62) {
        c.value = fp::pow_u64(p, e);
        c.value_fits = true;
    } else {
        c.value_fits = false;
    }
    return c;
}

} // namespace

GrowthProfile profile(const presheaf::SetPresheaf& x) {
    GrowthProfile g;
    for (int d = 0; d <= x.window(); ++d)
        g.points.push_back(from_value(x.size(d)));
    return g;
}

GrowthProfile profile(const lin::LinFunctor& f) {
    GrowthProfile g;
    for (int d = 0; d <= f.window(); ++d)
        g.points.push_back(from_exponent(f.dim(d)));
    return g;
}

GrowthProfile profile_from_p_exponents(const std::vector<std::uint32_t>& exps) {
    GrowthProfile g;
    for (auto e : exps) g.points.push_back(from_exponent(e));
    return g;
}

GrowthProfile profile_from_cardinalities(const std::vector<std::uint64_t>& cards) {
    GrowthProfile g;
    for (auto v : cards) g.points.push_back(from_value(v));
    return g;
}

namespace {

// least-squares polynomial fit of the given degree; max absolute residual
double lsq_residual(const std::vector<double>& y, int degree) {
    int n = static_cast<int>(y.size());
    int m = degree + 1;
    // normal equations with long double Vandermonde
    std::vector<long double> a(static_cast<std::size_t>(m) * m, 0.0L), b(m, 0.0L);
    for (int t = 0; t < n; ++t) {
        long double powt[8] = {1.0L};
        for (int i = 1; i < m; ++i) powt[i] = powt[i - 1] * t;
        for (int i = 0; i < m; ++i) {
            b[i] += powt[i] * y[t];
            for (int j = 0; j < m; ++j) a[i * m + j] += powt[i] * powt[j];
        }
    }
    // gaussian elimination with partial pivoting
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::fabs(static_cast<double>(a[r * m + c])) >
                std::fabs(static_cast<double>(a[piv * m + c])))
                piv = r;
        if (piv != c) {
            for (int j = 0; j < m; ++j) std::swap(a[c * m + j], a[piv * m + j]);
            std::swap(b[c], b[piv]);
        }
        if (a[c * m + c] == 0.0L) return 1e100;
        for (int r = c + 1; r < m; ++r) {
            long double f = a[r * m + c] / a[c * m + c];
            for (int j = c; j < m; ++j) a[r * m + j] -= f * a[c * m + j];
            b[r] -= f * b[c];
        }
    }
    std::vector<long double> coef(m);
    for (int r = m - 1; r >= 0; --r) {
        long double s = b[r];
        for (int j = r + 1; j < m; ++j) s -= a[r * m + j] * coef[j];
        coef[r] = s / a[r * m + r];
    }
    double worst = 0.0;
    for (int t = 0; t < n; ++t) {
        long double v = 0.0L, powt = 1.0L;
        for (int i = 0; i < m; ++i) {
            v += coef[i] * powt;
            powt *= t;
        }
        worst = std::max(worst, std::fabs(static_cast<double>(v - y[t])));
    }
    return worst;
}

} // namespace

DegreeFit degree_fit(const GrowthProfile& g) {
    int n = static_cast<int>(g.points.size());
    int max_deg = n - 2; // window length >= degree + 2
    DegreeFit out;
    if (n < 2) return out;
    if (g.all_p_power()) {
        std::vector<long long> v;
        for (const auto& c : g.points) v.push_back(static_cast<long long>(c.exponent));
        for (int d = 0; d <= max_deg; ++d) {
            std::vector<long long> diff = v;
            for (int k = 0; k <= d; ++k) {
                std::vector<long long> nx;
                for (std::size_t i = 0; i + 1 < diff.size(); ++i) nx.push_back(diff[i + 1] - diff[i]);
                diff = std::move(nx);
            }
            bool zero = std::all_of(diff.begin(), diff.end(), [](long long x) { return x == 0; });
            if (zero) {
                out.kind = FitKind::ExactDegree;
                out.degree = d;
                return out;
            }
        }
        return out;
    }
    std::vector<double> y = g.log_values();
    for (int d = 0; d <= max_deg; ++d) {
        if (lsq_residual(y, d) <= 1e-9) {
            out.kind = FitKind::ExactDegree;
            out.degree = d;
            return out;
        }
    }
    // monotone surrogate: gamma dominated by its own degree-d interpolant when
    // all (d+1)-st differences are non-positive
    for (int d = 0; d <= max_deg; ++d) {
        std::vector<double> diff = y;
        for (int k = 0; k <= d; ++k) {
            std::vector<double> nx;
            for (std::size_t i = 0; i + 1 < diff.size(); ++i) nx.push_back(diff[i + 1] - diff[i]);
            diff = std::move(nx);
        }
        bool nonpos = std::all_of(diff.begin(), diff.end(), [](double x) { return x <= 1e-9; });
        if (nonpos) {
            out.kind = FitKind::ConsistentWithDegree;
            out.degree = d;
            return out;
        }
    }
    return out;
}

std::string fit_to_string(const DegreeFit& f) {
    switch (f.kind) {
        case FitKind::ExactDegree: return "degree " + std::to_string(f.degree);
        case FitKind::ConsistentWithDegree:
            return "consistent-with-degree-" + std::to_string(f.degree);
        default: return "NonPolynomialOnWindow";
    }
}

std::string cardinality_string(const Cardinality& c) {
    if (c.value_fits) return std::to_string(c.value);
    // decimal expansion of p^exponent
    std::vector<std::uint32_t> digits{1};
    unsigned p = fp::prime();
    for (std::uint32_t i = 0; i < c.exponent; ++i) {
        std::uint32_t carry = 0;
        for (auto& d : digits) {
            std::uint32_t v = d * p + carry;
            d = v % 10;
            carry = v / 10;
        }
        while (carry) {
            digits.push_back(carry % 10);
            carry /= 10;
        }
    }
    std::string s;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it)
        s.push_back(static_cast<char>('0' + *it));
    return s;
}

std::string log_string(double log_p) {
    double r = std::round(log_p);
    char buf[64];
    if (std::fabs(log_p - r) < 1e-12) {
        std::snprintf(buf, sizeof buf, "%.1f", r);
    } else {
        std::snprintf(buf, sizeof buf, "%.10g", log_p);
    }
    return buf;
}

std::string to_csv(const GrowthProfile& g) {
    std::string out = "t,cardinality,log_p\n";
    for (std::size_t t = 0; t < g.points.size(); ++t) {
        out += std::to_string(t);
        out.push_back(',');
        out += cardinality_string(g.points[t]);
        out.push_back(',');
        out += log_string(g.points[t].log_p);
        out.push_back('\n');
    }
    return out;
}

} // namespace fpre::growth
