#pragma once

#include "fpresheaf/linfun.hpp"

namespace fpre::growth {

struct Cardinality {
    bool p_power = false;       // |X(F^t)| is exactly p^exponent
    std::uint32_t exponent = 0; // valid when p_power
    bool value_fits = true;     // raw value fits in 64 bits
    std::uint64_t value = 0;    // valid when value_fits
    double log_p = 0.0;
};

struct GrowthProfile {
    std::vector<Cardinality> points; // t = 0..window
    bool all_p_power() const;
    std::vector<double> log_values() const;
};

GrowthProfile profile(const presheaf::SetPresheaf& x);
GrowthProfile profile(const lin::LinFunctor& f);
GrowthProfile profile_from_p_exponents(const std::vector<std::uint32_t>& exps);
GrowthProfile profile_from_cardinalities(const std::vector<std::uint64_t>& cards);

enum class FitKind { ExactDegree, ConsistentWithDegree, NonPolynomialOnWindow };

struct DegreeFit {
    FitKind kind = FitKind::NonPolynomialOnWindow;
    int degree = -1; // valid unless NonPolynomialOnWindow
};

// Exact finite differences when every cardinality is a p-power; otherwise a
// least-squares reconstruction (tolerance 1e-9), falling back to the monotone
// surrogate test Delta^{d+1}(gamma) <= 0, whose verdict is only
// "consistent with degree d".
DegreeFit degree_fit(const GrowthProfile& g);

std::string fit_to_string(const DegreeFit& f);

// decimal expansion of the cardinality (handles p^k beyond 64 bits)
std::string cardinality_string(const Cardinality& c);
std::string log_string(double log_p);

// CSV block: header "t,cardinality,log_p", LF line endings.
std::string to_csv(const GrowthProfile& g);

} // namespace fpre::growth
