#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "fpresheaf/linalg.hpp"

namespace fpre::site {

enum class GenKind : std::uint8_t { Transvection, Dilation, Inclusion, Projection };

struct Generator {
    FpMatrix mat;
    std::uint32_t src = 0; // domain dimension a (mat is src -> dst, i.e. dst x src)
    std::uint32_t dst = 0;
    GenKind kind = GenKind::Transvection;
    std::string label;
};

using Word = std::vector<std::uint32_t>; // generator ids in composition order: f = w[0] o w[1] o ... o w[back]

// f = tau o incl o proj o sigma, with sigma in GL_a, tau in GL_b, proj the
// standard projection word F^a -> F^r and incl the standard inclusion F^r -> F^b.
struct CanonicalFactorization {
    std::uint32_t rank = 0;
    Word tau, incl, proj, sigma;
    Word flat() const;
};

struct Schedule {
    int exhaustive_dim = 3;
    int samples = 256;
    std::uint64_t seed = 0;
};

// The category of F_p^d for 0 <= d <= window with all linear maps, presented by
// GL generators plus standard inclusions and projections between adjacent levels.
class TruncatedSite {
public:
    explicit TruncatedSite(int window);

    int window() const { return window_; }
    unsigned prime() const { return p_; }
    const std::vector<Generator>& generators() const { return gens_; }
    const Generator& gen(std::uint32_t id) const { return gens_[id]; }

    // Generator lookup by matrix; -1 when the matrix is not a generator.
    int generator_id(const FpMatrix& m) const;

    std::uint32_t iota_id(std::uint32_t d) const;  // F^d -> F^{d+1}
    std::uint32_t pi_id(std::uint32_t d) const;    // F^{d+1} -> F^d

    CanonicalFactorization factor(const FpMatrix& f) const;
    FpMatrix recompose(const Word& w, std::uint32_t a, std::uint32_t b) const;

    // Word for an invertible matrix in the GL generators of its dimension.
    Word gl_word(const FpMatrix& m) const;

    // Composable pairs (f: F^b -> F^c, g: F^a -> F^b) for the functoriality
    // schedule: exhaustive up to schedule.exhaustive_dim, seeded samples above.
    // The visitor returns false to stop early.
    void for_each_functoriality_pair(const Schedule& s,
                                     const std::function<bool(const FpMatrix&, const FpMatrix&)>& fn) const;

    Schedule default_schedule(std::uint64_t seed = 0) const;

    // Persisted factorization cache support (see cachefile.hpp).
    std::vector<std::pair<std::string, CanonicalFactorization>> export_factor_cache() const;
    void import_factor_cache(
        const std::vector<std::pair<std::string, CanonicalFactorization>>& entries) const;

private:
    int window_;
    unsigned p_;
    std::vector<Generator> gens_;
    std::unordered_map<std::string, std::uint32_t> by_key_;
    std::vector<std::uint32_t> iota_ids_, pi_ids_;

    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, CanonicalFactorization> factor_cache_;

    CanonicalFactorization factor_uncached(const FpMatrix& f) const;
};

std::shared_ptr<const TruncatedSite> make_site(int window);

} // namespace fpre::site
