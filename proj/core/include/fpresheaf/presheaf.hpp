#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fpresheaf/site.hpp"

namespace fpre::presheaf {

using site::TruncatedSite;

// Contravariant action table of f: F^a -> F^b, mapping X(F^b) indices to X(F^a) indices.
using ActTable = std::vector<std::uint32_t>;

// Finite-set-valued presheaf on the truncated site. Sections at each dimension
// are indexed 0..size-1; actions are stored for the site generators, arbitrary
// morphism actions are derived through the canonical factorization and memoized.
class SetPresheaf {
public:
    SetPresheaf() = default;
    SetPresheaf(std::shared_ptr<const TruncatedSite> site, std::string name,
                std::vector<std::uint32_t> sizes, std::vector<ActTable> gen_actions,
                std::vector<std::vector<std::string>> labels = {});

    const std::shared_ptr<const TruncatedSite>& site() const { return site_; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    int window() const { return site_->window(); }

    std::uint32_t size(std::uint32_t d) const { return sizes_[d]; }
    const std::vector<std::uint32_t>& sizes() const { return sizes_; }
    bool uniformly_empty() const;

    const ActTable& gen_action(std::uint32_t gen_id) const { return gen_act_[gen_id]; }
    const ActTable& act(const FpMatrix& f) const; // memoized
    std::uint32_t apply(const FpMatrix& f, std::uint32_t x) const { return act(f)[x]; }

    bool has_labels() const { return !labels_.empty(); }
    std::string label(std::uint32_t d, std::uint32_t i) const;

    // persisted memo-cache support (entries are matrix-key -> action table)
    std::vector<std::pair<std::string, ActTable>> export_act_cache() const;
    void import_act_cache(const std::vector<std::pair<std::string, ActTable>>& entries) const;

private:
    std::shared_ptr<const TruncatedSite> site_;
    std::string name_;
    std::vector<std::uint32_t> sizes_;
    std::vector<ActTable> gen_act_;
    std::vector<std::vector<std::string>> labels_;

    struct CacheBox {
        std::mutex mu;
        std::unordered_map<std::string, ActTable> map;
    };
    std::shared_ptr<CacheBox> cache_ = std::make_shared<CacheBox>();
};

// ------------------------------------------------------------------ validation

struct ValidationReport {
    bool ok = true;
    std::string witness; // first violating composable pair, human-readable
};

// Functoriality over the site schedule plus the section-size invariant.
ValidationReport validate(const SetPresheaf& x, const site::Schedule& sched);
ValidationReport validate(const SetPresheaf& x, std::uint64_t seed = 0);

// ------------------------------------------------------------------ constructions

SetPresheaf one_point(std::shared_ptr<const TruncatedSite> site);
SetPresheaf empty_presheaf(std::shared_ptr<const TruncatedSite> site);

// Gr_{<= n}(V) = GL_n \ hom(V, F^n): orbits keyed by the row space of a representative.
SetPresheaf gr_le(std::shared_ptr<const TruncatedSite> site, std::uint32_t n);

// Gr_n(V) = {*} + surjection cosets (codimension-n subspaces); the top rank
// subquotient of Gr_{<= n}.
SetPresheaf gr(std::shared_ptr<const TruncatedSite> site, std::uint32_t n);

// hom(-, F^n) with action by precomposition.
SetPresheaf homset(std::shared_ptr<const TruncatedSite> site, std::uint32_t n,
                   std::uint64_t cap = linalg::kDefaultEnumCap);

SetPresheaf product(const SetPresheaf& x, const SetPresheaf& y);
SetPresheaf coproduct(const SetPresheaf& x, const SetPresheaf& y);
// One-point union inside the product; both factors must be connected.
SetPresheaf wedge(const SetPresheaf& x, const SetPresheaf& y);

// Sub-presheaf on action-closed per-dimension subsets (indices must be closed
// under all generator actions).
SetPresheaf subpresheaf(const SetPresheaf& x, const std::vector<std::vector<std::uint32_t>>& keep,
                        std::string name);

// ------------------------------------------------------------------ components

struct ConnectedComponent {
    std::uint32_t basepoint;                            // index in X(0)
    std::vector<std::vector<std::uint32_t>> fibers;     // per dim, sorted indices
};

std::vector<ConnectedComponent> components(const SetPresheaf& x);
SetPresheaf component_presheaf(const SetPresheaf& x, const ConnectedComponent& c);

// ------------------------------------------------------------------ rank filtration

struct RankFiltration {
    // le[n][d]: sorted indices of X_{<=n}(F^d), n, d in 0..window
    std::vector<std::vector<std::vector<std::uint32_t>>> le;
    // regular[n]: sorted indices of X_reg(n) = X(F^n) \ X_{<=n-1}(F^n)
    std::vector<std::vector<std::uint32_t>> regular;

    // least n with X_reg(k) empty for all k > n within the window, or nullopt
    std::optional<int> bounded_rank() const;
};

RankFiltration rank_filtration(const SetPresheaf& x);

struct CountCheck {
    bool ok;
    std::uint64_t new_elements; // |X_{<=n}(V) \ X_{<=n-1}(V)|
    std::uint64_t predicted;    // |X_reg(n)| * [dim V choose n]_p
};

CountCheck subquotient_count_check(const SetPresheaf& x, const RankFiltration& f,
                                   std::uint32_t n, std::uint32_t v_dim);

// X_reg(n) closed under the right Aut(F^n)-action.
bool regular_sets_aut_stable(const SetPresheaf& x, const RankFiltration& f);

// ------------------------------------------------------------------ induced presheaves

// Finite right End(F^n)-set, stored against the canonical hom order.
struct EndSetTable {
    std::uint32_t n = 0;
    std::uint32_t size = 0;
    std::vector<std::vector<std::uint32_t>> act; // act[k][z] = z . f_k

    std::uint32_t apply(std::uint32_t z, std::uint64_t endo_index) const { return act[endo_index][z]; }

    // Text format: line 1 "n=<int> size=<int>", then p^(n*n) lines of `size`
    // space-separated integers. LF, no trailing blank lines.
    static EndSetTable load(const std::string& path);
    void save(const std::string& path) const;
    std::string serialize() const;
    static EndSetTable parse(const std::string& text);

    // identity/composition law; exhaustive within cap, seeded samples beyond
    std::string validate(std::uint64_t cap = linalg::kDefaultEnumCap, std::uint64_t seed = 0) const;
};

// X_Z(V) = (Z x hom(V, F^n)) / (zf, g) ~ (z, f o g), quotient by union-find
// seeded with the GL generators plus one rank-deficient idempotent.
SetPresheaf induced(std::shared_ptr<const TruncatedSite> site, const EndSetTable& z,
                    std::uint64_t cap = linalg::kDefaultEnumCap);

// Monoid generators of End(F^n) used for the union-find (and their matrices).
std::vector<FpMatrix> end_monoid_generators(const TruncatedSite& site, std::uint32_t n);

// ------------------------------------------------------------------ morphisms

struct PresheafMorphism {
    const SetPresheaf* src = nullptr;
    const SetPresheaf* tgt = nullptr;
    std::vector<std::vector<std::uint32_t>> comp; // per dim: src index -> tgt index
};

// Throws NaturalityViolation with a witness when f does not commute with a generator.
void check_natural(const PresheafMorphism& f);

struct MonoResult {
    bool mono = false;
    std::string detail; // which criterion decided, or the witness
};

// Monomorphism test: single-dimension criterion when the source is rank-bounded
// in the window, regular-set criterion otherwise (window-relative).
MonoResult mono_test(const PresheafMorphism& f);

} // namespace fpre::presheaf
