#pragma once

#include <optional>

#include "fpresheaf/presheaf.hpp"

namespace fpre::lin {

using presheaf::SetPresheaf;
using site::TruncatedSite;

// Contravariant functor to finite-dimensional F_p-vector spaces: a dimension
// per level and one matrix per site generator. For a generator g: F^a -> F^b
// the action matrix has shape dims[a] x dims[b] (it maps F(F^b) -> F(F^a)).
class LinFunctor {
public:
    LinFunctor() = default;
    LinFunctor(std::shared_ptr<const TruncatedSite> site, std::string name,
               std::vector<std::uint32_t> dims, std::vector<FpMatrix> gen_matrices,
               std::vector<std::vector<std::string>> basis_labels = {});

    const std::shared_ptr<const TruncatedSite>& site() const { return site_; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    int window() const { return site_->window(); }

    std::uint32_t dim(std::uint32_t d) const { return dims_[d]; }
    const std::vector<std::uint32_t>& dims() const { return dims_; }

    const FpMatrix& gen_matrix(std::uint32_t gen_id) const { return gen_act_[gen_id]; }
    // memoized action matrix of an arbitrary morphism f: F^a -> F^b
    const FpMatrix& act(const FpMatrix& f) const;
    // apply the action of f to a vector in F(F^b) without materializing the matrix
    FpVec act_vec(const FpMatrix& f, FpVec v) const;

    bool has_labels() const { return !labels_.empty(); }
    std::string basis_label(std::uint32_t d, std::uint32_t i) const;

private:
    std::shared_ptr<const TruncatedSite> site_;
    std::string name_;
    std::vector<std::uint32_t> dims_;
    std::vector<FpMatrix> gen_act_;
    std::vector<std::vector<std::string>> labels_;

    struct CacheBox {
        std::mutex mu;
        std::unordered_map<std::string, FpMatrix> map;
    };
    std::shared_ptr<CacheBox> cache_ = std::make_shared<CacheBox>();
};

presheaf::ValidationReport validate(const LinFunctor& f, const site::Schedule& sched);
presheaf::ValidationReport validate(const LinFunctor& f, std::uint64_t seed = 0);

// ------------------------------------------------------------------ catalog

LinFunctor constant_functor(std::shared_ptr<const TruncatedSite> site, std::uint32_t dim);
LinFunctor sym_power(std::shared_ptr<const TruncatedSite> site, std::uint32_t k);
LinFunctor ext_power(std::shared_ptr<const TruncatedSite> site, std::uint32_t k);
LinFunctor free_hom(std::shared_ptr<const TruncatedSite> site, std::uint32_t n,
                    std::uint64_t cap = linalg::kDefaultEnumCap);
// Constant-free part of V -> F^V (functions to the ground field).
LinFunctor ibar(std::shared_ptr<const TruncatedSite> site, std::uint64_t cap = linalg::kDefaultEnumCap);
LinFunctor direct_sum(const LinFunctor& f, const LinFunctor& g);
LinFunctor tensor(const LinFunctor& f, const LinFunctor& g);

// ------------------------------------------------------------------ linearization

// Free vector space levelwise; the adjunction unit is the basis inclusion.
LinFunctor linearize(const SetPresheaf& x);

// Underlying sets: sections are all vectors of F(F^d) indexed canonically.
SetPresheaf sets_of(const LinFunctor& f, std::uint64_t cap = linalg::kDefaultEnumCap);

// ------------------------------------------------------------------ constant split

struct ConstantSplit {
    LinFunctor constant_part; // constant functor of dimension dim F(0)
    LinFunctor reduced;       // constant-free part
    std::vector<FpMatrix> reduced_inclusion; // level d: dims[d] x reduced.dim(d)
};

ConstantSplit split_constant(const LinFunctor& f);

// ------------------------------------------------------------------ cross-effects

struct CrossEffectSlot {
    std::vector<std::uint32_t> arg_dims;
    std::vector<FpVec> basis; // subspace of F(F^{sum})
};

// cr_k F(F^{d_1}, ..., F^{d_k}) via the kernel of the maps induced by the
// sub-sum inclusions (the projections of the opposite category); arity 1 is
// the constant-free part at F^{d_1}.
CrossEffectSlot cross_effect(const LinFunctor& f, const std::vector<std::uint32_t>& arg_dims);

struct PolyDegreeResult {
    std::optional<int> degree;         // nullopt: exceeds the window
    std::vector<std::uint32_t> cr_dims; // dim cr_k at all-ones slots, k = 1..window
};

PolyDegreeResult poly_degree(const LinFunctor& f);

// ------------------------------------------------------------------ natural transformations

struct NatTransform {
    std::vector<FpMatrix> levels; // level d: target.dim(d) x source.dim(d)
};

// Basis of natural transformations f => g, solved from generator constraints.
std::vector<NatTransform> nat_hom(const LinFunctor& f, const LinFunctor& g);

// Cross-check variant constraining over entire hom-sets (tests only; cap-guarded).
std::vector<NatTransform> nat_hom_fullhom(const LinFunctor& f, const LinFunctor& g,
                                          std::uint64_t cap = linalg::kDefaultEnumCap);

// ------------------------------------------------------------------ polynomial quotients

struct QnResult {
    LinFunctor quotient;
    NatTransform projection; // levelwise surjections F(d) ->> q_n F(d)
    bool partial = false;    // some level needed arguments beyond the window
};

// Universal degree <= n quotient: F(V) / D_{n+1}(V) where D_{n+1}(V) is spanned
// by the images of the (n+1)-st cross-effects at all window-representable
// argument splittings under all maps V -> C_1 + ... + C_{n+1}.
QnResult q_n(const LinFunctor& f, std::uint32_t n, std::uint64_t cap = linalg::kDefaultEnumCap);

// ------------------------------------------------------------------ maps into linear targets

// A natural set map X -> sets(G), stored as per-level image vectors.
struct MapToLinear {
    const SetPresheaf* x = nullptr;
    const LinFunctor* g = nullptr;
    std::vector<std::vector<FpVec>> img; // img[d][i] in G(F^d)
};

void check_natural_linear(const MapToLinear& u); // throws NaturalityViolation

// Monomorphism test against a linear target; bounded criterion when the source
// is rank-bounded in the window, otherwise the regular-section criterion.
presheaf::MonoResult mono_test_linear(const MapToLinear& u);

// ------------------------------------------------------------------ hom sets

// All natural set maps X -> sets(G) (the underlying set of nat_hom(F[X], G)).
std::vector<MapToLinear> set_hom_linear(const SetPresheaf& x, const LinFunctor& g,
                                        std::uint64_t cap = linalg::kDefaultEnumCap);
std::size_t set_hom_linear_count_log(const SetPresheaf& x, const LinFunctor& g);

// Maps into a finite presheaf presented by an embedding into sets(G).
struct EmbeddedTarget {
    const SetPresheaf* y = nullptr;
    const LinFunctor* g = nullptr;
    std::vector<std::vector<FpVec>> emb; // emb[d][y]: injective per level
};

std::vector<std::vector<std::vector<std::uint32_t>>> set_hom_tables(
    const SetPresheaf& x, const EmbeddedTarget& t, std::uint64_t cap = linalg::kDefaultEnumCap);

// |End(X)| via the canonical embedding X into q_n F[X] at the finiteness degree.
std::uint64_t set_end_count(const SetPresheaf& x, std::uint64_t cap = linalg::kDefaultEnumCap);

// ------------------------------------------------------------------ finiteness

struct FinitenessResult {
    std::optional<int> degree; // nullopt: NotDetectedInWindow
    // tower X_0 <- X_1 <- ...: image presheaves of the units X -> q_n F[X]
    std::vector<SetPresheaf> tower;
    std::vector<std::vector<std::vector<std::uint32_t>>> tower_proj; // per n, per d: X index -> X_n index
    std::vector<bool> unit_injective; // per n
    std::vector<bool> partial;        // q_n partial flag per n
};

FinitenessResult finiteness_degree(const SetPresheaf& x, std::uint64_t cap = linalg::kDefaultEnumCap);

// ------------------------------------------------------------------ induced linear functor

struct InducedLinearResult {
    SetPresheaf x_z;
    LinFunctor g_z;
    MapToLinear canonical; // X_Z -> sets(G_Z)
    std::optional<int> minimal_t; // least t with X_Z -> q_t G_Z injective on the window
};

InducedLinearResult induced_linear(std::shared_ptr<const TruncatedSite> site,
                                   const presheaf::EndSetTable& z,
                                   std::uint64_t cap = linalg::kDefaultEnumCap);

// ------------------------------------------------------------------ split-rank counterexample

// The n-th rank subquotient X_{<=n}/X_{<=n-1} as a pointed presheaf.
SetPresheaf rank_subquotient(const SetPresheaf& x, const presheaf::RankFiltration& filt,
                             std::uint32_t n);

// Wedge of all rank subquotients of the underlying sets of a constant-free
// functor: same sections as sets_of(f), very different action.
SetPresheaf splitrank(const LinFunctor& f, std::uint64_t cap = linalg::kDefaultEnumCap);

} // namespace fpre::lin
