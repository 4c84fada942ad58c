#pragma once

#include <functional>

#include "fpresheaf/growth.hpp"
#include "fpresheaf/linfun.hpp"

namespace fpre::pg {

using GElem = std::vector<std::uint8_t>;

struct GElemHash {
    std::size_t operator()(const GElem& e) const {
        std::size_t h = 1469598103934665603ull;
        for (auto b : e) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Finite group behind an abstract interface; elements are structured tuples,
// never rows of a multiplication table.
class FiniteGroup {
public:
    virtual ~FiniteGroup() = default;

    virtual std::uint64_t order() const = 0;
    virtual GElem identity() const = 0;
    virtual GElem mul(const GElem& a, const GElem& b) const = 0;
    virtual GElem inv(const GElem& a) const = 0;
    virtual std::vector<GElem> generators() const = 0;

    const std::vector<GElem>& elements() const; // canonical order, lazily built
    std::uint32_t index_of(const GElem& e) const;
    bool is_identity(const GElem& e) const { return e == identity(); }
    GElem power(GElem base, std::uint64_t k) const;
    GElem commutator(const GElem& a, const GElem& b) const;

    // group axioms: exhaustive for orders <= 512, seeded samples above
    std::string check_axioms(std::uint64_t seed = 0) const; // empty when fine

protected:
    virtual std::vector<GElem> enumerate() const; // default: closure of the generators

private:
    mutable std::mutex mu_;
    mutable std::vector<GElem> elems_;
    mutable std::unordered_map<GElem, std::uint32_t, GElemHash> index_;
};

// (Z/m_1) x ... x (Z/m_k) with componentwise addition.
class TupleAbelianGroup final : public FiniteGroup {
public:
    explicit TupleAbelianGroup(std::vector<std::uint32_t> moduli);
    std::uint64_t order() const override;
    GElem identity() const override;
    GElem mul(const GElem& a, const GElem& b) const override;
    GElem inv(const GElem& a) const override;
    std::vector<GElem> generators() const override;

protected:
    std::vector<GElem> enumerate() const override;

private:
    std::vector<std::uint32_t> moduli_;
};

// V + V + Lambda^2 V with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a^b'), entries mod p.
class HeisenbergGroup final : public FiniteGroup {
public:
    explicit HeisenbergGroup(std::uint32_t d);
    std::uint64_t order() const override;
    GElem identity() const override;
    GElem mul(const GElem& a, const GElem& b) const override;
    GElem inv(const GElem& a) const override;
    std::vector<GElem> generators() const override;
    std::uint32_t dim() const { return d_; }

protected:
    std::vector<GElem> enumerate() const override;

private:
    std::uint32_t d_;
    std::uint32_t wedge_dim_;
    std::uint32_t wedge_index(std::uint32_t i, std::uint32_t j) const; // i < j
};

// V x S^2 V with (x,u)(y,v) = (x+y, u+v+x.y); levelwise (Z/4)^d x (Z/2)^{C(d,2)}
// at p = 2 (the functorial stand-in for Z/p^2 coefficients).
class WittSymGroup final : public FiniteGroup {
public:
    explicit WittSymGroup(std::uint32_t d);
    std::uint64_t order() const override;
    GElem identity() const override;
    GElem mul(const GElem& a, const GElem& b) const override;
    GElem inv(const GElem& a) const override;
    std::vector<GElem> generators() const override;
    std::uint32_t dim() const { return d_; }
    std::uint32_t sym_dim() const { return sym_dim_; }

protected:
    std::vector<GElem> enumerate() const override;

private:
    std::uint32_t d_;
    std::uint32_t sym_dim_;
    std::uint32_t sym_index(std::uint32_t i, std::uint32_t j) const; // i <= j
};

// subgroup presented by its element set (ops delegate to the parent)
class SubgroupView final : public FiniteGroup {
public:
    SubgroupView(std::shared_ptr<const FiniteGroup> parent, std::vector<GElem> elems);
    std::uint64_t order() const override { return elems_.size(); }
    GElem identity() const override { return parent_->identity(); }
    GElem mul(const GElem& a, const GElem& b) const override { return parent_->mul(a, b); }
    GElem inv(const GElem& a) const override { return parent_->inv(a); }
    std::vector<GElem> generators() const override { return elems_; }

protected:
    std::vector<GElem> enumerate() const override { return elems_; }

private:
    std::shared_ptr<const FiniteGroup> parent_;
    std::vector<GElem> elems_;
};

// quotient by a normal subgroup; elements are minimal coset representatives
class QuotientGroup final : public FiniteGroup {
public:
    QuotientGroup(std::shared_ptr<const FiniteGroup> parent, std::vector<GElem> normal);
    std::uint64_t order() const override;
    GElem identity() const override;
    GElem mul(const GElem& a, const GElem& b) const override;
    GElem inv(const GElem& a) const override;
    std::vector<GElem> generators() const override;
    GElem canonical(const GElem& parent_elem) const;

protected:
    std::vector<GElem> enumerate() const override;

private:
    std::shared_ptr<const FiniteGroup> parent_;
    std::vector<GElem> normal_;
    mutable std::mutex cmu_;
    mutable std::unordered_map<GElem, GElem, GElemHash> canon_;
};

inline constexpr std::uint64_t kSubgroupCap = std::uint64_t{1} << 16;

bool is_p_power_order(const FiniteGroup& g);

// Phi G = [G,G] G^p: normal closure of generator commutators together with all
// p-th powers; throws NotAPGroup when |G| is not a p-power.
std::vector<GElem> frattini_subgroup(const FiniteGroup& g, std::uint64_t cap = kSubgroupCap);

// subgroup generated by a set, closed under conjugation by the parent generators
std::vector<GElem> normal_closure(const FiniteGroup& g, const std::vector<GElem>& seed,
                                  std::uint64_t cap = kSubgroupCap);

// ------------------------------------------------------------------ presheaves of p-groups

using GroupHom = std::function<GElem(const GElem&)>;

class PGroupPresheaf {
public:
    PGroupPresheaf() = default;
    PGroupPresheaf(std::shared_ptr<const site::TruncatedSite> site, std::string name,
                   std::vector<std::shared_ptr<const FiniteGroup>> groups,
                   std::vector<GroupHom> gen_actions);

    const std::shared_ptr<const site::TruncatedSite>& site() const { return site_; }
    const std::string& name() const { return name_; }
    int window() const { return site_->window(); }

    const FiniteGroup& group(std::uint32_t d) const { return *groups_[d]; }
    std::shared_ptr<const FiniteGroup> group_ptr(std::uint32_t d) const { return groups_[d]; }
    GElem apply_gen(std::uint32_t gen_id, const GElem& e) const { return gen_act_[gen_id](e); }
    GElem apply(const FpMatrix& f, GElem e) const; // along the canonical factorization

private:
    std::shared_ptr<const site::TruncatedSite> site_;
    std::string name_;
    std::vector<std::shared_ptr<const FiniteGroup>> groups_;
    std::vector<GroupHom> gen_act_;
};

presheaf::ValidationReport validate(const PGroupPresheaf& g, const site::Schedule& sched);
presheaf::ValidationReport validate(const PGroupPresheaf& g, std::uint64_t seed = 0);

// ------------------------------------------------------------------ catalog

PGroupPresheaf heisenberg(std::shared_ptr<const site::TruncatedSite> site);
PGroupPresheaf elem_abelian(const lin::LinFunctor& f);
// levelwise V x S^2 V cocycle extension, p = 2 only
PGroupPresheaf witt_sym(std::shared_ptr<const site::TruncatedSite> site);

// ------------------------------------------------------------------ Frattini series

struct FrattiniSeries {
    // stages[i][d]: elements of Phi_i G(F^d); stages[0] is the whole group
    std::vector<std::vector<std::vector<GElem>>> stages;
    std::vector<lin::LinFunctor> graded; // Phi_i / Phi_{i+1} re-expressed over F_p
    std::size_t length() const { return graded.size(); }
};

FrattiniSeries p_derived_series(const PGroupPresheaf& g);

struct PFiniteResult {
    bool p_finite = false; // false = NotDetectedInWindow
    lin::LinFunctor total_graded;
    lin::PolyDegreeResult degree;
    growth::DegreeFit gamma_fit;
    std::size_t series_length = 0;
    std::vector<std::optional<int>> piece_degrees;
    std::vector<std::uint32_t> gamma_exponents; // log_p |G(F^t)|
};

PFiniteResult p_finite_test(const PGroupPresheaf& g);

// ------------------------------------------------------------------ group cross-effects

std::vector<GElem> group_cross_effect(const PGroupPresheaf& g,
                                      const std::vector<std::uint32_t>& arg_dims,
                                      std::uint64_t cap = kSubgroupCap);

struct GroupPolyDegree {
    std::optional<int> degree; // nullopt: exceeds the window
    std::vector<std::uint64_t> cr_orders;
};

GroupPolyDegree group_poly_degree(const PGroupPresheaf& g, std::uint64_t cap = kSubgroupCap);

struct GroupMorphismFamily {
    std::vector<GroupHom> maps; // per dimension
};

// verifies cr_n K -> cr_n G -> cr_n Q short exact at every in-window tuple;
// the input sequence is validated dimensionwise first (throws NotExact).
bool cross_effect_exactness_check(const PGroupPresheaf& k, const PGroupPresheaf& g,
                                  const PGroupPresheaf& q, const GroupMorphismFamily& incl,
                                  const GroupMorphismFamily& proj, std::uint32_t n,
                                  std::uint64_t cap = kSubgroupCap);

// ------------------------------------------------------------------ augmentation filtration

struct AugmentationFiltration {
    std::vector<std::uint32_t> power_dims;           // dim I^k, k = 1..
    std::optional<std::uint32_t> nilpotency_index;   // least k with I^k = 0
    std::uint32_t dim_i_mod_i2 = 0;
    std::uint32_t dim_g_mod_frattini = 0;
    bool abelianization_match = false;
};

AugmentationFiltration augmentation_filtration(const FiniteGroup& g, std::uint32_t k_max = 64,
                                               std::uint64_t order_cap = 1024);

// ------------------------------------------------------------------ forgetful functor

presheaf::SetPresheaf underlying_presheaf(const PGroupPresheaf& g,
                                          std::uint64_t cap = linalg::kDefaultEnumCap);

} // namespace fpre::pg
