#include "fpresheaf/pgroup.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "fpresheaf/errors.hpp"

namespace fpre::pg {

// -------------------------------------------------------------- FiniteGroup

const std::vector<GElem>& FiniteGroup::elements() const {
    std::lock_guard<std::mutex> lk(mu_);
    if (elems_.empty()) {
        elems_ = enumerate();
        for (std::uint32_t i = 0; i < elems_.size(); ++i)
            index_.emplace(elems_[i], i);
    }
    return elems_;
}

std::uint32_t FiniteGroup::index_of(const GElem& e) const {
    elements();
    std::lock_guard<std::mutex> lk(mu_);
    auto it = index_.find(e);
    if (it == index_.end()) throw UsageError("element not in group");
    return it->second;
}

GElem FiniteGroup::power(GElem base, std::uint64_t k) const {
    GElem acc = identity();
    while (k) {
        if (k & 1) acc = mul(acc, base);
        base = mul(base, base);
        k >>= 1;
    }
    return acc;
}

GElem FiniteGroup::commutator(const GElem& a, const GElem& b) const {
    return mul(mul(inv(a), inv(b)), mul(a, b));
}

std::vector<GElem> FiniteGroup::enumerate() const {
    // BFS closure of the generators
    std::unordered_map<GElem, bool, GElemHash> seen;
    std::deque<GElem> queue;
    std::vector<GElem> out;
    GElem e = identity();
    seen.emplace(e, true);
    queue.push_back(e);
    out.push_back(e);
    std::vector<GElem> gens = generators();
    while (!queue.empty()) {
        GElem cur = queue.front();
        queue.pop_front();
        for (const GElem& g : gens) {
            GElem nx = mul(cur, g);
            if (seen.emplace(nx, true).second) {
                queue.push_back(nx);
                out.push_back(nx);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string FiniteGroup::check_axioms(std::uint64_t seed) const {
    const std::vector<GElem>& el = elements();
    GElem e = identity();
    for (const GElem& a : el) {
        if (mul(a, e) != a || mul(e, a) != a) return "identity law fails";
        if (!is_identity(mul(a, inv(a)))) return "inverse law fails";
    }
    std::uint64_t n = el.size();
    if (n <= 512) {
        // exhaustive associativity over a multiplication index table
        std::vector<std::uint16_t> table(n * n);
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint64_t j = 0; j < n; ++j)
                table[i * n + j] = static_cast<std::uint16_t>(index_of(mul(el[i], el[j])));
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b) {
                std::uint16_t ab = table[a * n + b];
                for (std::uint64_t c = 0; c < n; ++c)
                    if (table[ab * n + c] != table[a * n + table[b * n + c]])
                        return "associativity fails";
            }
    } else {
        std::mt19937_64 rng(seed ^ 0xabcdef1234567890ull);
        for (int t = 0; t < 4096; ++t) {
            const GElem& a = el[rng() % n];
            const GElem& b = el[rng() % n];
            const GElem& c = el[rng() % n];
            if (mul(mul(a, b), c) != mul(a, mul(b, c))) return "associativity fails (sampled)";
        }
    }
    return {};
}

// -------------------------------------------------------------- TupleAbelianGroup

TupleAbelianGroup::TupleAbelianGroup(std::vector<std::uint32_t> moduli) : moduli_(std::move(moduli)) {
    for (auto m : moduli_)
        if (m == 0 || m > 255) throw UsageError("tuple group modulus must be in 1..255");
}

std::uint64_t TupleAbelianGroup::order() const {
    std::uint64_t n = 1;
    for (auto m : moduli_) n *= m;
    return n;
}

GElem TupleAbelianGroup::identity() const { return GElem(moduli_.size(), 0); }

GElem TupleAbelianGroup::mul(const GElem& a, const GElem& b) const {
    GElem c(moduli_.size());
    for (std::size_t i = 0; i < moduli_.size(); ++i)
        c[i] = static_cast<std::uint8_t>((a[i] + b[i]) % moduli_[i]);
    return c;
}

GElem TupleAbelianGroup::inv(const GElem& a) const {
    GElem c(moduli_.size());
    for (std::size_t i = 0; i < moduli_.size(); ++i)
        c[i] = static_cast<std::uint8_t>((moduli_[i] - a[i]) % moduli_[i]);
    return c;
}

std::vector<GElem> TupleAbelianGroup::generators() const {
    std::vector<GElem> out;
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
        if (moduli_[i] == 1) continue;
        GElem g(moduli_.size(), 0);
        g[i] = 1;
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GElem> TupleAbelianGroup::enumerate() const {
    std::vector<GElem> out;
    out.reserve(order());
    GElem cur(moduli_.size(), 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = 0;
        while (i < moduli_.size()) {
            if (++cur[i] < moduli_[i]) break;
            cur[i] = 0;
            ++i;
        }
        if (i == moduli_.size()) break;
        if (moduli_.empty()) break;
    }
    if (moduli_.empty()) out.assign(1, GElem{});
    std::sort(out.begin(), out.end());
    return out;
}

// -------------------------------------------------------------- HeisenbergGroup

HeisenbergGroup::HeisenbergGroup(std::uint32_t d) : d_(d), wedge_dim_(d * (d - 1) / 2) {
    if (d == 0) wedge_dim_ = 0;
}

std::uint32_t HeisenbergGroup::wedge_index(std::uint32_t i, std::uint32_t j) const {
    // lex position of (i, j), i < j, among the 2-combinations of 0..d-1
    return i * d_ - i * (i + 1) / 2 + (j - i - 1);
}

std::uint64_t HeisenbergGroup::order() const {
    return fp::pow_u64(fp::prime(), 2 * d_ + wedge_dim_);
}

GElem HeisenbergGroup::identity() const { return GElem(2 * d_ + wedge_dim_, 0); }

GElem HeisenbergGroup::mul(const GElem& a, const GElem& b) const {
    unsigned p = fp::prime();
    GElem c(2 * d_ + wedge_dim_);
    for (std::uint32_t i = 0; i < 2 * d_; ++i)
        c[i] = static_cast<std::uint8_t>((a[i] + b[i]) % p);
    for (std::uint32_t i = 0; i < wedge_dim_; ++i)
        c[2 * d_ + i] = static_cast<std::uint8_t>((a[2 * d_ + i] + b[2 * d_ + i]) % p);
    // cocycle term a_x ^ b_y
    for (std::uint32_t i = 0; i < d_; ++i)
        for (std::uint32_t j = i + 1; j < d_; ++j) {
            unsigned term = (a[i] * b[d_ + j]) % p;
            term = (term + p * p - (a[j] * b[d_ + i]) % p) % p;
            std::uint32_t w = 2 * d_ + wedge_index(i, j);
            c[w] = static_cast<std::uint8_t>((c[w] + term) % p);
        }
    return c;
}

GElem HeisenbergGroup::inv(const GElem& a) const {
    unsigned p = fp::prime();
    GElem c(2 * d_ + wedge_dim_);
    for (std::uint32_t i = 0; i < 2 * d_ + wedge_dim_; ++i)
        c[i] = static_cast<std::uint8_t>((p - a[i]) % p);
    // (-x, -y, -c + x^y): correct the cocycle
    for (std::uint32_t i = 0; i < d_; ++i)
        for (std::uint32_t j = i + 1; j < d_; ++j) {
            unsigned term = (a[i] * a[d_ + j]) % p;
            term = (term + p * p - (a[j] * a[d_ + i]) % p) % p;
            std::uint32_t w = 2 * d_ + wedge_index(i, j);
            c[w] = static_cast<std::uint8_t>((c[w] + term) % p);
        }
    return c;
}

std::vector<GElem> HeisenbergGroup::generators() const {
    std::vector<GElem> out;
    for (std::uint32_t i = 0; i < 2 * d_; ++i) {
        GElem g(2 * d_ + wedge_dim_, 0);
        g[i] = 1;
        out.push_back(std::move(g));
    }
    if (d_ == 0) out.push_back(identity());
    return out;
}

std::vector<GElem> HeisenbergGroup::enumerate() const {
    unsigned p = fp::prime();
    std::size_t len = 2 * d_ + wedge_dim_;
    std::vector<GElem> out;
    out.reserve(order());
    GElem cur(len, 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = 0;
        while (i < len) {
            if (++cur[i] < p) break;
            cur[i] = 0;
            ++i;
        }
        if (i == len) break;
        if (len == 0) break;
    }
    if (len == 0) out.assign(1, GElem{});
    std::sort(out.begin(), out.end());
    return out;
}

// -------------------------------------------------------------- WittSymGroup

WittSymGroup::WittSymGroup(std::uint32_t d) : d_(d), sym_dim_(d * (d + 1) / 2) {
    if (fp::prime() != 2) throw Unsupported("the V x S^2 V cocycle extension needs p = 2");
}

std::uint32_t WittSymGroup::sym_index(std::uint32_t i, std::uint32_t j) const {
    // lex position of (i, j), i <= j, among weakly increasing pairs over 0..d-1
    return i * d_ - i * (i - 1) / 2 + (j - i);
}

std::uint64_t WittSymGroup::order() const { return fp::pow_u64(2, d_ + sym_dim_); }

GElem WittSymGroup::identity() const { return GElem(d_ + sym_dim_, 0); }

GElem WittSymGroup::mul(const GElem& a, const GElem& b) const {
    GElem c(d_ + sym_dim_);
    for (std::uint32_t i = 0; i < d_ + sym_dim_; ++i)
        c[i] = a[i] ^ b[i];
    for (std::uint32_t i = 0; i < d_; ++i)
        for (std::uint32_t j = i; j < d_; ++j) {
            unsigned term = (i == j) ? (a[i] & b[i]) : ((a[i] & b[j]) ^ (a[j] & b[i]));
            c[d_ + sym_index(i, j)] ^= static_cast<std::uint8_t>(term);
        }
    return c;
}

GElem WittSymGroup::inv(const GElem& a) const {
    // (x, u)^{-1} = (x, u + x.x)
    GElem c = a;
    for (std::uint32_t i = 0; i < d_; ++i)
        c[d_ + sym_index(i, i)] ^= a[i];
    return c;
}

std::vector<GElem> WittSymGroup::generators() const {
    std::vector<GElem> out;
    for (std::uint32_t i = 0; i < d_ + sym_dim_; ++i) {
        GElem g(d_ + sym_dim_, 0);
        g[i] = 1;
        out.push_back(std::move(g));
    }
    if (out.empty()) out.push_back(identity());
    return out;
}

std::vector<GElem> WittSymGroup::enumerate() const {
    std::size_t len = d_ + sym_dim_;
    std::vector<GElem> out;
    out.reserve(order());
    GElem cur(len, 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = 0;
        while (i < len) {
            if (++cur[i] < 2) break;
            cur[i] = 0;
            ++i;
        }
        if (i == len) break;
        if (len == 0) break;
    }
    if (len == 0) out.assign(1, GElem{});
    std::sort(out.begin(), out.end());
    return out;
}

// -------------------------------------------------------------- views and quotients

SubgroupView::SubgroupView(std::shared_ptr<const FiniteGroup> parent, std::vector<GElem> elems)
    : parent_(std::move(parent)), elems_(std::move(elems)) {
    std::sort(elems_.begin(), elems_.end());
}

QuotientGroup::QuotientGroup(std::shared_ptr<const FiniteGroup> parent, std::vector<GElem> normal)
    : parent_(std::move(parent)), normal_(std::move(normal)) {
    if (normal_.empty()) normal_.push_back(parent_->identity());
}

GElem QuotientGroup::canonical(const GElem& e) const {
    {
        std::lock_guard<std::mutex> lk(cmu_);
        auto it = canon_.find(e);
        if (it != canon_.end()) return it->second;
    }
    GElem best = e;
    for (const GElem& n : normal_) {
        GElem c = parent_->mul(e, n);
        if (c < best) best = c;
    }
    std::lock_guard<std::mutex> lk(cmu_);
    canon_.emplace(e, best);
    return best;
}

std::uint64_t QuotientGroup::order() const { return parent_->order() / normal_.size(); }

GElem QuotientGroup::identity() const { return canonical(parent_->identity()); }

GElem QuotientGroup::mul(const GElem& a, const GElem& b) const {
    return canonical(parent_->mul(a, b));
}

GElem QuotientGroup::inv(const GElem& a) const { return canonical(parent_->inv(a)); }

std::vector<GElem> QuotientGroup::generators() const {
    std::vector<GElem> out;
    for (const GElem& g : parent_->generators()) out.push_back(canonical(g));
    return out;
}

std::vector<GElem> QuotientGroup::enumerate() const {
    std::vector<GElem> out;
    std::unordered_map<GElem, bool, GElemHash> seen;
    for (const GElem& e : parent_->elements()) {
        GElem c = canonical(e);
        if (seen.emplace(c, true).second) out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// -------------------------------------------------------------- subgroup machinery

bool is_p_power_order(const FiniteGroup& g) {
    std::uint64_t n = g.order();
    unsigned p = fp::prime();
    while (n > 1 && n % p == 0) n /= p;
    return n == 1;
}

std::vector<GElem> normal_closure(const FiniteGroup& g, const std::vector<GElem>& seed,
                                  std::uint64_t cap) {
    std::vector<GElem> gens = g.generators();
    // step 1: close the seed under conjugation by the group generators
    std::vector<GElem> conj_closed;
    {
        std::unordered_map<GElem, bool, GElemHash> seen;
        for (const GElem& s : seed)
            if (seen.emplace(s, true).second) conj_closed.push_back(s);
        for (std::size_t i = 0; i < conj_closed.size(); ++i) {
            GElem cur = conj_closed[i];
            for (const GElem& cg : gens) {
                GElem conj = g.mul(g.mul(cg, cur), g.inv(cg));
                if (seen.emplace(conj, true).second) {
                    if (seen.size() > cap) throw CapExceeded("subgroup closure");
                    conj_closed.push_back(std::move(conj));
                }
            }
        }
    }
    // step 2: the submonoid generated by the conjugation-closed set is the
    // normal subgroup (finite groups: monoid closure contains inverses)
    std::vector<GElem> members;
    std::unordered_map<GElem, bool, GElemHash> seen;
    members.push_back(g.identity());
    seen.emplace(members.front(), true);
    for (std::size_t i = 0; i < members.size(); ++i) {
        GElem cur = members[i];
        for (const GElem& c : conj_closed) {
            GElem nx = g.mul(cur, c);
            if (seen.emplace(nx, true).second) {
                if (seen.size() > cap) throw CapExceeded("subgroup closure");
                members.push_back(std::move(nx));
            }
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

std::vector<GElem> frattini_subgroup(const FiniteGroup& g, std::uint64_t cap) {
    if (!is_p_power_order(g))
        throw NotAPGroup("|G| = " + std::to_string(g.order()));
    unsigned p = fp::prime();
    std::vector<GElem> seed;
    std::vector<GElem> gens = g.generators();
    for (const GElem& a : gens)
        for (const GElem& b : gens)
            seed.push_back(g.commutator(a, b));
    for (const GElem& x : g.elements())
        seed.push_back(g.power(x, p));
    return normal_closure(g, seed, cap);
}

// -------------------------------------------------------------- PGroupPresheaf

PGroupPresheaf::PGroupPresheaf(std::shared_ptr<const site::TruncatedSite> site, std::string name,
                               std::vector<std::shared_ptr<const FiniteGroup>> groups,
                               std::vector<GroupHom> gen_actions)
    : site_(std::move(site)),
      name_(std::move(name)),
      groups_(std::move(groups)),
      gen_act_(std::move(gen_actions)) {
    if (groups_.size() != static_cast<std::size_t>(site_->window()) + 1)
        throw UsageError("pgroup presheaf must cover dimensions 0..window");
    if (gen_act_.size() != site_->generators().size())
        throw UsageError("pgroup presheaf must provide one action per generator");
    for (const auto& g : groups_)
        if (!is_p_power_order(*g)) throw NotAPGroup("presheaf value of order " + std::to_string(g->order()));
}

GElem PGroupPresheaf::apply(const FpMatrix& f, GElem e) const {
    site::Word w = site_->factor(f).flat();
    for (auto id : w)
        e = gen_act_[id](e);
    return e;
}

presheaf::ValidationReport validate(const PGroupPresheaf& g, const site::Schedule& sched) {
    presheaf::ValidationReport rep;
    std::mt19937_64 rng(sched.seed ^ 0x5bd1e995u);
    // homomorphism property of the generator actions; exhaustive pairs for
    // orders <= 512, seeded samples above
    for (std::uint32_t id = 0; id < g.site()->generators().size(); ++id) {
        const auto& gen = g.site()->gen(id);
        const FiniteGroup& src = g.group(gen.dst);
        const auto& el = src.elements();
        auto check_pair = [&](const GElem& a, const GElem& b) {
            return g.apply_gen(id, src.mul(a, b)) ==
                   g.group(gen.src).mul(g.apply_gen(id, a), g.apply_gen(id, b));
        };
        bool ok = true;
        if (el.size() <= 512) {
            for (const GElem& a : el) {
                for (const GElem& b : el)
                    if (!check_pair(a, b)) { ok = false; break; }
                if (!ok) break;
            }
        } else {
            for (int t = 0; t < 4096 && ok; ++t)
                ok = check_pair(el[rng() % el.size()], el[rng() % el.size()]);
        }
        if (!ok) {
            rep.ok = false;
            rep.witness = "generator action is not a homomorphism at " + gen.label;
            return rep;
        }
    }
    site::Schedule s2 = sched;
    s2.exhaustive_dim = std::min(s2.exhaustive_dim, 2);
    s2.samples = std::min(s2.samples, 64);
    g.site()->for_each_functoriality_pair(s2, [&](const FpMatrix& f1, const FpMatrix& f2) {
        const FiniteGroup& top = g.group(f1.rows());
        const auto& el = top.elements();
        FpMatrix comp = f1.mul(f2);
        auto check_elem = [&](const GElem& e) {
            return g.apply(comp, e) == g.apply(f2, g.apply(f1, e));
        };
        bool ok = true;
        if (el.size() <= 1024) {
            for (const GElem& e : el)
                if (!check_elem(e)) { ok = false; break; }
        } else {
            for (int t = 0; t < 512 && ok; ++t)
                ok = check_elem(el[rng() % el.size()]);
        }
        if (!ok) {
            rep.ok = false;
            rep.witness = "functoriality fails for f=" + f1.to_string() + " g=" + f2.to_string();
            return false;
        }
        return true;
    });
    return rep;
}

presheaf::ValidationReport validate(const PGroupPresheaf& g, std::uint64_t seed) {
    return validate(g, g.site()->default_schedule(seed));
}

// -------------------------------------------------------------- catalog

namespace {

FpVec slice_vec(const GElem& e, std::uint32_t off, std::uint32_t len) {
    FpVec v(len);
    for (std::uint32_t i = 0; i < len; ++i) v.set(i, e[off + i]);
    return v;
}

void write_slice(GElem& e, std::uint32_t off, const FpVec& v) {
    for (std::uint32_t i = 0; i < v.size(); ++i)
        e[off + i] = static_cast<std::uint8_t>(v.get(i));
}

} // namespace

PGroupPresheaf heisenberg(std::shared_ptr<const site::TruncatedSite> site) {
    int w = site->window();
    lin::LinFunctor ext2 = lin::ext_power(site, 2);
    std::vector<std::shared_ptr<const FiniteGroup>> groups;
    for (int d = 0; d <= w; ++d)
        groups.push_back(std::make_shared<HeisenbergGroup>(static_cast<std::uint32_t>(d)));
    std::vector<GroupHom> acts;
    for (std::uint32_t id = 0; id < site->generators().size(); ++id) {
        const auto& gen = site->gen(id);
        FpMatrix t = gen.mat.transpose();      // a x b
        FpMatrix l2 = ext2.gen_matrix(id);     // wedge(a) x wedge(b)
        std::uint32_t a = gen.src, b = gen.dst;
        std::uint32_t wb = b * (b - 1) / 2, wa = a * (a - 1) / 2;
        acts.push_back([t, l2, a, b, wb, wa](const GElem& e) {
            GElem out(2 * a + wa, 0);
            write_slice(out, 0, t.apply(slice_vec(e, 0, b)));
            write_slice(out, a, t.apply(slice_vec(e, b, b)));
            write_slice(out, 2 * a, l2.apply(slice_vec(e, 2 * b, wb)));
            return out;
        });
    }
    return PGroupPresheaf(std::move(site), "heisenberg", std::move(groups), std::move(acts));
}

PGroupPresheaf elem_abelian(const lin::LinFunctor& f) {
    unsigned p = fp::prime();
    int w = f.window();
    std::vector<std::shared_ptr<const FiniteGroup>> groups;
    for (int d = 0; d <= w; ++d)
        groups.push_back(std::make_shared<TupleAbelianGroup>(
            std::vector<std::uint32_t>(f.dim(d), p)));
    std::vector<GroupHom> acts;
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        FpMatrix m = f.gen_matrix(id);
        std::uint32_t din = m.cols(), dout = m.rows();
        acts.push_back([m, din, dout](const GElem& e) {
            GElem out(dout, 0);
            write_slice(out, 0, m.apply(slice_vec(e, 0, din)));
            return out;
        });
    }
    return PGroupPresheaf(f.site(), "elemab(" + f.name() + ")", std::move(groups), std::move(acts));
}

PGroupPresheaf witt_sym(std::shared_ptr<const site::TruncatedSite> site) {
    if (fp::prime() != 2) throw Unsupported("witt_sym requires p = 2");
    int w = site->window();
    lin::LinFunctor s2 = lin::sym_power(site, 2);
    std::vector<std::shared_ptr<const FiniteGroup>> groups;
    for (int d = 0; d <= w; ++d)
        groups.push_back(std::make_shared<WittSymGroup>(static_cast<std::uint32_t>(d)));
    // sym basis used by WittSymGroup is (i, j) with i <= j in lex order, which is
    // exactly the sym_power monomial order at k = 2
    std::vector<GroupHom> acts;
    for (std::uint32_t id = 0; id < site->generators().size(); ++id) {
        const auto& gen = site->gen(id);
        FpMatrix t = gen.mat.transpose();
        FpMatrix m2 = s2.gen_matrix(id);
        std::uint32_t a = gen.src, b = gen.dst;
        std::uint32_t sb = b * (b + 1) / 2, sa = a * (a + 1) / 2;
        acts.push_back([t, m2, a, b, sb, sa](const GElem& e) {
            GElem out(a + sa, 0);
            write_slice(out, 0, t.apply(slice_vec(e, 0, b)));
            write_slice(out, a, m2.apply(slice_vec(e, b, sb)));
            return out;
        });
    }
    return PGroupPresheaf(std::move(site), "wittsym", std::move(groups), std::move(acts));
}

// -------------------------------------------------------------- Frattini series

namespace {

// coordinates of an elementary abelian quotient A/B inside the ambient group
struct AbQuotCoords {
    const FiniteGroup* ambient = nullptr;
    std::vector<GElem> b_elems;
    std::uint32_t dim = 0;
    std::vector<GElem> basis; // coset representatives
    std::unordered_map<GElem, FpVec, GElemHash> coords;

    GElem canon(const GElem& e) const {
        GElem best = e;
        for (const GElem& n : b_elems) {
            GElem c = ambient->mul(e, n);
            if (c < best) best = c;
        }
        return best;
    }

    FpVec coord_of(const GElem& e) const {
        auto it = coords.find(canon(e));
        if (it == coords.end()) throw UsageError("element outside the graded piece");
        return it->second;
    }
};

AbQuotCoords build_coords(const FiniteGroup& ambient, const std::vector<GElem>& a_elems,
                          const std::vector<GElem>& b_elems) {
    AbQuotCoords q;
    q.ambient = &ambient;
    q.b_elems = b_elems;
    unsigned p = fp::prime();
    GElem id_rep = q.canon(ambient.identity());
    q.coords.emplace(id_rep, FpVec(0));
    std::vector<std::pair<GElem, FpVec>> flat{{id_rep, FpVec(0)}};
    for (const GElem& a : a_elems) {
        GElem c = q.canon(a);
        if (q.coords.count(c)) continue;
        // new basis vector
        std::uint32_t k = q.dim++;
        q.basis.push_back(c);
        std::vector<std::pair<GElem, FpVec>> grown;
        for (auto& [rep, v] : flat) {
            FpVec v2(q.dim);
            for (std::uint32_t i = 0; i < k; ++i) v2.set(i, v.get(i));
            grown.emplace_back(rep, v2);
            GElem cur = rep;
            for (unsigned j = 1; j < p; ++j) {
                cur = q.canon(ambient.mul(cur, c));
                FpVec v3 = v2;
                v3.set(k, j);
                grown.emplace_back(cur, v3);
            }
        }
        flat = std::move(grown);
        q.coords.clear();
        for (auto& [rep, v] : flat) q.coords.emplace(rep, v);
    }
    // re-pad all coordinate vectors to the final dimension
    for (auto& [rep, v] : q.coords) {
        if (v.size() != q.dim) {
            FpVec v2(q.dim);
            for (std::uint32_t i = 0; i < v.size(); ++i) v2.set(i, v.get(i));
            v = v2;
        }
    }
    return q;
}

} // namespace

FrattiniSeries p_derived_series(const PGroupPresheaf& g) {
    int w = g.window();
    FrattiniSeries out;
    // stage 0: the groups themselves
    std::vector<std::vector<GElem>> current(w + 1);
    for (int d = 0; d <= w; ++d) current[d] = g.group(d).elements();
    out.stages.push_back(current);
    while (true) {
        bool all_trivial = true;
        for (int d = 0; d <= w; ++d)
            if (current[d].size() > 1) all_trivial = false;
        if (all_trivial) break;
        std::vector<std::vector<GElem>> next(w + 1);
        for (int d = 0; d <= w; ++d) {
            if (out.stages.size() == 1) {
                next[d] = frattini_subgroup(g.group(d));
            } else {
                SubgroupView sub(g.group_ptr(d), current[d]);
                next[d] = frattini_subgroup(sub);
            }
        }
        // graded piece current/next as a linear functor
        std::vector<AbQuotCoords> coords;
        std::vector<std::uint32_t> dims(w + 1);
        for (int d = 0; d <= w; ++d) {
            coords.push_back(build_coords(g.group(d), current[d], next[d]));
            dims[d] = coords[d].dim;
        }
        std::vector<FpMatrix> acts;
        for (std::uint32_t id = 0; id < g.site()->generators().size(); ++id) {
            const auto& gen = g.site()->gen(id);
            FpMatrix m(dims[gen.src], dims[gen.dst]);
            for (std::uint32_t c = 0; c < dims[gen.dst]; ++c) {
                GElem img = g.apply_gen(id, coords[gen.dst].basis[c]);
                // naturality of the series: the image must lie in the source stage
                if (!std::binary_search(current[gen.src].begin(), current[gen.src].end(), img))
                    throw UsageError("Frattini series is not natural at " + gen.label);
                FpVec v = coords[gen.src].coord_of(img);
                for (std::uint32_t r = 0; r < dims[gen.src]; ++r)
                    if (v.get(r)) m.set(r, c, v.get(r));
            }
            acts.push_back(std::move(m));
        }
        out.graded.emplace_back(g.site(),
                                g.name() + "~gr" + std::to_string(out.graded.size()),
                                std::move(dims), std::move(acts));
        current = next;
        out.stages.push_back(current);
    }
    return out;
}

PFiniteResult p_finite_test(const PGroupPresheaf& g) {
    if (g.group(0).order() != 1)
        throw UsageError("p_finite_test requires a trivial group at dimension 0");
    PFiniteResult out;
    FrattiniSeries series = p_derived_series(g);
    out.series_length = series.length();
    if (series.graded.empty()) {
        out.total_graded = lin::constant_functor(g.site(), 0);
    } else {
        out.total_graded = series.graded[0];
        for (std::size_t i = 1; i < series.graded.size(); ++i)
            out.total_graded = lin::direct_sum(out.total_graded, series.graded[i]);
    }
    out.total_graded.set_name(g.name() + "~graded");
    out.degree = lin::poly_degree(out.total_graded);
    for (const auto& piece : series.graded)
        out.piece_degrees.push_back(lin::poly_degree(piece).degree);
    unsigned p = fp::prime();
    for (int d = 0; d <= g.window(); ++d) {
        std::uint64_t n = g.group(d).order();
        std::uint32_t e = 0;
        while (n > 1) {
            n /= p;
            ++e;
        }
        out.gamma_exponents.push_back(e);
    }
    out.gamma_fit = growth::degree_fit(growth::profile_from_p_exponents(out.gamma_exponents));
    out.p_finite = out.degree.degree.has_value();
    return out;
}

// -------------------------------------------------------------- group cross-effects

std::vector<GElem> group_cross_effect(const PGroupPresheaf& g,
                                      const std::vector<std::uint32_t>& arg_dims,
                                      std::uint64_t cap) {
    if (g.group(0).order() != 1)
        throw UsageError("group cross-effects need a constant-free presheaf (trivial value at 0)");
    std::uint32_t s = 0;
    for (auto d : arg_dims) {
        if (d == 0) throw UsageError("cross_effect arguments must be positive-dimensional");
        s += d;
    }
    if (static_cast<int>(s) > g.window())
        throw WindowExceeded("group cross-effect at total dimension " + std::to_string(s));
    const FiniteGroup& top = g.group(s);
    if (top.order() > cap) throw CapExceeded("group cross-effect enumeration");
    std::vector<FpMatrix> incls;
    if (arg_dims.size() == 1) {
        incls.push_back(FpMatrix(s, 0));
    } else {
        for (std::size_t omit = 0; omit < arg_dims.size(); ++omit)
            incls.push_back(linalg::block_inclusion(arg_dims, omit));
    }
    std::vector<GElem> out;
    for (const GElem& e : top.elements()) {
        bool in_kernel = true;
        for (const auto& m : incls) {
            GElem img = g.apply(m, e);
            if (!g.group(m.cols()).is_identity(img)) {
                in_kernel = false;
                break;
            }
        }
        if (in_kernel) out.push_back(e);
    }
    return out;
}

GroupPolyDegree group_poly_degree(const PGroupPresheaf& g, std::uint64_t cap) {
    GroupPolyDegree out;
    int w = g.window();
    for (int k = 1; k <= w; ++k)
        out.cr_orders.push_back(group_cross_effect(g, std::vector<std::uint32_t>(k, 1), cap).size());
    int top = 0;
    for (int k = 1; k <= w; ++k)
        if (out.cr_orders[k - 1] > 1) top = k;
    if (top == w && w > 0)
        out.degree = std::nullopt;
    else
        out.degree = top;
    return out;
}

bool cross_effect_exactness_check(const PGroupPresheaf& k, const PGroupPresheaf& g,
                                  const PGroupPresheaf& q, const GroupMorphismFamily& incl,
                                  const GroupMorphismFamily& proj, std::uint32_t n,
                                  std::uint64_t cap) {
    int w = g.window();
    // dimensionwise validation of the short exact sequence
    for (int d = 0; d <= w; ++d) {
        const FiniteGroup& kd = k.group(d);
        const FiniteGroup& gd = g.group(d);
        const FiniteGroup& qd = q.group(d);
        std::unordered_map<GElem, bool, GElemHash> image;
        for (const GElem& a : kd.elements()) {
            for (const GElem& b : kd.elements())
                if (incl.maps[d](kd.mul(a, b)) != gd.mul(incl.maps[d](a), incl.maps[d](b)))
                    throw NotExact("inclusion is not a homomorphism at dimension " + std::to_string(d));
            if (!image.emplace(incl.maps[d](a), true).second)
                throw NotExact("inclusion not injective at dimension " + std::to_string(d));
        }
        std::unordered_map<GElem, bool, GElemHash> proj_image;
        std::uint64_t kernel_size = 0;
        for (const GElem& a : gd.elements()) {
            GElem pa = proj.maps[d](a);
            proj_image.emplace(pa, true);
            if (qd.is_identity(pa)) {
                ++kernel_size;
                if (!image.count(a))
                    throw NotExact("kernel exceeds the inclusion image at dimension " + std::to_string(d));
            }
        }
        for (const GElem& a : gd.elements())
            for (const GElem& b : gd.elements())
                if (proj.maps[d](gd.mul(a, b)) != qd.mul(proj.maps[d](a), proj.maps[d](b)))
                    throw NotExact("projection is not a homomorphism at dimension " + std::to_string(d));
        if (proj_image.size() != qd.order())
            throw NotExact("projection not surjective at dimension " + std::to_string(d));
        if (kernel_size != kd.order())
            throw NotExact("image/kernel mismatch at dimension " + std::to_string(d));
    }
    // short exactness of the cross-effects at every in-window tuple
    std::vector<std::vector<std::uint32_t>> tuples;
    {
        std::vector<std::uint32_t> cur;
        std::function<void(std::uint32_t, std::uint32_t)> rec = [&](std::uint32_t minv,
                                                                    std::uint32_t budget) {
            std::uint32_t left = n - static_cast<std::uint32_t>(cur.size());
            if (left == 0) {
                tuples.push_back(cur);
                return;
            }
            for (std::uint32_t v = minv; v * left <= budget; ++v) {
                cur.push_back(v);
                rec(v, budget - v);
                cur.pop_back();
            }
        };
        if (n >= 1 && static_cast<std::uint32_t>(w) >= n) rec(1, static_cast<std::uint32_t>(w));
    }
    for (const auto& t : tuples) {
        std::uint32_t s = 0;
        for (auto d : t) s += d;
        std::vector<GElem> crk = group_cross_effect(k, t, cap);
        std::vector<GElem> crg = group_cross_effect(g, t, cap);
        std::vector<GElem> crq = group_cross_effect(q, t, cap);
        std::unordered_map<GElem, bool, GElemHash> crg_set, crq_set, incl_img, proj_img;
        for (const GElem& e : crg) crg_set.emplace(e, true);
        for (const GElem& e : crq) crq_set.emplace(e, true);
        for (const GElem& e : crk) {
            GElem img = incl.maps[s](e);
            if (!crg_set.count(img)) return false; // cr K must land in cr G
            incl_img.emplace(img, true);
        }
        for (const GElem& e : crg) {
            GElem img = proj.maps[s](e);
            if (!crq_set.count(img)) return false;
            proj_img.emplace(img, true);
            bool in_kernel = q.group(s).is_identity(img);
            if (in_kernel != (incl_img.count(e) > 0)) return false; // exactness in the middle
        }
        if (proj_img.size() != crq.size()) return false; // surjectivity on cross-effects
    }
    return true;
}

// -------------------------------------------------------------- augmentation filtration

AugmentationFiltration augmentation_filtration(const FiniteGroup& g, std::uint32_t k_max,
                                               std::uint64_t order_cap) {
    if (g.order() > order_cap)
        throw CapExceeded("augmentation filtration for |G| = " + std::to_string(g.order()));
    if (!is_p_power_order(g)) throw NotAPGroup("|G| = " + std::to_string(g.order()));
    const std::vector<GElem>& el = g.elements();
    std::uint32_t n = static_cast<std::uint32_t>(el.size());
    std::vector<GElem> gens = g.generators();
    // right multiplication permutations for the generator differences
    std::vector<std::vector<std::uint32_t>> right_perm;
    for (const GElem& gg : gens) {
        std::vector<std::uint32_t> perm(n);
        for (std::uint32_t i = 0; i < n; ++i) perm[i] = g.index_of(g.mul(el[i], gg));
        right_perm.push_back(std::move(perm));
    }
    std::uint32_t id_idx = g.index_of(g.identity());
    auto mul_diff = [&](const FpVec& v, std::size_t gi) {
        // v . (g - e)
        FpVec out(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            unsigned c = v.get(i);
            if (!c) continue;
            out.set(right_perm[gi][i], fp::add(out.get(right_perm[gi][i]), c));
            out.set(i, fp::sub(out.get(i), c));
        }
        return out;
    };
    auto mul_g = [&](const FpVec& v, std::size_t gi) {
        FpVec out(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            unsigned c = v.get(i);
            if (c) out.set(right_perm[gi][i], c);
        }
        return out;
    };
    auto close_right = [&](linalg::RowSpan& span) {
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<FpVec> rows;
            for (const auto& [p, r] : span.rows()) rows.push_back(r);
            for (const FpVec& r : rows)
                for (std::size_t gi = 0; gi < gens.size(); ++gi)
                    if (span.insert(mul_g(r, gi))) changed = true;
        }
    };

    AugmentationFiltration out;
    // I itself: right module generated by the generator differences
    linalg::RowSpan cur(n);
    {
        FpVec e(n);
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
            FpVec v(n);
            v.set(g.index_of(gens[gi]), 1);
            v.set(id_idx, fp::sub(v.get(id_idx), 1));
            cur.insert(std::move(v));
        }
        close_right(cur);
    }
    out.power_dims.push_back(static_cast<std::uint32_t>(cur.dim()));
    for (std::uint32_t k = 2; k <= k_max && cur.dim() > 0; ++k) {
        linalg::RowSpan next(n);
        for (const auto& [p, r] : cur.rows())
            for (std::size_t gi = 0; gi < gens.size(); ++gi)
                next.insert(mul_diff(r, gi));
        close_right(next);
        out.power_dims.push_back(static_cast<std::uint32_t>(next.dim()));
        cur = std::move(next);
        if (cur.dim() == 0) {
            out.nilpotency_index = k;
            break;
        }
    }
    if (!out.nilpotency_index && !out.power_dims.empty() && out.power_dims.front() == 0)
        out.nilpotency_index = 1;
    out.dim_i_mod_i2 = out.power_dims.size() >= 2 ? out.power_dims[0] - out.power_dims[1]
                                                  : out.power_dims[0];
    std::vector<GElem> phi = frattini_subgroup(g);
    unsigned p = fp::prime();
    std::uint64_t quot = g.order() / phi.size();
    std::uint32_t e = 0;
    while (quot > 1) {
        quot /= p;
        ++e;
    }
    out.dim_g_mod_frattini = e;
    out.abelianization_match = (out.dim_i_mod_i2 == out.dim_g_mod_frattini);
    return out;
}

// -------------------------------------------------------------- forgetful functor

presheaf::SetPresheaf underlying_presheaf(const PGroupPresheaf& g, std::uint64_t cap) {
    int w = g.window();
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) {
        if (g.group(d).order() > cap)
            throw CapExceeded("underlying presheaf at dimension " + std::to_string(d));
        sizes[d] = static_cast<std::uint32_t>(g.group(d).order());
    }
    std::vector<presheaf::ActTable> acts;
    for (std::uint32_t id = 0; id < g.site()->generators().size(); ++id) {
        const auto& gen = g.site()->gen(id);
        const auto& el = g.group(gen.dst).elements();
        presheaf::ActTable t(sizes[gen.dst]);
        for (std::uint32_t i = 0; i < el.size(); ++i)
            t[i] = g.group(gen.src).index_of(g.apply_gen(id, el[i]));
        acts.push_back(std::move(t));
    }
    return presheaf::SetPresheaf(g.site(), "sets(" + g.name() + ")", std::move(sizes),
                                 std::move(acts));
}

} // namespace fpre::pg
