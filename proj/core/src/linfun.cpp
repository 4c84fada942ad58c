#include "fpresheaf/linfun.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "fpresheaf/errors.hpp"

namespace fpre::lin {

// -------------------------------------------------------------- LinFunctor

LinFunctor::LinFunctor(std::shared_ptr<const TruncatedSite> site, std::string name,
                       std::vector<std::uint32_t> dims, std::vector<FpMatrix> gen_matrices,
                       std::vector<std::vector<std::string>> basis_labels)
    : site_(std::move(site)),
      name_(std::move(name)),
      dims_(std::move(dims)),
      gen_act_(std::move(gen_matrices)),
      labels_(std::move(basis_labels)) {
    if (dims_.size() != static_cast<std::size_t>(site_->window()) + 1)
        throw UsageError("functor dims must cover dimensions 0..window");
    if (gen_act_.size() != site_->generators().size())
        throw UsageError("functor must provide one matrix per site generator");
    for (std::uint32_t id = 0; id < gen_act_.size(); ++id) {
        const auto& g = site_->gen(id);
        if (gen_act_[id].rows() != dims_[g.src] || gen_act_[id].cols() != dims_[g.dst])
            throw UsageError("generator matrix has wrong shape for " + g.label);
    }
}

const FpMatrix& LinFunctor::act(const FpMatrix& f) const {
    std::string key = f.key();
    {
        std::lock_guard<std::mutex> lk(cache_->mu);
        auto it = cache_->map.find(key);
        if (it != cache_->map.end()) return it->second;
    }
    site::Word w = site_->factor(f).flat();
    FpMatrix cur = FpMatrix::identity(dims_[f.rows()]);
    for (auto id : w)
        cur = gen_act_[id].mul(cur);
    std::lock_guard<std::mutex> lk(cache_->mu);
    auto [it, ok] = cache_->map.emplace(std::move(key), std::move(cur));
    return it->second;
}

FpVec LinFunctor::act_vec(const FpMatrix& f, FpVec v) const {
    site::Word w = site_->factor(f).flat();
    FpVec tmp;
    for (auto id : w) {
        gen_act_[id].apply_to(v, tmp);
        std::swap(v, tmp);
    }
    return v;
}

std::string LinFunctor::basis_label(std::uint32_t d, std::uint32_t i) const {
    if (d < labels_.size() && i < labels_[d].size()) return labels_[d][i];
    return "b" + std::to_string(i);
}

presheaf::ValidationReport validate(const LinFunctor& f, const site::Schedule& sched) {
    presheaf::ValidationReport rep;
    f.site()->for_each_functoriality_pair(sched, [&](const FpMatrix& a, const FpMatrix& b) {
        const FpMatrix& mab = f.act(a.mul(b));
        FpMatrix comp = f.act(b).mul(f.act(a));
        if (!(mab == comp)) {
            rep.ok = false;
            rep.witness = "act(f.g) != act(g)act(f) for f=" + a.to_string() + " g=" + b.to_string();
            return false;
        }
        return true;
    });
    return rep;
}

presheaf::ValidationReport validate(const LinFunctor& f, std::uint64_t seed) {
    return validate(f, f.site()->default_schedule(seed));
}

// -------------------------------------------------------------- catalog

LinFunctor constant_functor(std::shared_ptr<const TruncatedSite> site, std::uint32_t dim) {
    int w = site->window();
    std::vector<std::uint32_t> dims(w + 1, dim);
    std::vector<FpMatrix> acts;
    for (const auto& g : site->generators()) {
        (void)g;
        acts.push_back(FpMatrix::identity(dim));
    }
    return LinFunctor(std::move(site), "const(" + std::to_string(dim) + ")", std::move(dims),
                      std::move(acts));
}

namespace {

using Monomial = std::vector<std::uint8_t>; // sorted variable indices, length k

std::vector<Monomial> sym_basis(std::uint32_t d, std::uint32_t k) {
    std::vector<Monomial> out;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    if (d == 0) return out;
    Monomial m(k, 0);
    while (true) {
        out.push_back(m);
        std::int32_t i = static_cast<std::int32_t>(k) - 1;
        while (i >= 0 && m[i] == d - 1) --i;
        if (i < 0) break;
        std::uint8_t v = static_cast<std::uint8_t>(m[i] + 1);
        for (std::uint32_t j = i; j < k; ++j) m[j] = v;
    }
    return out;
}

std::string sym_label(const Monomial& m) {
    if (m.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s.push_back('*');
        s += "x" + std::to_string(m[i]);
    }
    return s;
}

std::vector<Monomial> ext_basis(std::uint32_t d, std::uint32_t k) {
    std::vector<Monomial> out;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    if (k > d) return out;
    Monomial m(k);
    for (std::uint32_t i = 0; i < k; ++i) m[i] = static_cast<std::uint8_t>(i);
    while (true) {
        out.push_back(m);
        std::int32_t i = static_cast<std::int32_t>(k) - 1;
        while (i >= 0 && m[i] == d - k + i) --i;
        if (i < 0) break;
        ++m[i];
        for (std::uint32_t j = i + 1; j < k; ++j) m[j] = static_cast<std::uint8_t>(m[j - 1] + 1);
    }
    return out;
}

std::string ext_label(const Monomial& m) {
    if (m.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s.push_back('^');
        s += "e" + std::to_string(m[i]);
    }
    return s;
}

unsigned gf_det(const FpMatrix& sub) {
    // determinant of a small square matrix by elimination
    FpMatrix a = sub;
    unsigned det = 1, p = fp::prime();
    std::uint32_t n = a.rows();
    for (std::uint32_t c = 0; c < n; ++c) {
        std::uint32_t piv = n;
        for (std::uint32_t i = c; i < n; ++i)
            if (a.at(i, c)) { piv = i; break; }
        if (piv == n) return 0;
        if (piv != c) {
            a.swap_rows(piv, c);
            det = fp::mul(det, p - 1);
        }
        det = fp::mul(det, a.at(c, c));
        unsigned inv = fp::inv(a.at(c, c));
        for (std::uint32_t i = c + 1; i < n; ++i) {
            unsigned v = a.at(i, c);
            if (v) a.add_scaled_row(i, c, fp::mul(fp::neg(v), inv));
        }
    }
    return det;
}

} // namespace

LinFunctor sym_power(std::shared_ptr<const TruncatedSite> site, std::uint32_t k) {
    int w = site->window();
    std::vector<std::vector<Monomial>> bases(w + 1);
    std::vector<std::map<Monomial, std::uint32_t>> index(w + 1);
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d) {
        bases[d] = sym_basis(d, k);
        dims[d] = static_cast<std::uint32_t>(bases[d].size());
        for (std::uint32_t i = 0; i < dims[d]; ++i) {
            index[d].emplace(bases[d][i], i);
            labels[d].push_back(sym_label(bases[d][i]));
        }
    }
    unsigned p = fp::prime();
    std::vector<FpMatrix> acts;
    for (const auto& g : site->generators()) {
        // substitute x_v -> sum_i T(i, v) y_i with T = g.mat^T : dims a x b
        FpMatrix t = g.mat.transpose();
        FpMatrix m(dims[g.src], dims[g.dst]);
        for (std::uint32_t col = 0; col < dims[g.dst]; ++col) {
            std::map<Monomial, unsigned> poly;
            poly[{}] = 1;
            for (std::uint8_t var : bases[g.dst][col]) {
                std::map<Monomial, unsigned> next;
                for (const auto& [mono, coeff] : poly) {
                    for (std::uint32_t i = 0; i < g.src; ++i) {
                        unsigned c = t.at(i, var);
                        if (!c) continue;
                        Monomial m2 = mono;
                        m2.insert(std::upper_bound(m2.begin(), m2.end(), static_cast<std::uint8_t>(i)),
                                  static_cast<std::uint8_t>(i));
                        next[m2] = (next[m2] + coeff * c) % p;
                    }
                }
                poly = std::move(next);
            }
            for (const auto& [mono, coeff] : poly)
                if (coeff) m.set(index[g.src].at(mono), col, coeff);
        }
        acts.push_back(std::move(m));
    }
    return LinFunctor(std::move(site), "sym(" + std::to_string(k) + ")", std::move(dims),
                      std::move(acts), std::move(labels));
}

LinFunctor ext_power(std::shared_ptr<const TruncatedSite> site, std::uint32_t k) {
    int w = site->window();
    std::vector<std::vector<Monomial>> bases(w + 1);
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d) {
        bases[d] = ext_basis(d, k);
        dims[d] = static_cast<std::uint32_t>(bases[d].size());
        for (const auto& m : bases[d]) labels[d].push_back(ext_label(m));
    }
    std::vector<FpMatrix> acts;
    for (const auto& g : site->generators()) {
        FpMatrix t = g.mat.transpose(); // a x b
        FpMatrix m(dims[g.src], dims[g.dst]);
        for (std::uint32_t col = 0; col < dims[g.dst]; ++col) {
            const Monomial& cols_I = bases[g.dst][col];
            for (std::uint32_t row = 0; row < dims[g.src]; ++row) {
                const Monomial& rows_J = bases[g.src][row];
                FpMatrix sub(k, k);
                for (std::uint32_t r = 0; r < k; ++r)
                    for (std::uint32_t c = 0; c < k; ++c)
                        sub.set(r, c, t.at(rows_J[r], cols_I[c]));
                unsigned dv = gf_det(sub);
                if (dv) m.set(row, col, dv);
            }
        }
        acts.push_back(std::move(m));
    }
    return LinFunctor(std::move(site), "ext(" + std::to_string(k) + ")", std::move(dims),
                      std::move(acts), std::move(labels));
}

LinFunctor free_hom(std::shared_ptr<const TruncatedSite> site, std::uint32_t n, std::uint64_t cap) {
    presheaf::SetPresheaf h = presheaf::homset(site, n, cap);
    LinFunctor f = linearize(h);
    f.set_name("freehom(" + std::to_string(n) + ")");
    return f;
}

LinFunctor ibar(std::shared_ptr<const TruncatedSite> site, std::uint64_t cap) {
    int w = site->window();
    unsigned p = fp::prime();
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d) {
        std::uint64_t total = fp::pow_u64(p, d);
        if (total > cap) throw CapExceeded("ibar at dimension " + std::to_string(d));
        dims[d] = static_cast<std::uint32_t>(total - 1); // indicators of nonzero vectors
        for (std::uint32_t i = 1; i < total; ++i)
            labels[d].push_back("d" + std::to_string(i));
    }
    std::vector<FpMatrix> acts;
    for (const auto& g : site->generators()) {
        FpMatrix m(dims[g.src], dims[g.dst]);
        std::uint64_t src_total = fp::pow_u64(p, g.src);
        for (std::uint64_t wi = 1; wi < src_total; ++wi) {
            FpVec wv = FpVec::from_index(g.src, wi);
            std::uint64_t vi = g.mat.apply(wv).to_index();
            if (vi != 0) m.set(static_cast<std::uint32_t>(wi - 1), static_cast<std::uint32_t>(vi - 1), 1);
        }
        acts.push_back(std::move(m));
    }
    return LinFunctor(std::move(site), "ibar", std::move(dims), std::move(acts), std::move(labels));
}

LinFunctor direct_sum(const LinFunctor& f, const LinFunctor& g) {
    if (f.site() != g.site()) throw UsageError("direct_sum: functors on different sites");
    int w = f.window();
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d) {
        dims[d] = f.dim(d) + g.dim(d);
        for (std::uint32_t i = 0; i < f.dim(d); ++i) labels[d].push_back("L." + f.basis_label(d, i));
        for (std::uint32_t i = 0; i < g.dim(d); ++i) labels[d].push_back("R." + g.basis_label(d, i));
    }
    std::vector<FpMatrix> acts;
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        const auto& gen = f.site()->gen(id);
        const FpMatrix& a = f.gen_matrix(id);
        const FpMatrix& b = g.gen_matrix(id);
        FpMatrix m(dims[gen.src], dims[gen.dst]);
        for (std::uint32_t r = 0; r < a.rows(); ++r)
            for (std::uint32_t c = 0; c < a.cols(); ++c)
                if (a.at(r, c)) m.set(r, c, a.at(r, c));
        for (std::uint32_t r = 0; r < b.rows(); ++r)
            for (std::uint32_t c = 0; c < b.cols(); ++c)
                if (b.at(r, c)) m.set(f.dim(gen.src) + r, f.dim(gen.dst) + c, b.at(r, c));
        acts.push_back(std::move(m));
    }
    return LinFunctor(f.site(), "(" + f.name() + " + " + g.name() + ")", std::move(dims),
                      std::move(acts), std::move(labels));
}

LinFunctor tensor(const LinFunctor& f, const LinFunctor& g) {
    if (f.site() != g.site()) throw UsageError("tensor: functors on different sites");
    int w = f.window();
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d) {
        dims[d] = f.dim(d) * g.dim(d);
        for (std::uint32_t i = 0; i < f.dim(d); ++i)
            for (std::uint32_t j = 0; j < g.dim(d); ++j)
                labels[d].push_back(f.basis_label(d, i) + "(x)" + g.basis_label(d, j));
    }
    unsigned p = fp::prime();
    std::vector<FpMatrix> acts;
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        const auto& gen = f.site()->gen(id);
        const FpMatrix& a = f.gen_matrix(id);
        const FpMatrix& b = g.gen_matrix(id);
        FpMatrix m(dims[gen.src], dims[gen.dst]);
        for (std::uint32_t r1 = 0; r1 < a.rows(); ++r1)
            for (std::uint32_t c1 = 0; c1 < a.cols(); ++c1) {
                unsigned v1 = a.at(r1, c1);
                if (!v1) continue;
                for (std::uint32_t r2 = 0; r2 < b.rows(); ++r2)
                    for (std::uint32_t c2 = 0; c2 < b.cols(); ++c2) {
                        unsigned v2 = b.at(r2, c2);
                        if (!v2) continue;
                        m.set(r1 * b.rows() + r2, c1 * b.cols() + c2, (v1 * v2) % p);
                    }
            }
        acts.push_back(std::move(m));
    }
    return LinFunctor(f.site(), "(" + f.name() + " (x) " + g.name() + ")", std::move(dims),
                      std::move(acts), std::move(labels));
}

// -------------------------------------------------------------- linearization

LinFunctor linearize(const SetPresheaf& x) {
    int w = x.window();
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d) {
        dims[d] = x.size(d);
        for (std::uint32_t i = 0; i < x.size(d); ++i)
            labels[d].push_back("[" + x.label(d, i) + "]");
    }
    std::vector<FpMatrix> acts;
    for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
        const auto& gen = x.site()->gen(id);
        const presheaf::ActTable& t = x.gen_action(id);
        FpMatrix m(dims[gen.src], dims[gen.dst]);
        for (std::uint32_t j = 0; j < t.size(); ++j)
            m.set(t[j], j, 1);
        acts.push_back(std::move(m));
    }
    return LinFunctor(x.site(), "F[" + x.name() + "]", std::move(dims), std::move(acts),
                      std::move(labels));
}

SetPresheaf sets_of(const LinFunctor& f, std::uint64_t cap) {
    int w = f.window();
    unsigned p = fp::prime();
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) {
        std::uint64_t total = fp::pow_u64(p, f.dim(d));
        if (total > cap) throw CapExceeded("sets_of(" + f.name() + ") at dimension " + std::to_string(d));
        sizes[d] = static_cast<std::uint32_t>(total);
    }
    std::vector<presheaf::ActTable> acts;
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        const auto& gen = f.site()->gen(id);
        const FpMatrix& m = f.gen_matrix(id);
        presheaf::ActTable t(sizes[gen.dst]);
        for (std::uint32_t vi = 0; vi < t.size(); ++vi)
            t[vi] = static_cast<std::uint32_t>(m.apply(FpVec::from_index(f.dim(gen.dst), vi)).to_index());
        acts.push_back(std::move(t));
    }
    return SetPresheaf(f.site(), "sets(" + f.name() + ")", std::move(sizes), std::move(acts));
}

// -------------------------------------------------------------- constant split

ConstantSplit split_constant(const LinFunctor& f) {
    int w = f.window();
    std::vector<std::uint32_t> dims(w + 1);
    std::vector<FpMatrix> incl(w + 1);
    for (int d = 0; d <= w; ++d) {
        // constant-free part = ker F(iota: 0 -> F^d)
        const FpMatrix& to0 = f.act(FpMatrix(d, 0));
        std::vector<FpVec> kb = linalg::kernel_basis(to0);
        dims[d] = static_cast<std::uint32_t>(kb.size());
        FpMatrix inc(f.dim(d), dims[d]);
        for (std::uint32_t j = 0; j < kb.size(); ++j)
            for (std::uint32_t r = 0; r < f.dim(d); ++r)
                if (kb[j].get(r)) inc.set(r, j, kb[j].get(r));
        incl[d] = std::move(inc);
    }
    std::vector<FpMatrix> acts;
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        const auto& gen = f.site()->gen(id);
        FpMatrix img = f.gen_matrix(id).mul(incl[gen.dst]); // dims F(src) x reduced(dst)
        // coordinates in the reduced basis at src
        FpMatrix m(dims[gen.src], dims[gen.dst]);
        for (std::uint32_t c = 0; c < dims[gen.dst]; ++c) {
            auto sol = linalg::solve(incl[gen.src], img.col_vec(c));
            if (!sol) throw UsageError("split_constant: reduced part not action-closed");
            for (std::uint32_t r = 0; r < dims[gen.src]; ++r)
                if (sol->get(r)) m.set(r, c, sol->get(r));
        }
        acts.push_back(std::move(m));
    }
    ConstantSplit out{constant_functor(f.site(), f.dim(0)),
                      LinFunctor(f.site(), f.name() + "~red", std::move(dims), std::move(acts)),
                      std::move(incl)};
    return out;
}

// -------------------------------------------------------------- cross-effects

CrossEffectSlot cross_effect(const LinFunctor& f, const std::vector<std::uint32_t>& arg_dims) {
    if (arg_dims.empty()) throw UsageError("cross_effect needs at least one argument");
    std::uint32_t s = 0;
    for (auto d : arg_dims) {
        if (d == 0) throw UsageError("cross_effect arguments must be positive-dimensional");
        s += d;
    }
    if (static_cast<int>(s) > f.window())
        throw WindowExceeded("cross_effect at total dimension " + std::to_string(s));
    linalg::RowSpan constraints(f.dim(s));
    if (arg_dims.size() == 1) {
        const FpMatrix& to0 = f.act(FpMatrix(s, 0));
        for (std::uint32_t r = 0; r < to0.rows(); ++r)
            constraints.insert(to0.row_vec(r));
    } else {
        for (std::size_t omit = 0; omit < arg_dims.size(); ++omit) {
            const FpMatrix& m = f.act(linalg::block_inclusion(arg_dims, omit));
            for (std::uint32_t r = 0; r < m.rows(); ++r)
                constraints.insert(m.row_vec(r));
        }
    }
    CrossEffectSlot slot;
    slot.arg_dims = arg_dims;
    slot.basis = constraints.kernel();
    return slot;
}

PolyDegreeResult poly_degree(const LinFunctor& f) {
    PolyDegreeResult out;
    int w = f.window();
    for (int k = 1; k <= w; ++k)
        out.cr_dims.push_back(
            static_cast<std::uint32_t>(cross_effect(f, std::vector<std::uint32_t>(k, 1)).basis.size()));
    int top = 0;
    for (int k = 1; k <= w; ++k)
        if (out.cr_dims[k - 1] != 0) top = k;
    if (top == w && w > 0)
        out.degree = std::nullopt; // vanishing arity does not fit the window
    else
        out.degree = top;
    return out;
}

// -------------------------------------------------------------- nat_hom

namespace {

struct UnknownLayout {
    std::vector<std::uint32_t> off; // per level
    std::uint32_t total = 0;
    std::uint32_t at(std::uint32_t d, std::uint32_t r, std::uint32_t c,
                     const LinFunctor& src) const {
        return off[d] + r * src.dim(d) + c;
    }
};

UnknownLayout layout_for(const LinFunctor& src, const LinFunctor& tgt) {
    UnknownLayout l;
    int w = src.window();
    l.off.resize(w + 1);
    std::uint32_t tot = 0;
    for (int d = 0; d <= w; ++d) {
        l.off[d] = tot;
        tot += tgt.dim(d) * src.dim(d);
    }
    l.total = tot;
    return l;
}

void add_constraints_for(const LinFunctor& src, const LinFunctor& tgt, const UnknownLayout& l,
                         std::uint32_t a, std::uint32_t b, const FpMatrix& fa, const FpMatrix& ga,
                         linalg::RowSpan& rows) {
    // eta_a * F(A) = G(A) * eta_b for A: F^a -> F^b; fa = F(A), ga = G(A)
    for (std::uint32_t r = 0; r < tgt.dim(a); ++r)
        for (std::uint32_t c = 0; c < src.dim(b); ++c) {
            FpVec row(l.total);
            for (std::uint32_t k = 0; k < src.dim(a); ++k) {
                unsigned v = fa.at(k, c);
                if (v) row.set(l.at(a, r, k, src), fp::add(row.get(l.at(a, r, k, src)), v));
            }
            for (std::uint32_t k = 0; k < tgt.dim(b); ++k) {
                unsigned v = ga.at(r, k);
                if (v)
                    row.set(l.at(b, k, c, src), fp::sub(row.get(l.at(b, k, c, src)), v));
            }
            if (!row.is_zero()) rows.insert(std::move(row));
        }
}

std::vector<NatTransform> kernel_to_transforms(const LinFunctor& src, const LinFunctor& tgt,
                                               const UnknownLayout& l, const linalg::RowSpan& rows) {
    std::vector<NatTransform> out;
    int w = src.window();
    for (const FpVec& v : rows.kernel()) {
        NatTransform nt;
        nt.levels.resize(w + 1);
        for (int d = 0; d <= w; ++d) {
            FpMatrix m(tgt.dim(d), src.dim(d));
            for (std::uint32_t r = 0; r < tgt.dim(d); ++r)
                for (std::uint32_t c = 0; c < src.dim(d); ++c)
                    m.set(r, c, v.get(l.at(d, r, c, src)));
            nt.levels[d] = std::move(m);
        }
        out.push_back(std::move(nt));
    }
    return out;
}

} // namespace

std::vector<NatTransform> nat_hom(const LinFunctor& f, const LinFunctor& g) {
    if (f.site() != g.site()) throw UsageError("nat_hom: functors on different sites");
    UnknownLayout l = layout_for(f, g);
    linalg::RowSpan rows(l.total);
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        const auto& gen = f.site()->gen(id);
        add_constraints_for(f, g, l, gen.src, gen.dst, f.gen_matrix(id), g.gen_matrix(id), rows);
    }
    return kernel_to_transforms(f, g, l, rows);
}

std::vector<NatTransform> nat_hom_fullhom(const LinFunctor& f, const LinFunctor& g, std::uint64_t cap) {
    UnknownLayout l = layout_for(f, g);
    linalg::RowSpan rows(l.total);
    int w = f.window();
    for (std::uint32_t a = 0; a <= static_cast<std::uint32_t>(w); ++a)
        for (std::uint32_t b = 0; b <= static_cast<std::uint32_t>(w); ++b) {
            std::uint64_t n = linalg::hom_count(a, b);
            if (n > cap) throw CapExceeded("nat_hom_fullhom at hom(" + std::to_string(a) + "," +
                                           std::to_string(b) + ")");
            for (std::uint64_t k = 0; k < n; ++k) {
                FpMatrix mat = FpMatrix::from_index(a, b, k);
                add_constraints_for(f, g, l, a, b, f.act(mat), g.act(mat), rows);
            }
        }
    return kernel_to_transforms(f, g, l, rows);
}

// -------------------------------------------------------------- q_n

namespace {

// Morphisms F^d -> F^{c_1 + ... + c_k} up to the left action of the
// block subgroup GL(c_1) x ... x GL(c_k) (and swaps of equal-size blocks),
// which preserves every cross-effect kernel: per block the orbit
// representative is its row space in RREF padded with zero rows, and runs of
// equal block sizes carry nondecreasing block keys.
std::vector<FpMatrix> block_canonical_homs(std::uint32_t d, const std::vector<std::uint32_t>& blocks) {
    std::vector<std::vector<FpMatrix>> cand(blocks.size());
    std::vector<std::vector<std::string>> cand_keys(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        std::uint32_t c = blocks[i];
        for (std::uint32_t r = 0; r <= std::min(c, d); ++r)
            for (const FpMatrix& s : linalg::enumerate_subspaces(d, r)) {
                FpMatrix padded(c, d);
                for (std::uint32_t row = 0; row < r; ++row)
                    padded.set_row(row, s.row_vec(row));
                cand_keys[i].push_back(padded.key());
                cand[i].push_back(std::move(padded));
            }
    }
    std::uint32_t s_total = 0;
    for (auto c : blocks) s_total += c;
    std::vector<FpMatrix> out;
    std::vector<std::size_t> pick(blocks.size(), 0);
    while (true) {
        bool ok = true;
        for (std::size_t i = 1; i < blocks.size() && ok; ++i)
            if (blocks[i] == blocks[i - 1] && cand_keys[i][pick[i]] < cand_keys[i - 1][pick[i - 1]])
                ok = false;
        if (ok) {
            FpMatrix g(s_total, d);
            std::uint32_t off = 0;
            for (std::size_t i = 0; i < blocks.size(); ++i) {
                for (std::uint32_t row = 0; row < blocks[i]; ++row)
                    g.set_row(off + row, cand[i][pick[i]].row_vec(row));
                off += blocks[i];
            }
            out.push_back(std::move(g));
        }
        std::size_t i = 0;
        while (i < blocks.size()) {
            if (++pick[i] < cand[i].size()) break;
            pick[i] = 0;
            ++i;
        }
        if (i == blocks.size()) break;
    }
    return out;
}

std::vector<std::vector<std::uint32_t>> arg_tuples(std::uint32_t arity, std::uint32_t max_sum) {
    // nondecreasing tuples of positive dimensions with the given arity and sum bound
    std::vector<std::vector<std::uint32_t>> out;
    if (arity == 0 || max_sum < arity) return out;
    std::vector<std::uint32_t> cur;
    std::function<void(std::uint32_t, std::uint32_t)> rec = [&](std::uint32_t minv, std::uint32_t budget) {
        std::uint32_t left = arity - static_cast<std::uint32_t>(cur.size());
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (std::uint32_t v = minv; v * left <= budget; ++v) {
            cur.push_back(v);
            rec(v, budget - v);
            cur.pop_back();
        }
    };
    rec(1, max_sum);
    return out;
}

} // namespace

QnResult q_n(const LinFunctor& f, std::uint32_t n, std::uint64_t cap) {
    int w = f.window();
    auto tuples = arg_tuples(n + 1, static_cast<std::uint32_t>(w));
    std::vector<CrossEffectSlot> slots;
    for (const auto& t : tuples) slots.push_back(cross_effect(f, t));

    QnResult out;
    out.partial = false;
    std::vector<linalg::RowSpan> spans;
    spans.reserve(w + 1);
    for (int d = 0; d <= w; ++d) {
        linalg::RowSpan span(f.dim(d));
        if (d > 0 && static_cast<std::uint64_t>(n + 1) * d > static_cast<std::uint64_t>(w))
            out.partial = true;
        // D_{n+1}(F^d) lies inside the constant-free part
        std::size_t saturation = f.dim(d) - std::min(f.dim(d), f.dim(0));
        bool full = false;
        for (const auto& slot : slots) {
            if (slot.basis.empty() || full) continue;
            std::uint32_t s = 0;
            for (auto dd : slot.arg_dims) s += dd;
            std::vector<FpMatrix> homs = block_canonical_homs(d, slot.arg_dims);
            if (homs.size() * slot.basis.size() > cap)
                throw CapExceeded("q_n image enumeration at hom(" + std::to_string(d) + "," +
                                  std::to_string(s) + ")");
            FpVec cur, tmp;
            for (const FpMatrix& gmat : homs) {
                if (full) break;
                site::Word word = f.site()->factor(gmat).flat();
                for (const FpVec& kv : slot.basis) {
                    cur = kv;
                    for (auto id : word) {
                        f.gen_matrix(id).apply_to(cur, tmp);
                        std::swap(cur, tmp);
                    }
                    if (!cur.is_zero()) span.insert(cur);
                }
                full = (span.dim() >= saturation);
            }
        }
        spans.push_back(std::move(span));
    }

    // complement coordinates give the quotient basis; projection = full reduction
    std::vector<std::vector<std::uint32_t>> reps(w + 1);
    std::vector<std::uint32_t> qdims(w + 1);
    std::vector<FpMatrix> proj(w + 1);
    for (int d = 0; d <= w; ++d) {
        reps[d] = spans[d].free_coords();
        qdims[d] = static_cast<std::uint32_t>(reps[d].size());
        FpMatrix p(qdims[d], f.dim(d));
        for (std::uint32_t j = 0; j < f.dim(d); ++j) {
            FpVec e(f.dim(d));
            e.set(j, 1);
            FpVec r = spans[d].reduce(std::move(e));
            for (std::uint32_t q = 0; q < qdims[d]; ++q)
                if (r.get(reps[d][q])) p.set(q, j, r.get(reps[d][q]));
        }
        proj[d] = std::move(p);
    }

    std::vector<FpMatrix> acts;
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d)
        for (auto c : reps[d]) labels[d].push_back(f.basis_label(d, c));
    for (std::uint32_t id = 0; id < f.site()->generators().size(); ++id) {
        const auto& gen = f.site()->gen(id);
        FpMatrix m(qdims[gen.src], qdims[gen.dst]);
        for (std::uint32_t c = 0; c < qdims[gen.dst]; ++c) {
            FpVec lift(f.dim(gen.dst));
            lift.set(reps[gen.dst][c], 1);
            FpVec img = f.gen_matrix(id).apply(lift);
            FpVec pr = proj[gen.src].apply(img);
            for (std::uint32_t r = 0; r < qdims[gen.src]; ++r)
                if (pr.get(r)) m.set(r, c, pr.get(r));
        }
        acts.push_back(std::move(m));
    }

    out.quotient = LinFunctor(f.site(), "q_" + std::to_string(n) + "(" + f.name() + ")",
                              std::move(qdims), std::move(acts), std::move(labels));
    out.projection.levels = std::move(proj);
    return out;
}

// -------------------------------------------------------------- maps into linear targets

void check_natural_linear(const MapToLinear& u) {
    const SetPresheaf& x = *u.x;
    const LinFunctor& g = *u.g;
    for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
        const auto& gen = x.site()->gen(id);
        const presheaf::ActTable& t = x.gen_action(id);
        const FpMatrix& m = g.gen_matrix(id);
        for (std::uint32_t i = 0; i < x.size(gen.dst); ++i)
            if (!(m.apply(u.img[gen.dst][i]) == u.img[gen.src][t[i]]))
                throw NaturalityViolation("map to linear target fails at generator " + gen.label);
    }
}

presheaf::MonoResult mono_test_linear(const MapToLinear& u) {
    check_natural_linear(u);
    const SetPresheaf& x = *u.x;
    const LinFunctor& g = *u.g;
    int w = x.window();
    presheaf::RankFiltration fx = presheaf::rank_filtration(x);
    if (auto nb = fx.bounded_rank()) {
        int n = *nb;
        std::map<std::string, std::uint32_t> seen;
        for (std::uint32_t i = 0; i < x.size(n); ++i) {
            auto [it, fresh] = seen.emplace(u.img[n][i].key(), i);
            if (!fresh)
                return {false, "collision at dimension " + std::to_string(n) + " (bounded criterion)"};
        }
        return {true, "injective at dimension " + std::to_string(n) + " with X = X_{<=" +
                          std::to_string(n) + "}"};
    }
    for (int k = 0; k <= w; ++k) {
        // regular vectors of sets(G) at level k: those outside every im G(f),
        // f in hom(F^k, F^{k-1}); the image only depends on the left GL-orbit
        std::vector<linalg::RowSpan> images;
        if (k > 0) {
            for (const FpMatrix& f : block_canonical_homs(k, {static_cast<std::uint32_t>(k - 1)})) {
                linalg::RowSpan span(g.dim(k));
                for (std::uint32_t j = 0; j < g.dim(k - 1); ++j) {
                    FpVec e(g.dim(k - 1));
                    e.set(j, 1);
                    span.insert(g.act_vec(f, std::move(e)));
                }
                images.push_back(std::move(span));
            }
        }
        std::map<std::string, std::uint32_t> seen;
        for (auto i : fx.regular[k]) {
            const FpVec& v = u.img[k][i];
            bool regular = true;
            if (k > 0) {
                for (const auto& span : images)
                    if (span.contains(v)) { regular = false; break; }
            }
            if (!regular)
                return {false, "regular section maps into the lower filtration at dimension " +
                                   std::to_string(k)};
            auto [it, fresh] = seen.emplace(v.key(), i);
            if (!fresh)
                return {false, "collision on regular sections at dimension " + std::to_string(k)};
        }
    }
    return {true, "injective on regular sections at all window dimensions"};
}

// -------------------------------------------------------------- hom sets

std::size_t set_hom_linear_count_log(const SetPresheaf& x, const LinFunctor& g) {
    return nat_hom(linearize(x), g).size();
}

std::vector<MapToLinear> set_hom_linear(const SetPresheaf& x, const LinFunctor& g, std::uint64_t cap) {
    LinFunctor fx = linearize(x);
    std::vector<NatTransform> basis = nat_hom(fx, g);
    unsigned p = fp::prime();
    std::uint64_t total = fp::pow_u64(p, static_cast<unsigned>(basis.size()));
    if (total > cap) throw CapExceeded("set_hom enumeration of p^" + std::to_string(basis.size()) + " maps");
    int w = x.window();
    std::vector<MapToLinear> out;
    out.reserve(total);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        MapToLinear m;
        m.x = &x;
        m.g = &g;
        m.img.resize(w + 1);
        std::uint64_t rest = idx;
        std::vector<unsigned> coeff(basis.size());
        for (std::size_t i = 0; i < basis.size(); ++i) {
            coeff[i] = static_cast<unsigned>(rest % p);
            rest /= p;
        }
        for (int d = 0; d <= w; ++d) {
            m.img[d].resize(x.size(d), FpVec(g.dim(d)));
            for (std::uint32_t xi = 0; xi < x.size(d); ++xi) {
                FpVec v(g.dim(d));
                for (std::size_t i = 0; i < basis.size(); ++i)
                    if (coeff[i]) v.add_scaled(basis[i].levels[d].col_vec(xi), coeff[i]);
                m.img[d][xi] = std::move(v);
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<std::vector<std::vector<std::uint32_t>>> set_hom_tables(const SetPresheaf& x,
                                                                    const EmbeddedTarget& t,
                                                                    std::uint64_t cap) {
    int w = x.window();
    std::vector<std::map<std::string, std::uint32_t>> rev(w + 1);
    for (int d = 0; d <= w; ++d)
        for (std::uint32_t y = 0; y < t.emb[d].size(); ++y)
            rev[d].emplace(t.emb[d][y].key(), y);
    std::vector<std::vector<std::vector<std::uint32_t>>> out;
    for (const MapToLinear& m : set_hom_linear(x, *t.g, cap)) {
        std::vector<std::vector<std::uint32_t>> table(w + 1);
        bool ok = true;
        for (int d = 0; d <= w && ok; ++d) {
            table[d].resize(x.size(d));
            for (std::uint32_t xi = 0; xi < x.size(d); ++xi) {
                auto it = rev[d].find(m.img[d][xi].key());
                if (it == rev[d].end()) { ok = false; break; }
                table[d][xi] = it->second;
            }
        }
        if (ok) out.push_back(std::move(table));
    }
    return out;
}

std::uint64_t set_end_count(const SetPresheaf& x, std::uint64_t cap) {
    FinitenessResult fr = finiteness_degree(x, cap);
    if (!fr.degree) throw Unsupported("set_end: finiteness degree not detected in window");
    LinFunctor fx = linearize(x);
    QnResult q = q_n(fx, static_cast<std::uint32_t>(*fr.degree), cap);
    EmbeddedTarget t;
    t.y = &x;
    t.g = &q.quotient;
    t.emb.resize(x.window() + 1);
    for (int d = 0; d <= x.window(); ++d) {
        t.emb[d].reserve(x.size(d));
        for (std::uint32_t xi = 0; xi < x.size(d); ++xi)
            t.emb[d].push_back(q.projection.levels[d].col_vec(xi));
    }
    return set_hom_tables(x, t, cap).size();
}

// -------------------------------------------------------------- finiteness

FinitenessResult finiteness_degree(const SetPresheaf& x, std::uint64_t cap) {
    FinitenessResult out;
    int w = x.window();
    LinFunctor fx = linearize(x);
    for (std::uint32_t n = 0; n + 1 <= static_cast<std::uint32_t>(w); ++n) {
        QnResult q = q_n(fx, n, cap);
        MapToLinear u;
        u.x = &x;
        u.g = &q.quotient;
        u.img.resize(w + 1);
        for (int d = 0; d <= w; ++d) {
            u.img[d].reserve(x.size(d));
            for (std::uint32_t xi = 0; xi < x.size(d); ++xi)
                u.img[d].push_back(q.projection.levels[d].col_vec(xi));
        }
        // image presheaf X_n with induced actions
        std::vector<std::uint32_t> sizes(w + 1);
        std::vector<std::vector<std::uint32_t>> proj_tbl(w + 1);
        std::vector<std::vector<std::uint32_t>> witness(w + 1);
        std::vector<std::map<std::string, std::uint32_t>> idx(w + 1);
        for (int d = 0; d <= w; ++d) {
            proj_tbl[d].resize(x.size(d));
            for (std::uint32_t xi = 0; xi < x.size(d); ++xi) {
                auto [it, fresh] = idx[d].emplace(u.img[d][xi].key(),
                                                  static_cast<std::uint32_t>(witness[d].size()));
                if (fresh) witness[d].push_back(xi);
                proj_tbl[d][xi] = it->second;
            }
            sizes[d] = static_cast<std::uint32_t>(witness[d].size());
        }
        std::vector<presheaf::ActTable> acts;
        for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
            const auto& gen = x.site()->gen(id);
            const presheaf::ActTable& t = x.gen_action(id);
            presheaf::ActTable tq(sizes[gen.dst]);
            for (std::uint32_t c = 0; c < sizes[gen.dst]; ++c)
                tq[c] = proj_tbl[gen.src][t[witness[gen.dst][c]]];
            acts.push_back(std::move(tq));
        }
        out.tower.emplace_back(x.site(), x.name() + "_" + std::to_string(n), std::move(sizes),
                               std::move(acts));
        out.tower_proj.push_back(std::move(proj_tbl));
        presheaf::MonoResult mr = mono_test_linear(u);
        out.unit_injective.push_back(mr.mono);
        out.partial.push_back(q.partial);
        if (mr.mono && !out.degree) out.degree = static_cast<int>(n);
    }
    return out;
}

// -------------------------------------------------------------- induced linear

InducedLinearResult induced_linear(std::shared_ptr<const TruncatedSite> site,
                                   const presheaf::EndSetTable& z, std::uint64_t cap) {
    InducedLinearResult out{presheaf::induced(site, z, cap), LinFunctor{}, MapToLinear{}, std::nullopt};
    int w = site->window();
    std::vector<FpMatrix> endo_gens = presheaf::end_monoid_generators(*site, z.n);
    std::vector<std::uint64_t> endo_idx;
    for (const auto& f : endo_gens) endo_idx.push_back(f.to_index());

    // relation span per level over the basis Z x hom(F^d, F^n)
    std::vector<linalg::RowSpan> spans;
    std::vector<std::uint64_t> hcount(w + 1);
    for (int d = 0; d <= w; ++d) {
        std::uint64_t h = linalg::hom_count(d, z.n);
        hcount[d] = h;
        std::uint64_t width = h * z.size;
        if (width > cap) throw CapExceeded("induced_linear basis at dimension " + std::to_string(d));
        linalg::RowSpan span(static_cast<std::uint32_t>(width));
        for (std::size_t gi = 0; gi < endo_gens.size(); ++gi) {
            for (std::uint64_t k = 0; k < h; ++k) {
                std::uint64_t fg = endo_gens[gi].mul(FpMatrix::from_index(d, z.n, k)).to_index();
                for (std::uint32_t zz = 0; zz < z.size; ++zz) {
                    std::uint32_t zf = z.apply(zz, endo_idx[gi]);
                    std::uint64_t a = static_cast<std::uint64_t>(zf) * h + k;
                    std::uint64_t b = static_cast<std::uint64_t>(zz) * h + fg;
                    if (a == b) continue;
                    FpVec rel(static_cast<std::uint32_t>(width));
                    rel.set(static_cast<std::uint32_t>(a), 1);
                    rel.set(static_cast<std::uint32_t>(b), fp::neg(1));
                    span.insert(std::move(rel));
                }
            }
        }
        spans.push_back(std::move(span));
    }

    std::vector<std::vector<std::uint32_t>> reps(w + 1);
    std::vector<std::uint32_t> qdims(w + 1);
    for (int d = 0; d <= w; ++d) {
        reps[d] = spans[d].free_coords();
        qdims[d] = static_cast<std::uint32_t>(reps[d].size());
    }
    auto project = [&](int d, std::uint64_t item) {
        // note: reps stays valid here; qdims is moved into g_z below
        FpVec e(spans[d].width());
        e.set(static_cast<std::uint32_t>(item), 1);
        FpVec r = spans[d].reduce(std::move(e));
        std::uint32_t qd = static_cast<std::uint32_t>(reps[d].size());
        FpVec q(qd);
        for (std::uint32_t j = 0; j < qd; ++j)
            q.set(j, r.get(reps[d][j]));
        return q;
    };

    std::vector<FpMatrix> acts;
    for (std::uint32_t id = 0; id < site->generators().size(); ++id) {
        const auto& gen = site->gen(id);
        FpMatrix m(qdims[gen.src], qdims[gen.dst]);
        for (std::uint32_t c = 0; c < qdims[gen.dst]; ++c) {
            std::uint64_t item = reps[gen.dst][c];
            std::uint32_t zz = static_cast<std::uint32_t>(item / hcount[gen.dst]);
            std::uint64_t k = item % hcount[gen.dst];
            std::uint64_t gk = FpMatrix::from_index(gen.dst, z.n, k).mul(gen.mat).to_index();
            FpVec q = project(gen.src, static_cast<std::uint64_t>(zz) * hcount[gen.src] + gk);
            for (std::uint32_t r = 0; r < qdims[gen.src]; ++r)
                if (q.get(r)) m.set(r, c, q.get(r));
        }
        acts.push_back(std::move(m));
    }
    out.g_z = LinFunctor(site, "G_Z(n=" + std::to_string(z.n) + ")", std::move(qdims), std::move(acts));

    // canonical map X_Z -> sets(G_Z): needs the representative items of X_Z's classes,
    // which presheaf::induced chose as the minimal items; recompute them here the same way
    {
        std::vector<FpMatrix> endo = endo_gens;
        out.canonical.x = &out.x_z;
        out.canonical.g = &out.g_z;
        out.canonical.img.resize(w + 1);
        for (int d = 0; d <= w; ++d) {
            // rebuild the union-find to recover class representatives
            std::uint64_t h = hcount[d];
            std::uint64_t items = h * z.size;
            std::vector<std::uint32_t> parent(items);
            std::iota(parent.begin(), parent.end(), 0u);
            std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t i) {
                while (parent[i] != i) {
                    parent[i] = parent[parent[i]];
                    i = parent[i];
                }
                return i;
            };
            auto unite = [&](std::uint32_t a, std::uint32_t b) {
                a = find(a);
                b = find(b);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            };
            for (std::size_t gi = 0; gi < endo.size(); ++gi)
                for (std::uint64_t k = 0; k < h; ++k) {
                    std::uint64_t fg = endo[gi].mul(FpMatrix::from_index(d, z.n, k)).to_index();
                    for (std::uint32_t zz = 0; zz < z.size; ++zz) {
                        std::uint32_t zf = z.apply(zz, endo_idx[gi]);
                        unite(static_cast<std::uint32_t>(zf * h + k),
                              static_cast<std::uint32_t>(zz * h + fg));
                    }
                }
            std::vector<std::uint32_t> mins;
            std::vector<std::uint32_t> cls(items, UINT32_MAX);
            for (std::uint64_t i = 0; i < items; ++i) {
                std::uint32_t root = find(static_cast<std::uint32_t>(i));
                if (cls[root] == UINT32_MAX) {
                    cls[root] = static_cast<std::uint32_t>(mins.size());
                    mins.push_back(static_cast<std::uint32_t>(i));
                }
            }
            if (mins.size() != out.x_z.size(d))
                throw UsageError("induced_linear: class count mismatch with induced presheaf");
            out.canonical.img[d].reserve(mins.size());
            for (auto item : mins)
                out.canonical.img[d].push_back(project(d, item));
        }
    }

    for (std::uint32_t t = 0; t + 1 <= static_cast<std::uint32_t>(w); ++t) {
        QnResult q = q_n(out.g_z, t, cap);
        MapToLinear comp;
        comp.x = &out.x_z;
        comp.g = &q.quotient;
        comp.img.resize(w + 1);
        for (int d = 0; d <= w; ++d) {
            comp.img[d].reserve(out.x_z.size(d));
            for (std::uint32_t i = 0; i < out.x_z.size(d); ++i)
                comp.img[d].push_back(q.projection.levels[d].apply(out.canonical.img[d][i]));
        }
        if (mono_test_linear(comp).mono) {
            out.minimal_t = static_cast<int>(t);
            break;
        }
    }
    return out;
}

// -------------------------------------------------------------- split-rank

SetPresheaf rank_subquotient(const SetPresheaf& x, const presheaf::RankFiltration& filt,
                             std::uint32_t n) {
    int w = x.window();
    std::vector<std::vector<std::uint32_t>> stratum(w + 1);   // new elements at stage n
    std::vector<std::vector<std::uint32_t>> slot(w + 1);      // x index -> local index (or 0 = *)
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) {
        slot[d].assign(x.size(d), 0);
        const auto& cur = filt.le[n][d];
        const std::vector<std::uint32_t> empty;
        const auto& prev = (n == 0) ? empty : filt.le[n - 1][d];
        for (auto i : cur) {
            if (!std::binary_search(prev.begin(), prev.end(), i)) {
                slot[d][i] = static_cast<std::uint32_t>(stratum[d].size()) + 1;
                stratum[d].push_back(i);
            }
        }
        sizes[d] = static_cast<std::uint32_t>(stratum[d].size()) + 1;
    }
    std::vector<presheaf::ActTable> acts;
    for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
        const auto& gen = x.site()->gen(id);
        const presheaf::ActTable& t = x.gen_action(id);
        presheaf::ActTable tq(sizes[gen.dst]);
        tq[0] = 0;
        for (std::uint32_t c = 0; c < stratum[gen.dst].size(); ++c)
            tq[c + 1] = slot[gen.src][t[stratum[gen.dst][c]]];
        acts.push_back(std::move(tq));
    }
    return SetPresheaf(x.site(), x.name() + "_rk" + std::to_string(n), std::move(sizes),
                       std::move(acts));
}

SetPresheaf splitrank(const LinFunctor& f, std::uint64_t cap) {
    ConstantSplit cs = split_constant(f);
    if (cs.constant_part.dim(0) != 0)
        throw UsageError("splitrank expects a constant-free functor (split first)");
    SetPresheaf x = sets_of(f, cap);
    presheaf::RankFiltration filt = presheaf::rank_filtration(x);
    SetPresheaf acc = presheaf::one_point(x.site());
    for (std::uint32_t n = 1; n <= static_cast<std::uint32_t>(x.window()); ++n) {
        SetPresheaf part = rank_subquotient(x, filt, n);
        acc = presheaf::wedge(acc, part);
    }
    acc.set_name("splitrank(" + f.name() + ")");
    return acc;
}

} // namespace fpre::lin
