#include "fpresheaf/site.hpp"

#include <algorithm>

#include "fpresheaf/errors.hpp"

namespace fpre::site {

Word CanonicalFactorization::flat() const {
    Word w;
    w.reserve(tau.size() + incl.size() + proj.size() + sigma.size());
    w.insert(w.end(), tau.begin(), tau.end());
    w.insert(w.end(), incl.begin(), incl.end());
    w.insert(w.end(), proj.begin(), proj.end());
    w.insert(w.end(), sigma.begin(), sigma.end());
    return w;
}

TruncatedSite::TruncatedSite(int window) : window_(window), p_(fp::prime()) {
    if (window < 0 || window > 5) throw UsageError("window must be in 0..5");
    for (std::uint32_t d = 1; d <= static_cast<std::uint32_t>(window); ++d) {
        for (std::uint32_t i = 0; i < d; ++i)
            for (std::uint32_t j = 0; j < d; ++j) {
                if (i == j) continue;
                FpMatrix t = FpMatrix::identity(d);
                t.set(i, j, 1);
                gens_.push_back({std::move(t), d, d, GenKind::Transvection,
                                 "T" + std::to_string(d) + "_" + std::to_string(i) + std::to_string(j)});
            }
        if (p_ > 2) {
            FpMatrix dg = FpMatrix::identity(d);
            dg.set(d - 1, d - 1, fp::primitive_root());
            gens_.push_back({std::move(dg), d, d, GenKind::Dilation, "D" + std::to_string(d)});
        }
    }
    iota_ids_.resize(window >= 1 ? window : 0);
    pi_ids_.resize(window >= 1 ? window : 0);
    for (std::uint32_t d = 0; d + 1 <= static_cast<std::uint32_t>(window); ++d) {
        FpMatrix io(d + 1, d);
        for (std::uint32_t i = 0; i < d; ++i) io.set(i, i, 1);
        iota_ids_[d] = static_cast<std::uint32_t>(gens_.size());
        gens_.push_back({std::move(io), d, d + 1, GenKind::Inclusion, "i" + std::to_string(d)});
        FpMatrix pr(d, d + 1);
        for (std::uint32_t i = 0; i < d; ++i) pr.set(i, i, 1);
        pi_ids_[d] = static_cast<std::uint32_t>(gens_.size());
        gens_.push_back({std::move(pr), d + 1, d, GenKind::Projection, "p" + std::to_string(d)});
    }
    for (std::uint32_t id = 0; id < gens_.size(); ++id)
        by_key_.emplace(gens_[id].mat.key(), id);
}

int TruncatedSite::generator_id(const FpMatrix& m) const {
    auto it = by_key_.find(m.key());
    return it == by_key_.end() ? -1 : static_cast<int>(it->second);
}

std::uint32_t TruncatedSite::iota_id(std::uint32_t d) const {
    if (d + 1 > static_cast<std::uint32_t>(window_)) throw WindowExceeded("iota_" + std::to_string(d));
    return iota_ids_[d];
}

std::uint32_t TruncatedSite::pi_id(std::uint32_t d) const {
    if (d + 1 > static_cast<std::uint32_t>(window_)) throw WindowExceeded("pi_" + std::to_string(d));
    return pi_ids_[d];
}

FpMatrix TruncatedSite::recompose(const Word& w, std::uint32_t a, std::uint32_t b) const {
    FpMatrix acc = FpMatrix::identity(a);
    std::uint32_t cur = a;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        const Generator& g = gens_[*it];
        if (g.src != cur) throw UsageError("word not composable at " + g.label);
        acc = g.mat.mul(acc);
        cur = g.dst;
    }
    if (cur != b) throw UsageError("word endpoints mismatch");
    return acc;
}

namespace {

struct Op {
    std::uint32_t gen_id;
    unsigned power;
};

} // namespace

Word TruncatedSite::gl_word(const FpMatrix& m) const {
    std::uint32_t d = m.rows();
    if (m.cols() != d) throw UsageError("gl_word needs a square matrix");
    if (d == 0) return {};
    if (static_cast<int>(d) > window_) throw WindowExceeded("gl_word at dimension " + std::to_string(d));
    unsigned p = p_;

    auto tid = [&](std::uint32_t i, std::uint32_t j) {
        FpMatrix t = FpMatrix::identity(d);
        t.set(i, j, 1);
        int id = generator_id(t);
        if (id < 0) throw UsageError("missing transvection generator");
        return static_cast<std::uint32_t>(id);
    };

    FpMatrix a = m;
    std::vector<Op> ops; // left multiplications, in application order

    auto apply_transvection = [&](std::uint32_t i, std::uint32_t j, unsigned c) {
        c %= p;
        if (c == 0) return;
        a.add_scaled_row(i, j, c);
        ops.push_back({tid(i, j), c});
    };

    // phase 1: reduce to a diagonal matrix with transvection row operations
    for (std::uint32_t c = 0; c < d; ++c) {
        if (a.at(c, c) == 0) {
            std::uint32_t pivot = d;
            for (std::uint32_t i = c + 1; i < d; ++i)
                if (a.at(i, c) != 0) { pivot = i; break; }
            if (pivot == d) throw UsageError("gl_word: matrix not invertible");
            apply_transvection(c, pivot, 1);
        }
        unsigned u = a.at(c, c);
        unsigned uinv = fp::inv(u);
        for (std::uint32_t i = 0; i < d; ++i) {
            if (i == c) continue;
            unsigned v = a.at(i, c);
            if (v) apply_transvection(i, c, fp::mul(fp::neg(v), uinv));
        }
    }

    // phase 2: sweep diagonal units into the last coordinate via SL_2 words
    if (p > 2) {
        auto apply_diag_pair = [&](std::uint32_t i, unsigned alpha) {
            // left-multiply by diag(alpha, alpha^{-1}) on coordinates (i, i+1):
            // w(alpha) * w(1)^{-1} with w(x) = T_ij(x) T_ji(-x^{-1}) T_ij(x)
            std::uint32_t j = i + 1;
            // w(1)^{-1} applied first: T_ij(-1) T_ji(1) T_ij(-1) read right-to-left
            apply_transvection(i, j, fp::neg(1));
            apply_transvection(j, i, 1);
            apply_transvection(i, j, fp::neg(1));
            unsigned ainv = fp::inv(alpha);
            apply_transvection(i, j, alpha);
            apply_transvection(j, i, fp::neg(ainv));
            apply_transvection(i, j, alpha);
        };
        for (std::uint32_t i = 0; i + 1 < d; ++i) {
            unsigned u = a.at(i, i);
            if (u != 1) apply_diag_pair(i, fp::inv(u));
        }
        unsigned delta = a.at(d - 1, d - 1);
        if (delta != 1) {
            unsigned g = fp::primitive_root();
            unsigned k = 0, acc = 1;
            while (acc != delta) { acc = fp::mul(acc, g); ++k; }
            FpMatrix dg = FpMatrix::identity(d);
            dg.set(d - 1, d - 1, g);
            int did = generator_id(dg);
            if (did < 0) throw UsageError("missing dilation generator");
            unsigned need = (p - 1 - k) % (p - 1);
            if (need) {
                for (unsigned t = 0; t < need; ++t) a.scale_row(d - 1, g);
                ops.push_back({static_cast<std::uint32_t>(did), need});
            }
        }
    }
    if (!a.is_identity()) throw UsageError("gl_word reduction failed");

    // m = L_1^{-1} o L_2^{-1} o ... in composition order; expand generator powers
    Word w;
    for (const Op& op : ops) {
        const Generator& g = gens_[op.gen_id];
        unsigned order = (g.kind == GenKind::Dilation) ? p - 1 : p;
        unsigned invpow = (order - op.power % order) % order;
        for (unsigned t = 0; t < invpow; ++t) w.push_back(op.gen_id);
    }
    return w;
}

CanonicalFactorization TruncatedSite::factor(const FpMatrix& f) const {
    if (fp::prime() != p_) throw UsageError("site constructed under a different prime");
    if (static_cast<int>(f.rows()) > window_ || static_cast<int>(f.cols()) > window_)
        throw WindowExceeded("factor of a " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()) + " map");
    std::string k = f.key();
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = factor_cache_.find(k);
        if (it != factor_cache_.end()) return it->second;
    }
    CanonicalFactorization cf = factor_uncached(f);
    std::lock_guard<std::mutex> lk(mu_);
    factor_cache_.emplace(std::move(k), cf);
    return cf;
}

CanonicalFactorization TruncatedSite::factor_uncached(const FpMatrix& f) const {
    std::uint32_t b = f.rows(), a = f.cols();
    linalg::RrefResult rr = linalg::rref(f);
    std::uint32_t r = rr.rank;

    // rank factorization f = C * F with C the pivot columns, F the rref rows;
    // extend C to T in GL_b (columns) and F to S in GL_a (rows), then
    // f = T * E_r * S with E_r = incl o proj.
    FpMatrix T(b, b);
    {
        linalg::RowSpan span(b);
        std::uint32_t col = 0;
        for (std::uint32_t i = 0; i < r; ++i) {
            FpVec cv = f.col_vec(rr.pivot_cols[i]);
            span.insert(cv);
            for (std::uint32_t rw = 0; rw < b; ++rw) T.set(rw, col, cv.get(rw));
            ++col;
        }
        // complete with the standard vectors at the free coordinates
        for (std::uint32_t e : span.free_coords()) {
            if (col >= b) break;
            T.set(e, col, 1);
            ++col;
        }
    }
    FpMatrix S(a, a);
    {
        linalg::RowSpan span(a);
        std::uint32_t row = 0;
        for (std::uint32_t i = 0; i < r; ++i) {
            FpVec rv = rr.reduced.row_vec(i);
            span.insert(rv);
            S.set_row(row, rv);
            ++row;
        }
        for (std::uint32_t e : span.free_coords()) {
            if (row >= a) break;
            FpVec ev(a);
            ev.set(e, 1);
            S.set_row(row, ev);
            ++row;
        }
    }

    CanonicalFactorization cf;
    cf.rank = r;
    cf.tau = gl_word(T);
    cf.sigma = gl_word(S);
    for (std::uint32_t d = b; d-- > r;) cf.incl.push_back(iota_ids_[d]); // iota_{b-1} ... iota_r
    for (std::uint32_t d = r; d < a; ++d) cf.proj.push_back(pi_ids_[d]); // pi_r ... pi_{a-1}
    return cf;
}

void TruncatedSite::for_each_functoriality_pair(
    const Schedule& s, const std::function<bool(const FpMatrix&, const FpMatrix&)>& fn) const {
    int D = std::min(s.exhaustive_dim, window_);
    for (std::uint32_t aa = 0; aa <= static_cast<std::uint32_t>(D); ++aa)
        for (std::uint32_t bb = 0; bb <= static_cast<std::uint32_t>(D); ++bb)
            for (std::uint32_t cc = 0; cc <= static_cast<std::uint32_t>(D); ++cc) {
                std::uint64_t ng = linalg::hom_count(aa, bb), nf = linalg::hom_count(bb, cc);
                for (std::uint64_t kf = 0; kf < nf; ++kf) {
                    FpMatrix f = FpMatrix::from_index(bb, cc, kf);
                    for (std::uint64_t kg = 0; kg < ng; ++kg)
                        if (!fn(f, FpMatrix::from_index(aa, bb, kg))) return;
                }
            }
    if (window_ > D && s.samples > 0) {
        std::mt19937_64 rng(s.seed ^ 0x9e3779b97f4a7c15ull);
        std::uniform_int_distribution<std::uint32_t> dim_dist(0, static_cast<std::uint32_t>(window_));
        for (int t = 0; t < s.samples; ++t) {
            std::uint32_t aa = dim_dist(rng), bb = dim_dist(rng), cc = dim_dist(rng);
            if (static_cast<int>(std::max({aa, bb, cc})) <= D) cc = static_cast<std::uint32_t>(window_);
            std::uint64_t ng = linalg::hom_count(aa, bb), nf = linalg::hom_count(bb, cc);
            if (nf == 0 || ng == 0) continue;
            std::uint64_t kf = rng() % nf, kg = rng() % ng;
            if (!fn(FpMatrix::from_index(bb, cc, kf), FpMatrix::from_index(aa, bb, kg))) return;
        }
    }
}

Schedule TruncatedSite::default_schedule(std::uint64_t seed) const {
    Schedule s;
    s.exhaustive_dim = (p_ == 2) ? 3 : 2;
    s.samples = 256;
    s.seed = seed;
    return s;
}

std::vector<std::pair<std::string, CanonicalFactorization>> TruncatedSite::export_factor_cache() const {
    std::lock_guard<std::mutex> lk(mu_);
    std::vector<std::pair<std::string, CanonicalFactorization>> out;
    out.reserve(factor_cache_.size());
    for (const auto& [k, cf] : factor_cache_)
        out.emplace_back(k, cf);
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

void TruncatedSite::import_factor_cache(
    const std::vector<std::pair<std::string, CanonicalFactorization>>& entries) const {
    for (const auto& [key, cf] : entries) {
        if (key.size() < 4) continue;
        auto b = static_cast<std::uint32_t>(static_cast<unsigned char>(key[0])) |
                 (static_cast<std::uint32_t>(static_cast<unsigned char>(key[1])) << 8);
        auto a = static_cast<std::uint32_t>(static_cast<unsigned char>(key[2])) |
                 (static_cast<std::uint32_t>(static_cast<unsigned char>(key[3])) << 8);
        bool ok = true;
        for (auto id : cf.flat())
            if (id >= gens_.size()) { ok = false; break; }
        if (!ok) continue;
        // validate by recomposition; corrupt entries are dropped silently
        try {
            FpMatrix m = recompose(cf.flat(), a, b);
            if (m.key() != key) continue;
            std::lock_guard<std::mutex> lk(mu_);
            factor_cache_.emplace(key, cf);
        } catch (const Error&) {
            continue;
        }
    }
}

std::shared_ptr<const TruncatedSite> make_site(int window) {
    return std::make_shared<const TruncatedSite>(window);
}

} // namespace fpre::site
