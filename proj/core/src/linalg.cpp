#include "fpresheaf/linalg.hpp"

#include <algorithm>

#include "fpresheaf/errors.hpp"

namespace fpre::linalg {

RrefResult rref(const FpMatrix& m) {
    RrefResult out;
    out.reduced = m;
    FpMatrix& a = out.reduced;
    std::uint32_t r = 0;
    for (std::uint32_t c = 0; c < a.cols() && r < a.rows(); ++c) {
        std::uint32_t piv = a.rows();
        for (std::uint32_t i = r; i < a.rows(); ++i)
            if (a.at(i, c) != 0) { piv = i; break; }
        if (piv == a.rows()) continue;
        a.swap_rows(r, piv);
        unsigned lead = a.at(r, c);
        if (lead != 1) a.scale_row(r, fp::inv(lead));
        for (std::uint32_t i = 0; i < a.rows(); ++i) {
            if (i == r) continue;
            unsigned v = a.at(i, c);
            if (v) a.add_scaled_row(i, r, fp::neg(v));
        }
        out.pivot_cols.push_back(c);
        ++r;
    }
    out.rank = r;
    return out;
}

std::uint32_t rank(const FpMatrix& m) { return rref(m).rank; }

std::vector<FpVec> kernel_basis(const FpMatrix& m) {
    RrefResult rr = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : rr.pivot_cols) is_pivot[c] = true;
    std::vector<FpVec> out;
    for (std::uint32_t f = 0; f < m.cols(); ++f) {
        if (is_pivot[f]) continue;
        FpVec v(m.cols());
        v.set(f, 1);
        for (std::uint32_t i = 0; i < rr.pivot_cols.size(); ++i) {
            unsigned coeff = rr.reduced.at(i, f);
            if (coeff) v.set(rr.pivot_cols[i], fp::neg(coeff));
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<FpVec> image_basis(const FpMatrix& m) {
    RrefResult rr = rref(m);
    std::vector<FpVec> out;
    out.reserve(rr.rank);
    for (auto c : rr.pivot_cols)
        out.push_back(m.col_vec(c));
    return out;
}

std::optional<FpVec> solve(const FpMatrix& m, const FpVec& b) {
    if (b.size() != m.rows()) throw UsageError("solve: rhs length mismatch");
    FpMatrix aug(m.rows(), m.cols() + 1);
    for (std::uint32_t r = 0; r < m.rows(); ++r) {
        for (std::uint32_t c = 0; c < m.cols(); ++c)
            aug.set(r, c, m.at(r, c));
        aug.set(r, m.cols(), b.get(r));
    }
    RrefResult rr = rref(aug);
    FpVec x(m.cols());
    for (std::uint32_t i = 0; i < rr.pivot_cols.size(); ++i) {
        if (rr.pivot_cols[i] == m.cols()) return std::nullopt; // pivot in rhs column
        x.set(rr.pivot_cols[i], rr.reduced.at(i, m.cols()));
    }
    return x;
}

bool RowSpan::insert(FpVec v) {
    v = reduce(std::move(v));
    int piv = v.first_nonzero();
    if (piv < 0) return false;
    unsigned lead = v.get(static_cast<std::uint32_t>(piv));
    if (lead != 1) v.scale(fp::inv(lead));
    for (auto& [p, row] : rows_) {
        unsigned c = row.get(static_cast<std::uint32_t>(piv));
        if (c) row.add_scaled(v, fp::neg(c));
    }
    rows_.emplace(static_cast<std::uint32_t>(piv), std::move(v));
    return true;
}

FpVec RowSpan::reduce(FpVec v) const {
    for (const auto& [p, row] : rows_) {
        unsigned c = v.get(p);
        if (c) v.add_scaled(row, fp::neg(c));
    }
    return v;
}

std::vector<std::uint32_t> RowSpan::free_coords() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < width_; ++i)
        if (!rows_.count(i)) out.push_back(i);
    return out;
}

std::vector<FpVec> RowSpan::kernel() const {
    std::vector<FpVec> out;
    for (std::uint32_t f : free_coords()) {
        FpVec v(width_);
        v.set(f, 1);
        for (const auto& [p, row] : rows_) {
            unsigned c = row.get(f);
            if (c) v.set(p, fp::neg(c));
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::uint64_t hom_count(std::uint32_t a, std::uint32_t b) {
    return fp::pow_u64(fp::prime(), a * b);
}

std::vector<FpMatrix> enumerate_hom(std::uint32_t a, std::uint32_t b, std::uint64_t cap) {
    std::uint64_t n = hom_count(a, b);
    if (n > cap) throw CapExceeded("hom(F^" + std::to_string(a) + ", F^" + std::to_string(b) + ")");
    std::vector<FpMatrix> out;
    out.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k)
        out.push_back(FpMatrix::from_index(a, b, k));
    return out;
}

std::uint64_t surjection_count(std::uint32_t a, std::uint32_t n) {
    if (n > a) return 0;
    std::uint64_t pa = fp::pow_u64(fp::prime(), a);
    std::uint64_t cnt = 1;
    for (std::uint32_t i = 0; i < n; ++i)
        cnt *= pa - fp::pow_u64(fp::prime(), i);
    return cnt;
}

std::vector<FpMatrix> enumerate_surjections(std::uint32_t a, std::uint32_t n, std::uint64_t cap) {
    std::uint64_t total = hom_count(a, n);
    if (total > cap) throw CapExceeded("surjections within hom(F^" + std::to_string(a) + ", F^" + std::to_string(n) + ")");
    std::vector<FpMatrix> out;
    for (std::uint64_t k = 0; k < total; ++k) {
        FpMatrix m = FpMatrix::from_index(a, n, k);
        if (rank(m) == n) out.push_back(std::move(m));
    }
    return out;
}

std::uint64_t gaussian_binomial(std::uint32_t m, std::uint32_t k) {
    if (k > m) return 0;
    unsigned p = fp::prime();
    // prod_{i=0}^{k-1} (p^{m-i} - 1) / (p^{i+1} - 1), evaluated as exact integer
    std::uint64_t num = 1, den = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        num *= fp::pow_u64(p, m - i) - 1;
        den *= fp::pow_u64(p, i + 1) - 1;
    }
    return num / den;
}

std::vector<FpVec> enumerate_vectors(std::uint32_t dim, std::uint64_t cap) {
    std::uint64_t n = fp::pow_u64(fp::prime(), dim);
    if (n > cap) throw CapExceeded("vector enumeration of F^" + std::to_string(dim));
    std::vector<FpVec> out;
    out.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k)
        out.push_back(FpVec::from_index(dim, k));
    return out;
}

std::vector<FpMatrix> enumerate_subspaces(std::uint32_t d, std::uint32_t k) {
    std::vector<FpMatrix> out;
    if (k > d) return out;
    unsigned p = fp::prime();
    // choose pivot columns, then fill the free positions base-p
    std::vector<std::uint32_t> piv(k);
    for (std::uint32_t i = 0; i < k; ++i) piv[i] = i;
    auto next_comb = [&]() -> bool {
        if (k == 0) return false;
        std::int32_t i = static_cast<std::int32_t>(k) - 1;
        while (i >= 0 && piv[i] == d - k + i) --i;
        if (i < 0) return false;
        ++piv[i];
        for (std::uint32_t j = i + 1; j < k; ++j) piv[j] = piv[j - 1] + 1;
        return true;
    };
    while (true) {
        std::vector<bool> is_piv(d, false);
        for (auto c : piv) is_piv[c] = true;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> free_pos;
        for (std::uint32_t t = 0; t < k; ++t)
            for (std::uint32_t c = piv[t] + 1; c < d; ++c)
                if (!is_piv[c]) free_pos.emplace_back(t, c);
        std::uint64_t total = fp::pow_u64(p, static_cast<unsigned>(free_pos.size()));
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            FpMatrix m(k, d);
            for (std::uint32_t t = 0; t < k; ++t) m.set(t, piv[t], 1);
            std::uint64_t rest = idx;
            for (std::size_t q = free_pos.size(); q-- > 0;) {
                m.set(free_pos[q].first, free_pos[q].second, static_cast<unsigned>(rest % p));
                rest /= p;
            }
            out.push_back(std::move(m));
        }
        if (!next_comb()) break;
    }
    return out;
}

FpMatrix block_inclusion(const std::vector<std::uint32_t>& dims, std::size_t omit) {
    std::uint32_t s = 0;
    for (auto d : dims) s += d;
    FpMatrix m(s, s - dims[omit]);
    std::uint32_t src = 0, off = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        if (j != omit) {
            for (std::uint32_t t = 0; t < dims[j]; ++t)
                m.set(off + t, src + t, 1);
            src += dims[j];
        }
        off += dims[j];
    }
    return m;
}

Subspace::Subspace(std::uint32_t ambient_dim, const FpMatrix& spanning_rows) : ambient_(ambient_dim) {
    if (spanning_rows.cols() != ambient_dim) throw UsageError("subspace ambient mismatch");
    RrefResult rr = rref(spanning_rows);
    basis_ = FpMatrix(rr.rank, ambient_dim);
    for (std::uint32_t r = 0; r < rr.rank; ++r)
        basis_.set_row(r, rr.reduced.row_vec(r));
}

bool Subspace::contains(const FpVec& v) const {
    RowSpan span(ambient_);
    for (std::uint32_t r = 0; r < basis_.rows(); ++r)
        span.insert(basis_.row_vec(r));
    return span.contains(v);
}

} // namespace fpre::linalg
