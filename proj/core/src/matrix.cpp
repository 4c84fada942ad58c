#include "fpresheaf/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace fpre {

// ---------------------------------------------------------------- FpVec

FpVec::FpVec(std::uint32_t n) : n_(n) {
    if (fp::prime() == 2)
        w_.assign((n + 63) / 64, 0);
    else
        b_.assign(n, 0);
}

unsigned FpVec::get(std::uint32_t i) const {
    if (!w_.empty() || b_.empty()) {
        if (w_.empty()) return 0;
        return (w_[i >> 6] >> (i & 63)) & 1u;
    }
    return b_[i];
}

void FpVec::set(std::uint32_t i, unsigned v) {
    if (!w_.empty() || b_.empty()) {
        if (w_.empty()) return;
        std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v & 1)
            w_[i >> 6] |= mask;
        else
            w_[i >> 6] &= ~mask;
    } else {
        b_[i] = static_cast<std::uint8_t>(v % fp::prime());
    }
}

bool FpVec::is_zero() const {
    for (auto x : w_)
        if (x) return false;
    for (auto x : b_)
        if (x) return false;
    return true;
}

int FpVec::first_nonzero() const {
    if (!w_.empty()) {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return static_cast<int>(k * 64 + std::countr_zero(w_[k]));
        return -1;
    }
    for (std::size_t i = 0; i < b_.size(); ++i)
        if (b_[i]) return static_cast<int>(i);
    return -1;
}

void FpVec::add_scaled(const FpVec& o, unsigned c) {
    c %= fp::prime();
    if (c == 0) return;
    if (!w_.empty() || (b_.empty() && !o.w_.empty())) {
        for (std::size_t k = 0; k < w_.size(); ++k)
            w_[k] ^= o.w_[k];
        return;
    }
    unsigned p = fp::prime();
    for (std::size_t i = 0; i < b_.size(); ++i)
        b_[i] = static_cast<std::uint8_t>((b_[i] + c * o.b_[i]) % p);
}

void FpVec::scale(unsigned c) {
    c %= fp::prime();
    if (c == 1) return;
    if (!w_.empty()) {
        if (c == 0)
            std::fill(w_.begin(), w_.end(), 0);
        return;
    }
    unsigned p = fp::prime();
    for (auto& x : b_)
        x = static_cast<std::uint8_t>((x * c) % p);
}

bool FpVec::operator==(const FpVec& o) const {
    return n_ == o.n_ && w_ == o.w_ && b_ == o.b_;
}

std::string FpVec::key() const {
    std::string s;
    s.reserve(n_ + 4);
    s.push_back(static_cast<char>(n_ & 0xff));
    s.push_back(static_cast<char>((n_ >> 8) & 0xff));
    for (std::uint32_t i = 0; i < n_; ++i)
        s.push_back(static_cast<char>(get(i)));
    return s;
}

std::uint64_t FpVec::to_index() const {
    unsigned p = fp::prime();
    std::uint64_t idx = 0, scale = 1;
    for (std::uint32_t i = 0; i < n_; ++i) {
        idx += scale * get(i);
        scale *= p;
    }
    return idx;
}

FpVec FpVec::from_index(std::uint32_t n, std::uint64_t idx) {
    unsigned p = fp::prime();
    FpVec v(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        v.set(i, static_cast<unsigned>(idx % p));
        idx /= p;
    }
    return v;
}

// ---------------------------------------------------------------- FpMatrix

FpMatrix::FpMatrix(std::uint32_t rows, std::uint32_t cols) : rows_(rows), cols_(cols) {
    if (fp::prime() == 2)
        w_.assign(static_cast<std::size_t>(rows) * wpr(), 0);
    else
        b_.assign(static_cast<std::size_t>(rows) * cols, 0);
}

FpMatrix FpMatrix::identity(std::uint32_t n) {
    FpMatrix m(n, n);
    for (std::uint32_t i = 0; i < n; ++i)
        m.set(i, i, 1);
    return m;
}

FpMatrix FpMatrix::from_index(std::uint32_t a, std::uint32_t b, std::uint64_t k) {
    unsigned p = fp::prime();
    FpMatrix m(b, a);
    std::uint64_t n = static_cast<std::uint64_t>(a) * b;
    // entry (r, c) is digit number r*a + c, most significant first
    for (std::uint32_t r = b; r-- > 0;) {
        for (std::uint32_t c = a; c-- > 0;) {
            m.set(r, c, static_cast<unsigned>(k % p));
            k /= p;
        }
    }
    (void)n;
    return m;
}

std::uint64_t FpMatrix::to_index() const {
    unsigned p = fp::prime();
    std::uint64_t k = 0;
    for (std::uint32_t r = 0; r < rows_; ++r)
        for (std::uint32_t c = 0; c < cols_; ++c)
            k = k * p + at(r, c);
    return k;
}

unsigned FpMatrix::at(std::uint32_t r, std::uint32_t c) const {
    if (packed())
        return (w_[static_cast<std::size_t>(r) * wpr() + (c >> 6)] >> (c & 63)) & 1u;
    return b_[static_cast<std::size_t>(r) * cols_ + c];
}

void FpMatrix::set(std::uint32_t r, std::uint32_t c, unsigned v) {
    if (packed()) {
        std::uint64_t mask = std::uint64_t{1} << (c & 63);
        auto& word = w_[static_cast<std::size_t>(r) * wpr() + (c >> 6)];
        if (v & 1)
            word |= mask;
        else
            word &= ~mask;
    } else {
        b_[static_cast<std::size_t>(r) * cols_ + c] = static_cast<std::uint8_t>(v % fp::prime());
    }
}

FpMatrix FpMatrix::mul(const FpMatrix& o) const {
    if (cols_ != o.rows_) throw UsageError("matrix product shape mismatch");
    FpMatrix out(rows_, o.cols_);
    if (packed()) {
        std::uint32_t ow = out.wpr();
        for (std::uint32_t r = 0; r < rows_; ++r) {
            std::uint64_t* dst = out.w_.data() + static_cast<std::size_t>(r) * ow;
            for (std::uint32_t k = 0; k < cols_; ++k) {
                if (at(r, k)) {
                    const std::uint64_t* src = o.w_.data() + static_cast<std::size_t>(k) * ow;
                    for (std::uint32_t t = 0; t < ow; ++t)
                        dst[t] ^= src[t];
                }
            }
        }
    } else {
        unsigned p = fp::prime();
        for (std::uint32_t r = 0; r < rows_; ++r)
            for (std::uint32_t c = 0; c < o.cols_; ++c) {
                unsigned acc = 0;
                for (std::uint32_t k = 0; k < cols_; ++k)
                    acc = (acc + at(r, k) * o.at(k, c)) % p;
                out.set(r, c, acc);
            }
    }
    return out;
}

FpMatrix FpMatrix::transpose() const {
    FpMatrix out(cols_, rows_);
    for (std::uint32_t r = 0; r < rows_; ++r)
        for (std::uint32_t c = 0; c < cols_; ++c)
            out.set(c, r, at(r, c));
    return out;
}

FpVec FpMatrix::apply(const FpVec& v) const {
    FpVec out;
    apply_to(v, out);
    return out;
}

void FpMatrix::apply_to(const FpVec& v, FpVec& out) const {
    if (v.size() != cols_) throw UsageError("matrix apply shape mismatch");
    if (packed()) {
        out.n_ = rows_;
        out.b_.clear();
        out.w_.assign((rows_ + 63) / 64, 0);
        for (std::uint32_t r = 0; r < rows_; ++r) {
            std::uint64_t acc = 0;
            const std::uint64_t* row = w_.data() + static_cast<std::size_t>(r) * wpr();
            for (std::uint32_t t = 0; t < wpr(); ++t)
                acc ^= row[t] & v.w_[t];
            out.w_[r >> 6] |= static_cast<std::uint64_t>(std::popcount(acc) & 1u) << (r & 63);
        }
    } else {
        unsigned p = fp::prime();
        out.n_ = rows_;
        out.w_.clear();
        out.b_.assign(rows_, 0);
        for (std::uint32_t r = 0; r < rows_; ++r) {
            unsigned acc = 0;
            for (std::uint32_t c = 0; c < cols_; ++c)
                acc = (acc + at(r, c) * v.get(c)) % p;
            out.b_[r] = static_cast<std::uint8_t>(acc);
        }
    }
}

FpVec FpMatrix::row_vec(std::uint32_t r) const {
    FpVec v(cols_);
    if (packed()) {
        for (std::uint32_t t = 0; t < wpr(); ++t)
            v.w_[t] = w_[static_cast<std::size_t>(r) * wpr() + t];
    } else {
        for (std::uint32_t c = 0; c < cols_; ++c)
            v.set(c, at(r, c));
    }
    return v;
}

FpVec FpMatrix::col_vec(std::uint32_t c) const {
    FpVec v(rows_);
    for (std::uint32_t r = 0; r < rows_; ++r)
        v.set(r, at(r, c));
    return v;
}

void FpMatrix::set_row(std::uint32_t r, const FpVec& v) {
    if (v.size() != cols_) throw UsageError("set_row shape mismatch");
    if (packed()) {
        for (std::uint32_t t = 0; t < wpr(); ++t)
            w_[static_cast<std::size_t>(r) * wpr() + t] = v.w_[t];
    } else {
        for (std::uint32_t c = 0; c < cols_; ++c)
            set(r, c, v.get(c));
    }
}

void FpMatrix::add_scaled_row(std::uint32_t dst, std::uint32_t src, unsigned c) {
    c %= fp::prime();
    if (c == 0) return;
    if (packed()) {
        for (std::uint32_t t = 0; t < wpr(); ++t)
            w_[static_cast<std::size_t>(dst) * wpr() + t] ^= w_[static_cast<std::size_t>(src) * wpr() + t];
    } else {
        unsigned p = fp::prime();
        for (std::uint32_t j = 0; j < cols_; ++j)
            set(dst, j, (at(dst, j) + c * at(src, j)) % p);
    }
}

void FpMatrix::swap_rows(std::uint32_t r1, std::uint32_t r2) {
    if (r1 == r2) return;
    if (packed()) {
        for (std::uint32_t t = 0; t < wpr(); ++t)
            std::swap(w_[static_cast<std::size_t>(r1) * wpr() + t], w_[static_cast<std::size_t>(r2) * wpr() + t]);
    } else {
        for (std::uint32_t j = 0; j < cols_; ++j) {
            unsigned tmp = at(r1, j);
            set(r1, j, at(r2, j));
            set(r2, j, tmp);
        }
    }
}

void FpMatrix::scale_row(std::uint32_t r, unsigned c) {
    c %= fp::prime();
    if (c == 1) return;
    if (packed()) {
        if (c == 0)
            for (std::uint32_t t = 0; t < wpr(); ++t)
                w_[static_cast<std::size_t>(r) * wpr() + t] = 0;
        return;
    }
    unsigned p = fp::prime();
    for (std::uint32_t j = 0; j < cols_; ++j)
        set(r, j, (at(r, j) * c) % p);
}

bool FpMatrix::is_identity() const {
    if (rows_ != cols_) return false;
    for (std::uint32_t r = 0; r < rows_; ++r)
        for (std::uint32_t c = 0; c < cols_; ++c)
            if (at(r, c) != (r == c ? 1u : 0u)) return false;
    return true;
}

bool FpMatrix::is_zero() const {
    for (auto x : w_)
        if (x) return false;
    for (auto x : b_)
        if (x) return false;
    return true;
}

bool FpMatrix::operator==(const FpMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && w_ == o.w_ && b_ == o.b_;
}

std::string FpMatrix::key() const {
    std::string s;
    s.reserve(static_cast<std::size_t>(rows_) * cols_ + 4);
    s.push_back(static_cast<char>(rows_ & 0xff));
    s.push_back(static_cast<char>((rows_ >> 8) & 0xff));
    s.push_back(static_cast<char>(cols_ & 0xff));
    s.push_back(static_cast<char>((cols_ >> 8) & 0xff));
    for (std::uint32_t r = 0; r < rows_; ++r)
        for (std::uint32_t c = 0; c < cols_; ++c)
            s.push_back(static_cast<char>(at(r, c)));
    return s;
}

std::string FpMatrix::to_string() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_ << "[";
    for (std::uint32_t r = 0; r < rows_; ++r) {
        if (r) os << "; ";
        for (std::uint32_t c = 0; c < cols_; ++c) {
            if (c) os << " ";
            os << at(r, c);
        }
    }
    os << "]";
    return os.str();
}

} // namespace fpre
