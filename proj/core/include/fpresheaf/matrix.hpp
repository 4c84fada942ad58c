#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpresheaf/fp.hpp"

namespace fpre {

// Column vector over GF(p). Bit-packed words at p = 2, byte entries otherwise.
class FpVec {
public:
    FpVec() : n_(0) {}
    explicit FpVec(std::uint32_t n);

    std::uint32_t size() const { return n_; }
    unsigned get(std::uint32_t i) const;
    void set(std::uint32_t i, unsigned v);

    bool is_zero() const;
    int first_nonzero() const; // -1 when zero

    void add_scaled(const FpVec& o, unsigned c); // *this += c * o
    void scale(unsigned c);

    bool operator==(const FpVec& o) const;
    bool operator!=(const FpVec& o) const { return !(*this == o); }
    std::string key() const;

    // index in the canonical vector order: coordinate i is the i-th base-p digit
    std::uint64_t to_index() const;
    static FpVec from_index(std::uint32_t n, std::uint64_t idx);

private:
    std::uint32_t n_;
    std::vector<std::uint64_t> w_;
    std::vector<std::uint8_t> b_;

    friend class FpMatrix;
};

// Dense matrix over GF(p); an element of hom(F^a, F^b) is a b x a matrix acting
// on column vectors. GF(2) rows are bit-packed per row, other p use byte entries.
class FpMatrix {
public:
    FpMatrix() : rows_(0), cols_(0) {}
    FpMatrix(std::uint32_t rows, std::uint32_t cols);

    static FpMatrix identity(std::uint32_t n);
    // the k-th element of hom(F^a, F^b) in the canonical order: lexicographic on
    // the row-major entry sequence, entries ordered 0 < 1 < ... < p-1
    static FpMatrix from_index(std::uint32_t a, std::uint32_t b, std::uint64_t k);
    std::uint64_t to_index() const;

    std::uint32_t rows() const { return rows_; }
    std::uint32_t cols() const { return cols_; }

    unsigned at(std::uint32_t r, std::uint32_t c) const;
    void set(std::uint32_t r, std::uint32_t c, unsigned v);

    FpMatrix mul(const FpMatrix& o) const;
    FpMatrix transpose() const;
    FpVec apply(const FpVec& v) const; // rows_-vector from cols_-vector
    void apply_to(const FpVec& v, FpVec& out) const; // reuses out's storage

    FpVec row_vec(std::uint32_t r) const;
    FpVec col_vec(std::uint32_t c) const;
    void set_row(std::uint32_t r, const FpVec& v);

    void add_scaled_row(std::uint32_t dst, std::uint32_t src, unsigned c); // row dst += c * row src
    void swap_rows(std::uint32_t r1, std::uint32_t r2);
    void scale_row(std::uint32_t r, unsigned c);

    bool is_identity() const;
    bool is_zero() const;

    bool operator==(const FpMatrix& o) const;
    bool operator!=(const FpMatrix& o) const { return !(*this == o); }
    std::string key() const; // stable byte key (shape + entries)
    std::string to_string() const;

private:
    std::uint32_t rows_, cols_;
    std::vector<std::uint64_t> w_; // p == 2, words_per_row() words per row
    std::vector<std::uint8_t> b_; // p > 2, row-major

    bool packed() const { return b_.empty(); }
    std::uint32_t wpr() const { return (cols_ + 63) / 64; }
};

} // namespace fpre
