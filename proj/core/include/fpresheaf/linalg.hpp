#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fpresheaf/matrix.hpp"

namespace fpre::linalg {

inline constexpr std::uint64_t kDefaultEnumCap = std::uint64_t{1} << 20;

struct RrefResult {
    FpMatrix reduced;
    std::uint32_t rank = 0;
    std::vector<std::uint32_t> pivot_cols;
};

// Reduced row-echelon form; deterministic (leftmost pivot, smallest row index).
RrefResult rref(const FpMatrix& m);

std::uint32_t rank(const FpMatrix& m);

// Independent spanning set of { v : m v = 0 }, deterministic order.
std::vector<FpVec> kernel_basis(const FpMatrix& m);

// Independent spanning set of the column space.
std::vector<FpVec> image_basis(const FpMatrix& m);

// Any solution of m x = b, or nullopt when inconsistent.
std::optional<FpVec> solve(const FpMatrix& m, const FpVec& b);

// Incrementally maintained fully-reduced row space; rows stored pivot -> row,
// pivot entries normalized to 1, all rows reduced against each other.
class RowSpan {
public:
    explicit RowSpan(std::uint32_t width) : width_(width) {}

    // Reduce v against the basis; insert the residual when nonzero.
    // Returns true when the dimension grew.
    bool insert(FpVec v);
    // Residual of v after reduction (zero iff v in span).
    FpVec reduce(FpVec v) const;
    bool contains(const FpVec& v) const { return reduce(v).is_zero(); }

    std::size_t dim() const { return rows_.size(); }
    std::uint32_t width() const { return width_; }
    const std::map<std::uint32_t, FpVec>& rows() const { return rows_; }
    std::vector<std::uint32_t> free_coords() const;

    // Kernel basis of the stacked rows seen as a linear system over the width
    // coordinates (one vector per free coordinate, deterministic order).
    std::vector<FpVec> kernel() const;

private:
    std::uint32_t width_;
    std::map<std::uint32_t, FpVec> rows_;
};

std::uint64_t hom_count(std::uint32_t a, std::uint32_t b);

// All of hom(F^a, F^b) in the canonical order. Throws CapExceeded past the cap.
std::vector<FpMatrix> enumerate_hom(std::uint32_t a, std::uint32_t b,
                                    std::uint64_t cap = kDefaultEnumCap);

// Exactly the full-rank b x a matrices with b = n; count prod_{i<n} (p^a - p^i).
std::vector<FpMatrix> enumerate_surjections(std::uint32_t a, std::uint32_t n,
                                            std::uint64_t cap = kDefaultEnumCap);
std::uint64_t surjection_count(std::uint32_t a, std::uint32_t n);

// Number of k-dimensional subspaces of F_p^m (0 when k > m).
std::uint64_t gaussian_binomial(std::uint32_t m, std::uint32_t k);

// All p^dim column vectors in canonical index order.
std::vector<FpVec> enumerate_vectors(std::uint32_t dim, std::uint64_t cap = kDefaultEnumCap);

// All k-dimensional subspaces of F_p^d as RREF row-bases (k x d matrices), in a
// deterministic order; count equals gaussian_binomial(d, k).
std::vector<FpMatrix> enumerate_subspaces(std::uint32_t d, std::uint32_t k);

// Inclusion of the direct sub-sum omitting block `omit`:
// F^{s - dims[omit]} -> F^{s} with s = sum(dims).
FpMatrix block_inclusion(const std::vector<std::uint32_t>& dims, std::size_t omit);

// Row space of a matrix in RREF, with the ambient dimension; usable as a key.
class Subspace {
public:
    Subspace(std::uint32_t ambient_dim, const FpMatrix& spanning_rows);

    std::uint32_t ambient_dim() const { return ambient_; }
    std::uint32_t dim() const { return basis_.rows(); }
    const FpMatrix& basis() const { return basis_; } // RREF rows, strictly increasing pivots
    bool contains(const FpVec& v) const;
    bool operator==(const Subspace& o) const { return ambient_ == o.ambient_ && basis_ == o.basis_; }
    std::string key() const { return basis_.key(); }

private:
    std::uint32_t ambient_;
    FpMatrix basis_;
};

} // namespace fpre::linalg
