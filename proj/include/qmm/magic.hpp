#pragma once

#include <string>
#include <vector>

#include "qmm/linalg.hpp"

namespace qmm {

/// Residuals of the magic-unitary axioms: every entry a projection, every
/// row and column summing to the identity block.
struct MagicValidationReport {
    double projection_residual = 0.0;
    double row_residual = 0.0;
    double column_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

MagicValidationReport validate_magic(const BlockMatrix& u, double tol = 1e-9);

/// Flat: K = N and every entry is a rank-1 projection, detected by
/// unnormalized trace 1 within tol.
bool is_flat(const BlockMatrix& u, double tol = 1e-9);

/// True when every pair of entries commutes within tol. For flat magic
/// unitaries this happens exactly when the underlying vectors are
/// pairwise proportional or orthogonal.
bool commuting_entries(const BlockMatrix& u, double tol = 1e-9);

/// N x N array of unit vectors in C^N whose rows and columns are
/// orthonormal bases.
class MagicBasis {
public:
    MagicBasis(int n, std::vector<UnitVector> entries_row_major);

    int n() const { return n_; }
    const UnitVector& entry(int i, int j) const { return entries_[size_t(i) * n_ + j]; }

private:
    int n_;
    std::vector<UnitVector> entries_;
};

/// Max deviation of any row or column Gram matrix from the identity.
double magic_basis_residual(const MagicBasis& basis);

/// u_{ij} = proj(xi_{ij}); rejects bases whose residual exceeds 1e-8.
BlockMatrix basis_to_magic(const MagicBasis& basis);

/// Extracts unit vectors from a flat magic unitary and canonicalizes the
/// phase: the first coordinate of largest modulus is made real positive.
MagicBasis magic_to_basis(const BlockMatrix& u, double tol = 1e-8);

/// Applies the same phase canonicalization to a single vector.
UnitVector canonical_phase(const UnitVector& x);

/// N x N array over {1..N} with every row and column a permutation.
class LatinSquare {
public:
    LatinSquare(int n, std::vector<int> entries_row_major);

    int n() const { return n_; }
    int at(int i, int j) const { return entries_[size_t(i) * n_ + j]; }
    const std::vector<int>& entries() const { return entries_; }
    /// First row is 1..N in order.
    bool half_normalized() const { return half_normalized_; }
    /// First row and first column are both 1..N in order.
    bool normalized() const { return normalized_; }

    bool operator==(const LatinSquare& other) const {
        return n_ == other.n_ && entries_ == other.entries_;
    }

private:
    int n_;
    std::vector<int> entries_;
    bool half_normalized_;
    bool normalized_;
};

enum class LatinMode { All, Half, Full };

/// Exhaustive lexicographic enumeration. Capped at N = 6 for half/full
/// normalization and N = 5 for the unrestricted mode.
std::vector<LatinSquare> latin_enumerate(int n, LatinMode mode);

/// L_{ij} = ((i + j) mod N) + 1, the normalized cyclic square.
LatinSquare cyclic_latin_square(int n);

/// Flat magic unitary u_{ij} = proj(x_{L_{ij}}) from an orthonormal basis
/// x_1..x_N and a Latin square.
BlockMatrix latin_flat_model_unitary(const std::vector<UnitVector>& basis, const LatinSquare& L);

}  // namespace qmm
