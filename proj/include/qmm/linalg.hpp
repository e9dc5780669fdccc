#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qmm/rng.hpp"

namespace qmm {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Unit vector in C^d. Construction renormalizes inputs whose norm is
/// within 1e-6 of 1 and rejects anything further off, so downstream
/// projection code can rely on exact unit norm.
class UnitVector {
public:
    explicit UnitVector(CVector coords);

    int dim() const { return int(coords_.size()); }
    const CVector& coords() const { return coords_; }

private:
    CVector coords_;
};

/// Orthogonal projection onto the line spanned by xi.
CMatrix proj(const UnitVector& xi);

/// Trace pairing tr(x* y). Normalized divides by the dimension, which is
/// the convention used throughout the transfer-matrix formulas; pass
/// normalized = false for the plain trace.
Complex inner(const CMatrix& x, const CMatrix& y, bool normalized = true);

/// Cyclic product <x_1,x_2><x_2,x_3>...<x_p,x_1> of vector scalar
/// products (conjugate-linear in the first slot). Equals the unnormalized
/// trace of proj(x_1)...proj(x_p).
Complex rank1_chain_trace(const std::vector<UnitVector>& xs);

/// Haar-distributed d x d unitary: QR of a complex Ginibre matrix with
/// the R-diagonal phase correction. Deterministic given the stream state.
CMatrix haar_unitary(int d, RandomStream& stream);

double unitarity_residual(const CMatrix& u);

/// Representatives of the finite group generated by the given unitaries
/// modulo global phase. Two matrices are identified when A = lambda B for
/// unit lambda, detected via |Tr(A* B)| = d. Deterministic ordering;
/// throws if the closure exceeds cap.
std::vector<CMatrix> projective_closure(const std::vector<CMatrix>& generators,
                                        double tol = 1e-8, int cap = 10000);

/// Closure under matrix multiplication with exact (entrywise) equality up
/// to tol, no phase identification. Throws if the closure exceeds cap.
std::vector<CMatrix> multiplicative_closure(const std::vector<CMatrix>& generators,
                                            double tol = 1e-8, int cap = 10000);

/// Index tuple (i_1..i_p) with each slot in {0..N-1}, flattened row-major
/// with slot 0 most significant.
struct MultiIndex {
    std::vector<int> slots;
    int base = 0;
};

long long encode(const MultiIndex& multi);
MultiIndex decode(long long flat, int base, int length);
long long pow_ll(long long base, int exp);

/// N x N array of K x K blocks, row-major. The uniform container for
/// model evaluations U^x_{ij}.
class BlockMatrix {
public:
    BlockMatrix() = default;
    BlockMatrix(int n, int k);

    int n() const { return n_; }
    int k() const { return k_; }
    CMatrix& block(int i, int j) { return blocks_[size_t(i) * n_ + j]; }
    const CMatrix& block(int i, int j) const { return blocks_[size_t(i) * n_ + j]; }

    /// Assembles the (nk) x (nk) matrix with block (i,j) at offset (ik, jk).
    CMatrix flattened() const;

private:
    int n_ = 0;
    int k_ = 0;
    std::vector<CMatrix> blocks_;
};

}  // namespace qmm
