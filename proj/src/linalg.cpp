#include "qmm/linalg.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace qmm {

UnitVector::UnitVector(CVector coords) : coords_(std::move(coords)) {
    if (coords_.size() == 0) throw std::invalid_argument("empty vector");
    double norm = coords_.norm();
    if (norm < 1e-12) throw std::invalid_argument("zero vector cannot be normalized");
    if (std::abs(norm - 1.0) > 1e-6)
        throw std::invalid_argument("vector norm too far from 1: " + std::to_string(norm));
    if (std::abs(norm - 1.0) > 1e-15) coords_ /= norm;
}

CMatrix proj(const UnitVector& xi) {
    return xi.coords() * xi.coords().adjoint();
}

Complex inner(const CMatrix& x, const CMatrix& y, bool normalized) {
    if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() != x.cols())
        throw std::invalid_argument("inner: dimension mismatch");
    Complex t = (x.adjoint() * y).trace();
    return normalized ? t / double(x.rows()) : t;
}

Complex rank1_chain_trace(const std::vector<UnitVector>& xs) {
    if (xs.empty()) throw std::invalid_argument("rank1_chain_trace: empty list");
    const int d = xs.front().dim();
    for (const auto& x : xs)
        if (x.dim() != d) throw std::invalid_argument("rank1_chain_trace: dimension mismatch");
    Complex product = 1.0;
    const size_t p = xs.size();
    for (size_t t = 0; t < p; ++t)
        product *= xs[t].coords().dot(xs[(t + 1) % p].coords());
    return product;
}

CMatrix haar_unitary(int d, RandomStream& stream) {
    if (d < 1) throw std::invalid_argument("haar_unitary: d must be >= 1");
    CMatrix g(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            g(r, c) = stream.complex_gaussian();
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Without this phase fix the QR convention biases the distribution.
    for (int c = 0; c < d; ++c) {
        Complex diag = r(c, c);
        double mag = std::abs(diag);
        Complex phase = mag > 0 ? diag / mag : Complex(1, 0);
        q.col(c) *= phase;
    }
    return q;
}

double unitarity_residual(const CMatrix& u) {
    if (u.rows() != u.cols()) throw std::invalid_argument("unitarity_residual: not square");
    CMatrix delta = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
    return delta.cwiseAbs().maxCoeff();
}

namespace {

bool phase_equal(const CMatrix& a, const CMatrix& b, double tol) {
    double t = std::abs((a.adjoint() * b).trace());
    return std::abs(t - double(a.rows())) <= tol * double(a.rows());
}

bool entry_equal(const CMatrix& a, const CMatrix& b, double tol) {
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

template <typename Equal>
std::vector<CMatrix> closure_impl(const std::vector<CMatrix>& generators, double tol, int cap,
                                  Equal equal, const char* what) {
    if (generators.empty()) throw std::invalid_argument("closure: no generators");
    const Eigen::Index d = generators.front().rows();
    for (const auto& g : generators) {
        if (g.rows() != d || g.cols() != d)
            throw std::invalid_argument("closure: generator dimension mismatch");
        if (unitarity_residual(g) > tol)
            throw std::invalid_argument("closure: generator not unitary within tol");
    }
    std::vector<CMatrix> found;
    found.push_back(CMatrix::Identity(d, d));
    std::deque<size_t> frontier{0};
    auto find = [&](const CMatrix& m) -> int {
        for (size_t t = 0; t < found.size(); ++t)
            if (equal(found[t], m, tol)) return int(t);
        return -1;
    };
    while (!frontier.empty()) {
        size_t cur = frontier.front();
        frontier.pop_front();
        for (const auto& g : generators) {
            CMatrix next = found[cur] * g;
            if (find(next) >= 0) continue;
            if (int(found.size()) >= cap)
                throw std::runtime_error(std::string(what) + ": not finite within cap");
            found.push_back(std::move(next));
            frontier.push_back(found.size() - 1);
        }
    }
    return found;
}

}  // namespace

std::vector<CMatrix> projective_closure(const std::vector<CMatrix>& generators, double tol,
                                        int cap) {
    return closure_impl(generators, tol, cap, phase_equal, "projective_closure");
}

std::vector<CMatrix> multiplicative_closure(const std::vector<CMatrix>& generators, double tol,
                                            int cap) {
    return closure_impl(generators, tol, cap, entry_equal, "multiplicative_closure");
}

long long encode(const MultiIndex& multi) {
    if (multi.base < 1) throw std::invalid_argument("encode: base must be >= 1");
    long long flat = 0;
    for (int s : multi.slots) {
        if (s < 0 || s >= multi.base) throw std::invalid_argument("encode: slot out of range");
        flat = flat * multi.base + s;
    }
    return flat;
}

MultiIndex decode(long long flat, int base, int length) {
    if (base < 1 || length < 0) throw std::invalid_argument("decode: bad base/length");
    if (flat < 0 || flat >= pow_ll(base, length))
        throw std::invalid_argument("decode: flat index out of range");
    MultiIndex multi;
    multi.base = base;
    multi.slots.assign(size_t(length), 0);
    for (int t = length - 1; t >= 0; --t) {
        multi.slots[size_t(t)] = int(flat % base);
        flat /= base;
    }
    return multi;
}

long long pow_ll(long long base, int exp) {
    if (exp < 0) throw std::invalid_argument("pow_ll: negative exponent");
    long long out = 1;
    for (int t = 0; t < exp; ++t) {
        if (base != 0 && out > (1LL << 62) / std::abs(base))
            throw std::overflow_error("pow_ll: overflow");
        out *= base;
    }
    return out;
}

BlockMatrix::BlockMatrix(int n, int k) : n_(n), k_(k) {
    if (n < 1 || k < 1) throw std::invalid_argument("BlockMatrix: sizes must be >= 1");
    blocks_.assign(size_t(n) * n, CMatrix::Zero(k, k));
}

CMatrix BlockMatrix::flattened() const {
    CMatrix out = CMatrix::Zero(Eigen::Index(n_) * k_, Eigen::Index(n_) * k_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            out.block(Eigen::Index(i) * k_, Eigen::Index(j) * k_, k_, k_) = block(i, j);
    return out;
}

}  // namespace qmm
