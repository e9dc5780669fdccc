#include "qmm/magic.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmm {

MagicValidationReport validate_magic(const BlockMatrix& u, double tol) {
    const int n = u.n();
    const int k = u.k();
    MagicValidationReport report;
    report.tolerance = tol;
    const CMatrix id = CMatrix::Identity(k, k);
    for (int i = 0; i < n; ++i) {
        CMatrix row_sum = CMatrix::Zero(k, k);
        CMatrix col_sum = CMatrix::Zero(k, k);
        for (int j = 0; j < n; ++j) {
            const CMatrix& e = u.block(i, j);
            if (e.rows() != k || e.cols() != k)
                throw std::invalid_argument("validate_magic: ragged entry dimensions");
            double p_res = (e * e - e).cwiseAbs().maxCoeff();
            double h_res = (e - e.adjoint()).cwiseAbs().maxCoeff();
            report.projection_residual = std::max({report.projection_residual, p_res, h_res});
            row_sum += e;
            col_sum += u.block(j, i);
        }
        report.row_residual =
            std::max(report.row_residual, (row_sum - id).cwiseAbs().maxCoeff());
        report.column_residual =
            std::max(report.column_residual, (col_sum - id).cwiseAbs().maxCoeff());
    }
    report.pass = report.projection_residual <= tol && report.row_residual <= tol &&
                  report.column_residual <= tol;
    return report;
}

bool is_flat(const BlockMatrix& u, double tol) {
    if (u.k() != u.n()) return false;
    for (int i = 0; i < u.n(); ++i)
        for (int j = 0; j < u.n(); ++j)
            if (std::abs(u.block(i, j).trace() - Complex(1.0)) > tol) return false;
    return true;
}

bool commuting_entries(const BlockMatrix& u, double tol) {
    const int n = u.n();
    for (int a = 0; a < n * n; ++a) {
        const CMatrix& x = u.block(a / n, a % n);
        for (int b = a + 1; b < n * n; ++b) {
            const CMatrix& y = u.block(b / n, b % n);
            if ((x * y - y * x).cwiseAbs().maxCoeff() > tol) return false;
        }
    }
    return true;
}

MagicBasis::MagicBasis(int n, std::vector<UnitVector> entries_row_major)
    : n_(n), entries_(std::move(entries_row_major)) {
    if (n < 1) throw std::invalid_argument("MagicBasis: n must be >= 1");
    if (entries_.size() != size_t(n) * n)
        throw std::invalid_argument("MagicBasis: wrong entry count");
    for (const auto& e : entries_)
        if (e.dim() != n) throw std::invalid_argument("MagicBasis: entries must live in C^n");
}

double magic_basis_residual(const MagicBasis& basis) {
    const int n = basis.n();
    double residual = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = j + 1; l < n; ++l) {
                Complex row = basis.entry(i, j).coords().dot(basis.entry(i, l).coords());
                Complex col = basis.entry(j, i).coords().dot(basis.entry(l, i).coords());
                residual = std::max({residual, std::abs(row), std::abs(col)});
            }
    return residual;
}

BlockMatrix basis_to_magic(const MagicBasis& basis) {
    double residual = magic_basis_residual(basis);
    if (residual > 1e-8)
        throw std::invalid_argument("basis_to_magic: rows/columns not orthonormal, residual " +
                                    std::to_string(residual));
    const int n = basis.n();
    BlockMatrix u(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            u.block(i, j) = proj(basis.entry(i, j));
    return u;
}

UnitVector canonical_phase(const UnitVector& x) {
    const CVector& v = x.coords();
    int arg_max = 0;
    double best = -1.0;
    for (int t = 0; t < v.size(); ++t) {
        double m = std::abs(v[t]);
        if (m > best) {
            best = m;
            arg_max = t;
        }
    }
    Complex lead = v[arg_max];
    Complex phase = std::abs(lead) > 0 ? std::abs(lead) / lead : Complex(1, 0);
    return UnitVector(v * phase);
}

MagicBasis magic_to_basis(const BlockMatrix& u, double tol) {
    if (!is_flat(u, tol))
        throw std::invalid_argument("magic_to_basis: input is not flat");
    const int n = u.n();
    std::vector<UnitVector> entries;
    entries.reserve(size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const CMatrix& p = u.block(i, j);
            // For a rank-1 projection every nonzero column spans the range;
            // the largest one is the best conditioned.
            int best_col = 0;
            double best_norm = -1.0;
            for (int c = 0; c < n; ++c) {
                double norm = p.col(c).norm();
                if (norm > best_norm) {
                    best_norm = norm;
                    best_col = c;
                }
            }
            if (best_norm < tol)
                throw std::invalid_argument("magic_to_basis: zero entry");
            entries.push_back(canonical_phase(UnitVector(p.col(best_col) / best_norm)));
        }
    return MagicBasis(n, std::move(entries));
}

LatinSquare::LatinSquare(int n, std::vector<int> entries_row_major)
    : n_(n), entries_(std::move(entries_row_major)) {
    if (n < 1) throw std::invalid_argument("LatinSquare: n must be >= 1");
    if (entries_.size() != size_t(n) * n)
        throw std::invalid_argument("LatinSquare: wrong entry count");
    std::vector<int> seen(size_t(n), 0);
    for (int i = 0; i < n; ++i) {
        std::fill(seen.begin(), seen.end(), 0);
        for (int j = 0; j < n; ++j) {
            int v = at(i, j);
            if (v < 1 || v > n) throw std::invalid_argument("LatinSquare: value out of range");
            if (seen[size_t(v - 1)]++) throw std::invalid_argument("LatinSquare: repeated value in row");
        }
    }
    for (int j = 0; j < n; ++j) {
        std::fill(seen.begin(), seen.end(), 0);
        for (int i = 0; i < n; ++i)
            if (seen[size_t(at(i, j) - 1)]++)
                throw std::invalid_argument("LatinSquare: repeated value in column");
    }
    half_normalized_ = true;
    for (int j = 0; j < n; ++j)
        if (at(0, j) != j + 1) half_normalized_ = false;
    normalized_ = half_normalized_;
    for (int i = 0; i < n; ++i)
        if (at(i, 0) != i + 1) normalized_ = false;
}

namespace {

void latin_backtrack(int n, LatinMode mode, std::vector<int>& cells,
                     std::vector<unsigned>& row_used, std::vector<unsigned>& col_used, int pos,
                     std::vector<LatinSquare>& out) {
    if (pos == n * n) {
        out.emplace_back(n, cells);
        return;
    }
    int i = pos / n;
    int j = pos % n;
    if (i == 0 && mode != LatinMode::All) {
        // half/full normalization pins the first row to 1..N
        int v = j + 1;
        cells[size_t(pos)] = v;
        row_used[0] |= 1u << v;
        col_used[size_t(j)] |= 1u << v;
        latin_backtrack(n, mode, cells, row_used, col_used, pos + 1, out);
        row_used[0] &= ~(1u << v);
        col_used[size_t(j)] &= ~(1u << v);
        return;
    }
    if (j == 0 && mode == LatinMode::Full) {
        int v = i + 1;
        if ((col_used[0] >> v) & 1u) return;
        cells[size_t(pos)] = v;
        row_used[size_t(i)] |= 1u << v;
        col_used[0] |= 1u << v;
        latin_backtrack(n, mode, cells, row_used, col_used, pos + 1, out);
        row_used[size_t(i)] &= ~(1u << v);
        col_used[0] &= ~(1u << v);
        return;
    }
    for (int v = 1; v <= n; ++v) {
        unsigned bit = 1u << v;
        if ((row_used[size_t(i)] & bit) || (col_used[size_t(j)] & bit)) continue;
        cells[size_t(pos)] = v;
        row_used[size_t(i)] |= bit;
        col_used[size_t(j)] |= bit;
        latin_backtrack(n, mode, cells, row_used, col_used, pos + 1, out);
        row_used[size_t(i)] &= ~bit;
        col_used[size_t(j)] &= ~bit;
    }
}

}  // namespace

std::vector<LatinSquare> latin_enumerate(int n, LatinMode mode) {
    if (n < 1) throw std::invalid_argument("latin_enumerate: n must be >= 1");
    int cap = mode == LatinMode::All ? 5 : 6;
    if (n > cap)
        throw std::invalid_argument("latin_enumerate: n beyond enumeration cap " +
                                    std::to_string(cap));
    std::vector<int> cells(size_t(n) * n, 0);
    std::vector<unsigned> row_used(size_t(n), 0), col_used(size_t(n), 0);
    std::vector<LatinSquare> out;
    latin_backtrack(n, mode, cells, row_used, col_used, 0, out);
    return out;
}

LatinSquare cyclic_latin_square(int n) {
    if (n < 1) throw std::invalid_argument("cyclic_latin_square: n must be >= 1");
    std::vector<int> cells(size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cells[size_t(i) * n + j] = (i + j) % n + 1;
    return LatinSquare(n, std::move(cells));
}

BlockMatrix latin_flat_model_unitary(const std::vector<UnitVector>& basis,
                                     const LatinSquare& L) {
    const int n = L.n();
    if (int(basis.size()) != n)
        throw std::invalid_argument("latin_flat_model_unitary: basis size mismatch");
    for (const auto& x : basis)
        if (x.dim() != n)
            throw std::invalid_argument("latin_flat_model_unitary: basis vectors must span C^n");
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (std::abs(basis[size_t(a)].coords().dot(basis[size_t(b)].coords())) > 1e-10)
                throw std::invalid_argument("latin_flat_model_unitary: basis not orthonormal");
    std::vector<CMatrix> projections;
    projections.reserve(size_t(n));
    for (const auto& x : basis) projections.push_back(proj(x));
    BlockMatrix u(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            u.block(i, j) = projections[size_t(L.at(i, j) - 1)];
    return u;
}

}  // namespace qmm
