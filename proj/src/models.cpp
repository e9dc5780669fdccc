#include "qmm/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace qmm {

long long ModelSpec::point_count() const {
    if (auto* exact = std::get_if<ExactBackend>(&backend))
        return (long long)(exact->weights.size());
    return std::get<MonteCarloBackend>(backend).samples;
}

double ModelSpec::point_weight(long long index) const {
    if (auto* exact = std::get_if<ExactBackend>(&backend))
        return exact->weights[size_t(index)];
    return 1.0 / double(std::get<MonteCarloBackend>(backend).samples);
}

BlockMatrix ModelSpec::evaluate(long long index) const {
    BlockMatrix out(coord_dim, block_dim);
    evaluator(index, out);
    return out;
}

namespace {

CMatrix conjugate_blocks_flattened(const BlockMatrix& u) {
    CMatrix flat = u.flattened();
    return flat.conjugate();
}

}  // namespace

double model_validation_residual(const ModelSpec& model, long long index) {
    BlockMatrix u = model.evaluate(index);
    if (model.kind == ModelKind::Magic) {
        auto report = validate_magic(u, 1e-9);
        return std::max({report.projection_residual, report.row_residual,
                         report.column_residual});
    }
    double direct = unitarity_residual(u.flattened());
    double conjugate = unitarity_residual(conjugate_blocks_flattened(u));
    return std::max(direct, conjugate);
}

int weyl_pair_index(const FiniteAbelianGroup& group, const GroupIndex& i, const GroupIndex& a) {
    return flat_index(group, i) * group.order() + flat_index(group, a);
}

CMatrix weyl_matrix(const FiniteAbelianGroup& group, const GroupIndex& i, const GroupIndex& a) {
    const int n = group.order();
    CMatrix w = CMatrix::Zero(n, n);
    for (int bf = 0; bf < n; ++bf) {
        GroupIndex b = unflatten_index(group, bf);
        int target = flat_index(group, index_add(group, a, b));
        w(target, bf) = coupling(group, i, b);
    }
    return w;
}

WeylMatrixSet weyl_matrices(const FiniteAbelianGroup& group) {
    WeylMatrixSet set{group, {}};
    const int n = group.order();
    set.matrices.reserve(size_t(n) * n);
    for (int f = 0; f < n; ++f)
        for (int g = 0; g < n; ++g)
            set.matrices.push_back(
                weyl_matrix(group, unflatten_index(group, f), unflatten_index(group, g)));
    return set;
}

const CMatrix& WeylMatrixSet::at(const GroupIndex& i, const GroupIndex& a) const {
    return matrices[size_t(weyl_pair_index(group, i, a))];
}

double WeylIdentityReport::max_residual() const {
    return std::max({adjoint_residual, product_residual, product_adjoint_residual,
                     adjoint_product_residual, unitarity_residual, trace_residual});
}

WeylIdentityReport weyl_identities_check(const FiniteAbelianGroup& group) {
    if (group.order() > 16)
        throw std::invalid_argument("weyl_identities_check: group order above 16");
    const int n = group.order();
    WeylMatrixSet set = weyl_matrices(group);
    WeylIdentityReport report;
    auto residual = [](const CMatrix& a, const CMatrix& b) {
        return (a - b).cwiseAbs().maxCoeff();
    };
    for (int fi = 0; fi < n; ++fi)
        for (int fa = 0; fa < n; ++fa) {
            GroupIndex i = unflatten_index(group, fi);
            GroupIndex a = unflatten_index(group, fa);
            const CMatrix& w = set.at(i, a);
            report.unitarity_residual =
                std::max(report.unitarity_residual, qmm::unitarity_residual(w));
            double expected_trace = (fi == 0 && fa == 0) ? 1.0 : 0.0;
            report.trace_residual = std::max(
                report.trace_residual, std::abs(w.trace() / double(n) - expected_trace));
            report.adjoint_residual = std::max(
                report.adjoint_residual,
                residual(w.adjoint(), coupling(group, i, a) *
                                          set.at(index_neg(group, i), index_neg(group, a))));
            for (int fj = 0; fj < n; ++fj)
                for (int fb = 0; fb < n; ++fb) {
                    GroupIndex j = unflatten_index(group, fj);
                    GroupIndex b = unflatten_index(group, fb);
                    const CMatrix& v = set.at(j, b);
                    report.product_residual = std::max(
                        report.product_residual,
                        residual(w * v, coupling(group, i, b) *
                                            set.at(index_add(group, i, j),
                                                   index_add(group, a, b))));
                    report.product_adjoint_residual = std::max(
                        report.product_adjoint_residual,
                        residual(w * v.adjoint(),
                                 coupling(group, index_sub(group, j, i), b) *
                                     set.at(index_sub(group, i, j), index_sub(group, a, b))));
                    report.adjoint_product_residual = std::max(
                        report.adjoint_product_residual,
                        residual(w.adjoint() * v,
                                 coupling(group, i, index_sub(group, a, b)) *
                                     set.at(index_sub(group, j, i), index_sub(group, b, a))));
                }
        }
    return report;
}

CVector weyl_vectorize(const CMatrix& x) {
    const int n = int(x.rows());
    CVector v(Eigen::Index(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            v[Eigen::Index(r) * n + c] = x(r, c);
    return v / std::sqrt(double(n));
}

CMatrix weyl_sample_unitary(int n, std::uint64_t seed, long long index) {
    RandomStream stream = RandomStream(seed).substream(std::uint64_t(index));
    return haar_unitary(n, stream);
}

namespace {

bool contains_up_to_phase(const std::vector<CMatrix>& list, const CMatrix& target, double tol) {
    const double d = double(target.rows());
    for (const auto& e : list)
        if (std::abs(std::abs((target.adjoint() * e).trace()) - d) <= tol * d) return true;
    return false;
}

void fill_weyl_evaluation(const WeylMatrixSet& set, const CMatrix& u, BlockMatrix& out) {
    const int n = set.group.order();
    const int big = n * n;
    // entry ((ia),(jb)) projects onto the line of W_{ia} U W_{jb}*
    std::vector<CMatrix> left(static_cast<size_t>(big));
    for (int ia = 0; ia < big; ++ia) left[size_t(ia)] = set.matrices[size_t(ia)] * u;
    for (int ia = 0; ia < big; ++ia)
        for (int jb = 0; jb < big; ++jb) {
            CMatrix m = left[size_t(ia)] * set.matrices[size_t(jb)].adjoint();
            CVector v = weyl_vectorize(m);
            out.block(ia, jb) = v * v.adjoint();
        }
}

}  // namespace

ResolvedWeylEnsemble resolve_weyl_ensemble(const FiniteAbelianGroup& group,
                                           const WeylEnsemble& ensemble) {
    const int n = group.order();
    ResolvedWeylEnsemble resolved;
    if (auto* list = std::get_if<ExplicitEnsemble>(&ensemble)) {
        for (const auto& e : list->unitaries) {
            if (e.rows() != n || e.cols() != n)
                throw std::invalid_argument("weyl_model: ensemble element has wrong dimension");
            if (unitarity_residual(e) > 1e-9)
                throw std::invalid_argument("weyl_model: ensemble element not unitary");
        }
        WeylMatrixSet set = weyl_matrices(group);
        for (const auto& w : set.matrices)
            if (!contains_up_to_phase(list->unitaries, w, 1e-8))
                throw std::invalid_argument(
                    "weyl_model: ensemble does not contain the Weyl matrices up to phase");
        resolved.points = list->unitaries;
        resolved.label = "explicit";
    } else if (std::holds_alternative<GeneratedWeylGroupEnsemble>(ensemble)) {
        resolved.points = projective_closure(weyl_matrices(group).matrices);
        resolved.label = "weyl_group";
    } else {
        const auto& haar = std::get<HaarEnsemble>(ensemble);
        if (haar.samples < 1)
            throw std::invalid_argument("weyl_model: Haar ensemble needs samples >= 1");
        resolved.exact = false;
        resolved.samples = haar.samples;
        resolved.seed = haar.seed;
        resolved.label = "haar";
    }
    return resolved;
}

ModelSpec weyl_model(const FiniteAbelianGroup& group, const WeylEnsemble& ensemble) {
    const int n = group.order();
    auto set = std::make_shared<WeylMatrixSet>(weyl_matrices(group));
    ResolvedWeylEnsemble resolved = resolve_weyl_ensemble(group, ensemble);
    ModelSpec spec;
    spec.coord_dim = n * n;
    spec.block_dim = n * n;
    spec.self_adjoint_coordinates = true;
    spec.kind = ModelKind::Magic;
    spec.meta["type"] = "weyl";
    spec.meta["group"] = group.literal();
    spec.name = "weyl(" + group.literal() + ", " + resolved.label + ")";
    spec.meta["ensemble"] = resolved.label;

    if (resolved.exact) {
        auto points = std::make_shared<std::vector<CMatrix>>(std::move(resolved.points));
        spec.meta["points"] = std::to_string(points->size());
        spec.backend = ExactBackend{std::vector<double>(
            points->size(), 1.0 / double(points->size()))};
        spec.evaluator = [set, points](long long index, BlockMatrix& out) {
            fill_weyl_evaluation(*set, (*points)[size_t(index)], out);
        };
    } else {
        spec.backend = MonteCarloBackend{"haar_unitary(" + std::to_string(n) + ")",
                                         resolved.samples, resolved.seed};
        std::uint64_t seed = resolved.seed;
        spec.evaluator = [set, n, seed](long long index, BlockMatrix& out) {
            fill_weyl_evaluation(*set, weyl_sample_unitary(n, seed, index), out);
        };
    }
    return spec;
}

namespace {

long long factorial_ll(int n) {
    long long f = 1;
    for (int t = 2; t <= n; ++t) f *= t;
    return f;
}

/// Lexicographic unrank of a permutation of {0..n-1}.
std::vector<int> unrank_permutation(int n, long long rank) {
    std::vector<int> pool(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) pool[size_t(t)] = t;
    std::vector<int> perm;
    perm.reserve(size_t(n));
    long long radix = factorial_ll(n);
    for (int t = n; t >= 1; --t) {
        radix /= t;
        int pick = int(rank / radix);
        rank %= radix;
        perm.push_back(pool[size_t(pick)]);
        pool.erase(pool.begin() + pick);
    }
    return perm;
}

}  // namespace

ModelSpec classical_permutation_model(int n) {
    if (n < 1 || n > 8)
        throw std::invalid_argument("classical_permutation_model: n must be in 1..8");
    const long long points = factorial_ll(n);
    ModelSpec spec;
    spec.name = "classical(" + std::to_string(n) + ")";
    spec.meta["type"] = "classical";
    spec.meta["n"] = std::to_string(n);
    spec.meta["points"] = std::to_string(points);
    spec.coord_dim = n;
    spec.block_dim = 1;
    spec.self_adjoint_coordinates = true;
    spec.kind = ModelKind::Magic;
    spec.backend = ExactBackend{std::vector<double>(size_t(points), 1.0 / double(points))};
    spec.evaluator = [n](long long index, BlockMatrix& out) {
        std::vector<int> sigma = unrank_permutation(n, index);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.block(i, j)(0, 0) = sigma[size_t(j)] == i ? 1.0 : 0.0;
    };
    return spec;
}

ModelSpec half_classical_model(const std::vector<CMatrix>& unitaries) {
    if (unitaries.empty())
        throw std::invalid_argument("half_classical_model: empty unitary list");
    const int n = int(unitaries.front().rows());
    const double tol = 1e-9;
    for (size_t s = 0; s < unitaries.size(); ++s) {
        const CMatrix& v = unitaries[s];
        if (v.rows() != n || v.cols() != n)
            throw std::invalid_argument("half_classical_model: dimension mismatch at element " +
                                        std::to_string(s));
        if (unitarity_residual(v) > tol)
            throw std::invalid_argument("half_classical_model: element " + std::to_string(s) +
                                        " is not unitary");
    }
    auto find = [&](const CMatrix& m) {
        for (const auto& e : unitaries)
            if ((e - m).cwiseAbs().maxCoeff() <= tol) return true;
        return false;
    };
    for (size_t s = 0; s < unitaries.size(); ++s) {
        if (!find(unitaries[s].conjugate()))
            throw std::invalid_argument(
                "half_classical_model: not closed under entrywise conjugation at element " +
                std::to_string(s));
        for (size_t t = 0; t < unitaries.size(); ++t)
            if (!find(unitaries[s] * unitaries[t]))
                throw std::invalid_argument(
                    "half_classical_model: not closed under multiplication at pair (" +
                    std::to_string(s) + ", " + std::to_string(t) + ")");
    }
    auto points = std::make_shared<std::vector<CMatrix>>(unitaries);
    ModelSpec spec;
    spec.name = "half_classical(n=" + std::to_string(n) +
                ", points=" + std::to_string(unitaries.size()) + ")";
    spec.meta["type"] = "half_classical";
    spec.meta["n"] = std::to_string(n);
    spec.meta["points"] = std::to_string(unitaries.size());
    spec.coord_dim = n;
    spec.block_dim = 2;
    spec.self_adjoint_coordinates = true;
    spec.kind = ModelKind::Biunitary;
    spec.backend =
        ExactBackend{std::vector<double>(unitaries.size(), 1.0 / double(unitaries.size()))};
    spec.evaluator = [points, n](long long index, BlockMatrix& out) {
        const CMatrix& v = (*points)[size_t(index)];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CMatrix& block = out.block(i, j);
                block(0, 0) = 0.0;
                block(1, 1) = 0.0;
                block(0, 1) = v(i, j);
                block(1, 0) = std::conj(v(i, j));
            }
    };
    return spec;
}

ModelSpec dual_reflection_model(const FiniteAbelianGroup& lambda,
                                const std::vector<GroupIndex>& generators) {
    if (generators.empty())
        throw std::invalid_argument("dual_reflection_model: no generators");
    for (const auto& h : generators)
        if (int(h.components.size()) != lambda.factor_count())
            throw std::invalid_argument("dual_reflection_model: generator index mismatch");
    const int n = int(generators.size());
    const int points = lambda.order();
    auto gens = std::make_shared<std::vector<GroupIndex>>(generators);
    auto group = std::make_shared<FiniteAbelianGroup>(lambda);
    ModelSpec spec;
    spec.name = "dual_reflection(" + lambda.literal() + ", " + std::to_string(n) +
                " generators)";
    spec.meta["type"] = "dual_reflection";
    spec.meta["lambda"] = lambda.literal();
    spec.meta["generators"] = std::to_string(n);
    spec.meta["points"] = std::to_string(points);
    spec.coord_dim = n;
    spec.block_dim = 2;
    spec.self_adjoint_coordinates = false;
    spec.kind = ModelKind::Biunitary;
    spec.backend = ExactBackend{std::vector<double>(size_t(points), 1.0 / double(points))};
    spec.evaluator = [group, gens](long long index, BlockMatrix& out) {
        GroupIndex chi = unflatten_index(*group, int(index));
        for (size_t t = 0; t < gens->size(); ++t) {
            Complex phase = coupling(*group, chi, (*gens)[t]);
            CMatrix& block = out.block(int(t), int(t));
            block(0, 0) = 0.0;
            block(1, 1) = 0.0;
            block(0, 1) = phase;
            block(1, 0) = std::conj(phase);
        }
    };
    return spec;
}

void validate_cayley_table(const CayleyTable& table) {
    const int n = table.order;
    if (n < 1) throw std::invalid_argument("cayley table: order must be >= 1");
    if (int(table.products.size()) != n * n)
        throw std::invalid_argument("cayley table: wrong size");
    for (int v : table.products)
        if (v < 0 || v >= n) throw std::invalid_argument("cayley table: entry out of range");
    int identity = -1;
    for (int e = 0; e < n; ++e) {
        bool ok = true;
        for (int g = 0; g < n; ++g)
            if (table.product(e, g) != g || table.product(g, e) != g) {
                ok = false;
                break;
            }
        if (ok) {
            identity = e;
            break;
        }
    }
    if (identity < 0) throw std::invalid_argument("cayley table: no identity element");
    for (int g = 0; g < n; ++g) {
        bool has_inverse = false;
        for (int h = 0; h < n; ++h)
            if (table.product(g, h) == identity && table.product(h, g) == identity) {
                has_inverse = true;
                break;
            }
        if (!has_inverse)
            throw std::invalid_argument("cayley table: element without inverse");
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                if (table.product(table.product(a, b), c) !=
                    table.product(a, table.product(b, c)))
                    throw std::invalid_argument("cayley table: not associative");
}

int cayley_identity(const CayleyTable& table) {
    for (int e = 0; e < table.order; ++e) {
        bool ok = true;
        for (int g = 0; g < table.order; ++g)
            if (table.product(e, g) != g || table.product(g, e) != g) {
                ok = false;
                break;
            }
        if (ok) return e;
    }
    throw std::invalid_argument("cayley table: no identity element");
}

CayleyTable cyclic_group_table(int n) {
    if (n < 1) throw std::invalid_argument("cyclic_group_table: n must be >= 1");
    CayleyTable table;
    table.order = n;
    table.products.resize(size_t(n) * n);
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            table.products[size_t(g) * n + h] = (g + h) % n;
    return table;
}

CayleyTable symmetric_group_table(int n) {
    if (n < 1 || n > 5)
        throw std::invalid_argument("symmetric_group_table: n must be in 1..5");
    const long long order = factorial_ll(n);
    std::vector<std::vector<int>> perms;
    perms.reserve(size_t(order));
    for (long long r = 0; r < order; ++r) perms.push_back(unrank_permutation(n, r));
    auto rank_of = [&](const std::vector<int>& p) {
        for (size_t r = 0; r < perms.size(); ++r)
            if (perms[r] == p) return int(r);
        throw std::logic_error("symmetric_group_table: permutation not found");
    };
    CayleyTable table;
    table.order = int(order);
    table.products.resize(size_t(order) * order);
    std::vector<int> composed(static_cast<size_t>(n));
    for (int g = 0; g < int(order); ++g)
        for (int h = 0; h < int(order); ++h) {
            // (g h)(x) = g(h(x))
            for (int x = 0; x < n; ++x)
                composed[size_t(x)] = perms[size_t(g)][size_t(perms[size_t(h)][size_t(x)])];
            table.products[size_t(g) * order + h] = rank_of(composed);
        }
    return table;
}

ModelSpec regular_representation_model(const CayleyTable& table) {
    validate_cayley_table(table);
    const int n = table.order;
    auto shared_table = std::make_shared<CayleyTable>(table);
    ModelSpec spec;
    spec.name = "regular(order=" + std::to_string(n) + ")";
    spec.meta["type"] = "regular";
    spec.meta["order"] = std::to_string(n);
    spec.meta["points"] = "1";
    spec.coord_dim = n;
    spec.block_dim = n;
    spec.self_adjoint_coordinates = false;
    spec.kind = ModelKind::Biunitary;
    spec.backend = ExactBackend{{1.0}};
    spec.evaluator = [shared_table, n](long long, BlockMatrix& out) {
        for (int g = 0; g < n; ++g) {
            CMatrix& block = out.block(g, g);
            block.setZero();
            for (int h = 0; h < n; ++h)
                block(shared_table->product(g, h), h) = 1.0;
        }
    };
    return spec;
}

ModelSpec latin_fiber_model(int n) {
    auto squares =
        std::make_shared<std::vector<LatinSquare>>(latin_enumerate(n, LatinMode::Half));
    const size_t points = squares->size();
    ModelSpec spec;
    spec.name = "latin_fiber(" + std::to_string(n) + ")";
    spec.meta["type"] = "latin_fiber";
    spec.meta["n"] = std::to_string(n);
    spec.meta["points"] = std::to_string(points);
    spec.coord_dim = n;
    spec.block_dim = n;
    spec.self_adjoint_coordinates = true;
    spec.kind = ModelKind::Magic;
    spec.backend = ExactBackend{std::vector<double>(points, 1.0 / double(points))};
    spec.evaluator = [squares, n](long long index, BlockMatrix& out) {
        const LatinSquare& L = (*squares)[size_t(index)];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CMatrix& block = out.block(i, j);
                block.setZero();
                int v = L.at(i, j) - 1;
                block(v, v) = 1.0;
            }
    };
    return spec;
}

ModelSpec root_of_unity_model(int order) {
    if (order < 1) throw std::invalid_argument("root_of_unity_model: order must be >= 1");
    ModelSpec spec;
    spec.name = "root_of_unity(" + std::to_string(order) + ")";
    spec.meta["type"] = "root_of_unity";
    spec.meta["order"] = std::to_string(order);
    spec.meta["points"] = "1";
    spec.coord_dim = 1;
    spec.block_dim = 1;
    spec.self_adjoint_coordinates = order <= 2;
    spec.kind = ModelKind::Biunitary;
    spec.backend = ExactBackend{{1.0}};
    FiniteAbelianGroup cyclic{std::vector<int>{order}};
    GroupIndex gen = unflatten_index(cyclic, order > 1 ? 1 : 0);
    Complex omega = coupling(cyclic, gen, gen);
    spec.evaluator = [omega](long long, BlockMatrix& out) { out.block(0, 0)(0, 0) = omega; };
    return spec;
}

std::vector<DualWordResult> dual_stationarity_check(const ModelSpec& model,
                                                    const std::vector<GroupWord>& words,
                                                    double tol) {
    if (model.coord_dim < 1)
        throw std::invalid_argument("dual_stationarity_check: model has no coordinates");
    std::vector<DualWordResult> results;
    results.reserve(words.size());
    const int k = model.block_dim;
    const CMatrix id = CMatrix::Identity(k, k);
    BlockMatrix buffer(model.coord_dim, k);
    for (const auto& word : words) {
        for (const auto& [index, exponent] : word.letters) {
            if (index < 0 || index >= model.coord_dim)
                throw std::invalid_argument("dual_stationarity_check: letter out of range");
            if (exponent != 1 && exponent != -1)
                throw std::invalid_argument("dual_stationarity_check: exponent must be +-1");
        }
        DualWordResult result;
        result.word = word;
        Complex value = 0.0;
        bool identity = true;
        for (long long x = 0; x < model.point_count(); ++x) {
            model.evaluator(x, buffer);
            CMatrix product = id;
            for (const auto& [index, exponent] : word.letters) {
                const CMatrix& g = buffer.block(index, index);
                if (exponent == 1)
                    product = product * g;
                else
                    product = product * g.adjoint();
            }
            if ((product - id).cwiseAbs().maxCoeff() > 1e-9) identity = false;
            value += model.point_weight(x) * product.trace() / double(k);
        }
        result.value = value;
        result.identity_word = identity;
        result.defect = std::abs(value - (identity ? Complex(1.0) : Complex(0.0)));
        result.pass = result.defect <= tol;
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace qmm
