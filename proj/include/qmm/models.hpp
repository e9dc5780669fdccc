#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qmm/algebra.hpp"
#include "qmm/linalg.hpp"
#include "qmm/magic.hpp"

namespace qmm {

/// Finite weighted point list; weights are nonnegative and sum to 1.
struct ExactBackend {
    std::vector<double> weights;
};

/// Independent samples drawn from the named sampler, one splittable
/// stream per sample index.
struct MonteCarloBackend {
    std::string sampler;
    long long samples = 0;
    std::uint64_t seed = 0;
};

using ModelBackend = std::variant<ExactBackend, MonteCarloBackend>;

/// Which validator applies to an evaluated coordinate array.
enum class ModelKind { Magic, Biunitary };

/// A matrix model: an N x N array of K x K matrix-valued functions on a
/// sample space, together with the measure used to integrate them. The
/// evaluator fills a BlockMatrix with the array at one sample point;
/// exact backends index their point list, Monte Carlo backends feed the
/// index into a per-sample random stream.
struct ModelSpec {
    std::string name;
    std::map<std::string, std::string> meta;
    int coord_dim = 0;
    int block_dim = 0;
    bool self_adjoint_coordinates = true;
    ModelKind kind = ModelKind::Magic;
    ModelBackend backend;
    std::function<void(long long, BlockMatrix&)> evaluator;

    long long point_count() const;
    double point_weight(long long index) const;
    bool is_exact() const { return std::holds_alternative<ExactBackend>(backend); }
    BlockMatrix evaluate(long long index) const;
};

/// Max residual of the validator that applies to the model kind at one
/// sample point: magic axioms, or unitarity of the flattened array and of
/// its entrywise conjugate.
double model_validation_residual(const ModelSpec& model, long long index);

/// Weyl matrices W_{ia}: e_b -> <i,b> e_{a+b} for all (i,a) in H x H^,
/// indexed by flat_index(i) * n + flat_index(a).
struct WeylMatrixSet {
    FiniteAbelianGroup group;
    std::vector<CMatrix> matrices;

    const CMatrix& at(const GroupIndex& i, const GroupIndex& a) const;
};

CMatrix weyl_matrix(const FiniteAbelianGroup& group, const GroupIndex& i, const GroupIndex& a);
WeylMatrixSet weyl_matrices(const FiniteAbelianGroup& group);

/// Residuals of the four Weyl-matrix identities
///   W_{ia}*       = <i,a>   W_{-i,-a}
///   W_{ia} W_{jb} = <i,b>   W_{i+j,a+b}
///   W_{ia} W_{jb}* = <j-i,b> W_{i-j,a-b}
///   W_{ia}* W_{jb} = <i,a-b> W_{j-i,b-a}
/// checked over all index pairs, plus unitarity and the trace delta
/// tr(W_{ia}) = delta_{(i,a),(0,0)}.
struct WeylIdentityReport {
    double adjoint_residual = 0.0;
    double product_residual = 0.0;
    double product_adjoint_residual = 0.0;
    double adjoint_product_residual = 0.0;
    double unitarity_residual = 0.0;
    double trace_residual = 0.0;

    double max_residual() const;
};

WeylIdentityReport weyl_identities_check(const FiniteAbelianGroup& group);

/// Integration domain E for the Weyl model: an explicit finite list of
/// unitaries containing the Weyl matrices up to phase, the projective
/// group they generate, or Haar measure on U_n.
struct ExplicitEnsemble {
    std::vector<CMatrix> unitaries;
};
struct GeneratedWeylGroupEnsemble {};
struct HaarEnsemble {
    long long samples = 0;
    std::uint64_t seed = 0;
};
using WeylEnsemble = std::variant<ExplicitEnsemble, GeneratedWeylGroupEnsemble, HaarEnsemble>;

/// The sample unitary used by Monte Carlo Weyl models: one substream per
/// sample index, so every consumer sees identical samples.
CMatrix weyl_sample_unitary(int n, std::uint64_t seed, long long index);

/// An ensemble reduced to either a validated point list (uniform weights)
/// or Haar sampling parameters. Every consumer of the same ensemble sees
/// the same points in the same order.
struct ResolvedWeylEnsemble {
    bool exact = true;
    std::vector<CMatrix> points;
    long long samples = 0;
    std::uint64_t seed = 0;
    std::string label;
};

ResolvedWeylEnsemble resolve_weyl_ensemble(const FiniteAbelianGroup& group,
                                           const WeylEnsemble& ensemble);

/// Row-major flattening of an n x n matrix scaled by 1/sqrt(n), the
/// isometry from matrix space with the normalized trace inner product to
/// C^{n^2} with the Euclidean one.
CVector weyl_vectorize(const CMatrix& x);

/// The flat magic-unitary model (ia),(jb) -> Proj(W_{ia} U W_{jb}*), with
/// the projection acting on C^{n x n} carrying the normalized trace inner
/// product (row-major vectorization scaled by 1/sqrt(n)).
ModelSpec weyl_model(const FiniteAbelianGroup& group, const WeylEnsemble& ensemble);

/// w_{ij} = 1 on permutations with sigma(j) = i: K = 1, uniform over S_N.
ModelSpec classical_permutation_model(int n);

/// The K = 2 antidiagonal model u_{ij} = [[0, v_{ij}], [conj(v_{ij}), 0]]
/// over a finite list of N x N unitaries closed under multiplication and
/// entrywise conjugation.
ModelSpec half_classical_model(const std::vector<CMatrix>& unitaries);

/// Group-dual model of a half-abelian reflection group: generator i maps
/// to chi -> [[0, chi(h_i)], [conj(chi(h_i)), 0]], uniform over the
/// characters of Lambda. Coordinates sit on the block diagonal.
ModelSpec dual_reflection_model(const FiniteAbelianGroup& lambda,
                                const std::vector<GroupIndex>& generators);

/// Finite group presented by its multiplication table: table[g][h] = gh.
struct CayleyTable {
    int order = 0;
    std::vector<int> products;

    int product(int g, int h) const { return products[size_t(g) * order + h]; }
};

/// Throws unless the table has an identity, inverses, and is associative.
void validate_cayley_table(const CayleyTable& table);
int cayley_identity(const CayleyTable& table);

CayleyTable cyclic_group_table(int n);
/// S_n in lexicographic one-line order, n <= 5.
CayleyTable symmetric_group_table(int n);

/// Group-dual model from the left regular representation: coordinate g
/// maps to the left-translation permutation matrix, single sample point.
ModelSpec regular_representation_model(const CayleyTable& table);

/// Flat Latin-square model of S_n: standard basis vectors composed with a
/// uniform half-normalized Latin square.
ModelSpec latin_fiber_model(int n);

/// Single-point scalar model sending the coordinate to a primitive root
/// of unity. Not stationary for order >= 2; used as a Cesaro test bed.
ModelSpec root_of_unity_model(int order);

/// Word in the diagonal coordinates of a group-dual model: letters are
/// (coordinate index, exponent +/-1). Empty word is the identity.
struct GroupWord {
    std::vector<std::pair<int, int>> letters;
};

struct DualWordResult {
    GroupWord word;
    Complex value;
    bool identity_word = false;
    double defect = 0.0;
    bool pass = false;
};

/// Group-dual stationarity criterion: integrates tr(word) over the sample
/// space and compares with 1 for identity words, 0 otherwise. A word
/// counts as identity when its evaluation is the identity matrix at every
/// sample point.
std::vector<DualWordResult> dual_stationarity_check(const ModelSpec& model,
                                                    const std::vector<GroupWord>& words,
                                                    double tol = 1e-12);

/// Composite index of the Weyl model coordinate (i, a).
int weyl_pair_index(const FiniteAbelianGroup& group, const GroupIndex& i, const GroupIndex& a);

}  // namespace qmm
