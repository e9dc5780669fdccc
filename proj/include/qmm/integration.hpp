#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmm/models.hpp"

namespace qmm {

enum class Letter { Plain, Star };

/// Coordinate word e in {1,*}^p. Text form: one character per letter,
/// '1' for plain and '*' for star, e.g. "11*".
struct Word {
    std::vector<Letter> letters;

    static Word plain(int p);
    static Word parse(std::string_view text);
    int length() const { return int(letters.size()); }
    std::string str() const;
    bool all_plain() const;
    bool operator==(const Word&) const = default;
};

/// Words on models with self-adjoint coordinates all give the same
/// transfer matrix, so they collapse to the all-plain representative.
Word canonical_word(const ModelSpec& model, const Word& word);

struct TransferBackendInfo {
    bool exact = true;
    long long samples = 0;
    std::uint64_t seed = 0;
    int batches = 0;
};

/// The N^p x N^p matrix of integrated coordinate-word traces,
///   T_{i_1..i_p, j_1..j_p} = integral of tr(U_{i_1 j_1}^{e_1} ... U_{i_p j_p}^{e_p}),
/// with row/column multi-indices encoded base N, slot 1 most significant.
struct TransferMatrix {
    int coord_dim = 0;
    Word word;
    CMatrix values;
    TransferBackendInfo backend;
    /// Monte Carlo only: per-batch means and the entrywise batch-mean
    /// standard error of the estimate.
    std::vector<CMatrix> batch_means;
    Eigen::MatrixXd se;

    int p() const { return word.length(); }
};

struct TransferOptions {
    /// Hard cap on materialized complex entries, counting batch storage.
    long long memory_cap_entries = 1LL << 28;
    /// Worker cap; 0 means hardware concurrency. Results do not depend on
    /// this value.
    int threads = 0;
    /// Monte Carlo batch count for batch-mean standard errors.
    int batches = 20;
};

TransferMatrix transfer_matrix(const ModelSpec& model, const Word& word,
                               const TransferOptions& options = {});

CMatrix matrix_power(const CMatrix& m, long long r);

/// Entry of T^r, the truncated integral of the word at depth r.
Complex truncated_integral(const TransferMatrix& t, long long r, long long row, long long col);
Complex truncated_integral(const TransferMatrix& t, long long r, const MultiIndex& row,
                           const MultiIndex& col);

struct CesaroResult {
    CMatrix mean;
    int k = 0;
    long long tracked_row = 0;
    long long tracked_col = 0;
    /// Partial means of the tracked entry after r = 1..k terms.
    std::vector<Complex> history;
};

/// (1/k) sum_{r=1..k} T^r with compensated accumulation.
CesaroResult cesaro(const CMatrix& t, int k, long long tracked_row = 0,
                    long long tracked_col = 0);

struct WordDefectReport {
    Word word;
    double defect = 0.0;      // max entrywise |T^2 - T|
    double se_max = 0.0;      // max propagated SE (Monte Carlo)
    double threshold_max = 0.0;
    bool pass = false;
};

struct StationarityReport {
    int p_max = 0;
    double exact_tolerance = 0.0;
    std::vector<WordDefectReport> words;
    bool pass = false;
    std::string verdict;
};

/// Tests T_e^2 = T_e for every word class of length 1..p_max. Exact
/// backends compare against exact_tol; Monte Carlo backends pass when
/// entrywise |T^2 - T| <= 4 * propagated batch SE + 1e-12, where the SE
/// of T^2 - T is propagated from the batch means by linearizing at the
/// full estimate. The verdict names the tested depth: idempotence at
/// p <= p_max proves nothing about larger p.
StationarityReport stationarity_defect(const ModelSpec& model, int p_max,
                                       const TransferOptions& options = {},
                                       double exact_tol = 1e-9);

enum class MomentMode { Streaming, Materialized };

struct CharacterMoment {
    int p = 0;
    double value = 0.0;
    double se = 0.0;
    /// Magnitude of the discarded imaginary part.
    double imag_residual = 0.0;
};

/// Moments of the main character chi = sum_i u_ii for p = 0..p_max.
/// Streaming mode folds tr((sum_i U_ii)^p) sample by sample in O(K^2)
/// memory; materialized mode takes traces of the transfer matrices.
std::vector<CharacterMoment> character_moments(const ModelSpec& model, int p_max,
                                               MomentMode mode,
                                               const TransferOptions& options = {});

/// Closed-form Weyl transfer matrix: the coupling-product formula with
/// one 2-point trace table per sample point. Shares the sample stream
/// with weyl_model, so Monte Carlo runs see identical samples.
TransferMatrix weyl_transfer_fastpath(const FiniteAbelianGroup& group,
                                      const WeylEnsemble& ensemble, int p,
                                      const TransferOptions& options = {});

/// Closed-form half-classical transfer matrix: zero for odd p, averaged
/// alternating real products for even p.
TransferMatrix halfclassical_transfer(const std::vector<CMatrix>& unitaries, int p,
                                      const TransferOptions& options = {});

}  // namespace qmm
