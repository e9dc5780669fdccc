#include "qmm/integration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace qmm {

Word Word::plain(int p) {
    if (p < 0) throw std::invalid_argument("Word::plain: negative length");
    Word w;
    w.letters.assign(size_t(p), Letter::Plain);
    return w;
}

Word Word::parse(std::string_view text) {
    Word w;
    w.letters.reserve(text.size());
    for (char c : text) {
        if (c == '1')
            w.letters.push_back(Letter::Plain);
        else if (c == '*')
            w.letters.push_back(Letter::Star);
        else
            throw std::invalid_argument("Word::parse: letters must be '1' or '*'");
    }
    return w;
}

std::string Word::str() const {
    std::string out;
    for (Letter l : letters) out += (l == Letter::Plain ? '1' : '*');
    return out;
}

bool Word::all_plain() const {
    return std::all_of(letters.begin(), letters.end(),
                       [](Letter l) { return l == Letter::Plain; });
}

Word canonical_word(const ModelSpec& model, const Word& word) {
    if (model.self_adjoint_coordinates) return Word::plain(word.length());
    return word;
}

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

/// Runs body(0..tasks-1) on up to `threads` workers. Task order is
/// unspecified, so bodies must write disjoint data.
void parallel_for(int tasks, int threads, const std::function<void(int)>& body) {
    int workers = std::min(threads, tasks);
    if (workers <= 1) {
        for (int t = 0; t < tasks; ++t) body(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                int t = next.fetch_add(1);
                if (t >= tasks) return;
                try {
                    body(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Returns N^exp if it stays within cap, otherwise -1.
long long pow_within(long long base, int exp, long long cap) {
    long long v = 1;
    for (int t = 0; t < exp; ++t) {
        if (base > 0 && v > cap / base) return -1;
        v *= base;
    }
    return v > cap ? -1 : v;
}

struct BatchRange {
    long long begin = 0;
    long long end = 0;
    long long size() const { return end - begin; }
};

std::vector<BatchRange> make_batches(long long samples, int batches) {
    int count = int(std::min<long long>(batches, samples));
    count = std::max(count, 1);
    std::vector<BatchRange> out(static_cast<size_t>(count));
    long long base = samples / count;
    long long extra = samples % count;
    long long cursor = 0;
    for (int b = 0; b < count; ++b) {
        long long size = base + (b < extra ? 1 : 0);
        out[size_t(b)] = {cursor, cursor + size};
        cursor += size;
    }
    return out;
}

/// Blocks of one evaluated sample point with the word letters applied:
/// star letters read from the entrywise-adjoint copy.
struct PointBlocks {
    const BlockMatrix* plain = nullptr;
    BlockMatrix adjoint;
    const Word* word = nullptr;
    bool any_star = false;

    void bind(const BlockMatrix& eval, const Word& w) {
        plain = &eval;
        word = &w;
        any_star = !w.all_plain();
        if (any_star && adjoint.n() == 0) adjoint = BlockMatrix(eval.n(), eval.k());
    }

    void refresh() {
        if (!any_star) return;
        for (int i = 0; i < plain->n(); ++i)
            for (int j = 0; j < plain->n(); ++j)
                adjoint.block(i, j) = plain->block(i, j).adjoint();
    }

    const CMatrix& at(int level, int i, int j) const {
        return word->letters[size_t(level)] == Letter::Star ? adjoint.block(i, j)
                                                            : plain->block(i, j);
    }
};

void transfer_dfs(const PointBlocks& pb, int level, int p, int n, double inv_k,
                  const CMatrix& prefix, long long row, long long col, double weight,
                  CMatrix& target) {
    if (level == p - 1) {
        long long row_base = row * n;
        long long col_base = col * n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Complex tr = prefix.transpose().cwiseProduct(pb.at(level, i, j)).sum();
                target(row_base + i, col_base + j) += weight * inv_k * tr;
            }
        return;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            CMatrix next = prefix * pb.at(level, i, j);
            transfer_dfs(pb, level + 1, p, n, inv_k, next, row * n + i, col * n + j, weight,
                         target);
        }
}

/// Adds weight * (transfer contribution of one point) into target. The
/// top branch level can be spread over threads: branch (i1, j1) writes
/// only the (i1, j1) block of target, so writes stay disjoint.
void accumulate_point(const PointBlocks& pb, int p, int n, int k, double weight,
                      CMatrix& target, int threads) {
    const double inv_k = 1.0 / double(k);
    if (p == 0) {
        target(0, 0) += weight;
        return;
    }
    if (p == 1) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                target(i, j) += weight * inv_k * pb.at(0, i, j).trace();
        return;
    }
    parallel_for(n * n, threads, [&](int branch) {
        int i = branch / n;
        int j = branch % n;
        transfer_dfs(pb, 1, p, n, inv_k, pb.at(0, i, j), i, j, weight, target);
    });
}

void require_evaluator(const ModelSpec& model) {
    if (!model.evaluator)
        throw std::invalid_argument("model has no evaluator");
    if (model.coord_dim < 1 || model.block_dim < 1)
        throw std::invalid_argument("model has invalid dimensions");
}

long long checked_transfer_dim(const ModelSpec& model, int p, const TransferOptions& options) {
    long long budget_factor = model.is_exact() ? 1 : (long long)(options.batches) + 2;
    long long dim = pow_within(model.coord_dim, p, options.memory_cap_entries);
    long long total = dim < 0 ? -1
                              : pow_within(dim, 2, options.memory_cap_entries / budget_factor);
    if (dim < 0 || total < 0)
        throw std::runtime_error(
            "transfer matrix at p = " + std::to_string(p) + " for N = " +
            std::to_string(model.coord_dim) +
            " exceeds the memory cap; streaming character moments avoid materializing it");
    return dim;
}

/// Entrywise batch-mean standard error of the overall estimate: sample
/// standard deviation of the batch means over sqrt(batch count).
Eigen::MatrixXd batch_standard_error(const std::vector<CMatrix>& batch_means) {
    const int b = int(batch_means.size());
    const auto rows = batch_means.front().rows();
    const auto cols = batch_means.front().cols();
    if (b < 2) return Eigen::MatrixXd::Zero(rows, cols);
    CMatrix mean = CMatrix::Zero(rows, cols);
    for (const auto& m : batch_means) mean += m;
    mean /= double(b);
    Eigen::MatrixXd variance = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& m : batch_means) variance += (m - mean).cwiseAbs2();
    variance /= double(b - 1);
    return (variance / double(b)).cwiseSqrt();
}

}  // namespace

TransferMatrix transfer_matrix(const ModelSpec& model, const Word& word,
                               const TransferOptions& options) {
    require_evaluator(model);
    Word canonical = canonical_word(model, word);
    const int p = canonical.length();
    const int n = model.coord_dim;
    const int k = model.block_dim;
    const long long dim = checked_transfer_dim(model, p, options);
    const int threads = resolve_threads(options.threads);

    TransferMatrix result;
    result.coord_dim = n;
    result.word = canonical;

    if (model.is_exact()) {
        result.backend.exact = true;
        result.values = CMatrix::Zero(dim, dim);
        BlockMatrix buffer(n, k);
        PointBlocks pb;
        pb.bind(buffer, canonical);
        for (long long x = 0; x < model.point_count(); ++x) {
            model.evaluator(x, buffer);
            pb.refresh();
            accumulate_point(pb, p, n, k, model.point_weight(x), result.values, threads);
        }
        return result;
    }

    const auto& mc = std::get<MonteCarloBackend>(model.backend);
    if (mc.samples < 1)
        throw std::invalid_argument("transfer_matrix: Monte Carlo backend needs samples >= 1");
    auto ranges = make_batches(mc.samples, options.batches);
    const int b = int(ranges.size());
    result.backend = {false, mc.samples, mc.seed, b};
    result.batch_means.assign(size_t(b), CMatrix());
    parallel_for(b, threads, [&](int batch) {
        const BatchRange& range = ranges[size_t(batch)];
        CMatrix acc = CMatrix::Zero(dim, dim);
        BlockMatrix buffer(n, k);
        PointBlocks pb;
        pb.bind(buffer, canonical);
        for (long long x = range.begin; x < range.end; ++x) {
            model.evaluator(x, buffer);
            pb.refresh();
            accumulate_point(pb, p, n, k, 1.0, acc, 1);
        }
        result.batch_means[size_t(batch)] = acc / double(range.size());
    });
    result.values = CMatrix::Zero(dim, dim);
    for (int batch = 0; batch < b; ++batch)
        result.values +=
            (double(ranges[size_t(batch)].size()) / double(mc.samples)) *
            result.batch_means[size_t(batch)];
    result.se = batch_standard_error(result.batch_means);
    return result;
}

CMatrix matrix_power(const CMatrix& m, long long r) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix_power: not square");
    if (r < 0) throw std::invalid_argument("matrix_power: negative power");
    CMatrix result = CMatrix::Identity(m.rows(), m.cols());
    if (r == 0) return result;
    CMatrix base = m;
    while (true) {
        if (r & 1) result = (result * base).eval();
        r >>= 1;
        if (r == 0) break;
        base = (base * base).eval();
    }
    return result;
}

Complex truncated_integral(const TransferMatrix& t, long long r, long long row, long long col) {
    if (r < 1) throw std::invalid_argument("truncated_integral: depth must be >= 1");
    if (row < 0 || row >= t.values.rows() || col < 0 || col >= t.values.cols())
        throw std::invalid_argument("truncated_integral: index out of range");
    if (r == 1) return t.values(row, col);
    return matrix_power(t.values, r)(row, col);
}

Complex truncated_integral(const TransferMatrix& t, long long r, const MultiIndex& row,
                           const MultiIndex& col) {
    if (row.base != t.coord_dim || col.base != t.coord_dim ||
        int(row.slots.size()) != t.p() || int(col.slots.size()) != t.p())
        throw std::invalid_argument("truncated_integral: multi-index shape mismatch");
    return truncated_integral(t, r, encode(row), encode(col));
}

CesaroResult cesaro(const CMatrix& t, int k, long long tracked_row, long long tracked_col) {
    if (t.rows() != t.cols()) throw std::invalid_argument("cesaro: not square");
    if (k < 1) throw std::invalid_argument("cesaro: k must be >= 1");
    if (tracked_row < 0 || tracked_row >= t.rows() || tracked_col < 0 ||
        tracked_col >= t.cols())
        throw std::invalid_argument("cesaro: tracked entry out of range");
    CesaroResult result;
    result.k = k;
    result.tracked_row = tracked_row;
    result.tracked_col = tracked_col;
    result.history.reserve(size_t(k));
    CMatrix power = t;
    CMatrix sum = CMatrix::Zero(t.rows(), t.cols());
    CMatrix compensation = sum;
    for (int r = 1; r <= k; ++r) {
        if (r > 1) power = (power * t).eval();
        // compensated accumulation: running powers drift, partial sums
        // must not add to it
        CMatrix y = power - compensation;
        CMatrix next = sum + y;
        compensation = (next - sum) - y;
        sum = next;
        result.history.push_back(sum(tracked_row, tracked_col) / double(r));
    }
    result.mean = sum / double(k);
    return result;
}

namespace {

std::vector<Word> word_classes(const ModelSpec& model, int p) {
    if (model.self_adjoint_coordinates) return {Word::plain(p)};
    std::vector<Word> words;
    words.reserve(size_t(1) << p);
    for (long long mask = 0; mask < (1LL << p); ++mask) {
        Word w = Word::plain(p);
        for (int t = 0; t < p; ++t)
            if ((mask >> t) & 1) w.letters[size_t(t)] = Letter::Star;
        words.push_back(std::move(w));
    }
    return words;
}

}  // namespace

StationarityReport stationarity_defect(const ModelSpec& model, int p_max,
                                       const TransferOptions& options, double exact_tol) {
    require_evaluator(model);
    if (p_max < 1) throw std::invalid_argument("stationarity_defect: p_max must be >= 1");
    StationarityReport report;
    report.p_max = p_max;
    report.exact_tolerance = exact_tol;
    report.pass = true;
    for (int p = 1; p <= p_max; ++p) {
        for (const Word& word : word_classes(model, p)) {
            TransferMatrix t = transfer_matrix(model, word, options);
            CMatrix defect_matrix = t.values * t.values - t.values;
            WordDefectReport wd;
            wd.word = word;
            wd.defect = defect_matrix.cwiseAbs().maxCoeff();
            if (t.backend.exact) {
                wd.threshold_max = exact_tol;
                wd.pass = wd.defect <= exact_tol;
            } else {
                // linearize T^2 - T at the full estimate and push the
                // batch means through it
                std::vector<CMatrix> propagated;
                propagated.reserve(t.batch_means.size());
                for (const auto& tb : t.batch_means)
                    propagated.push_back(t.values * tb + tb * t.values - tb);
                Eigen::MatrixXd se = batch_standard_error(propagated);
                Eigen::MatrixXd threshold = (4.0 * se.array() + 1e-12).matrix();
                wd.se_max = se.maxCoeff();
                wd.threshold_max = threshold.maxCoeff();
                wd.pass = (defect_matrix.cwiseAbs().array() <= threshold.array()).all();
            }
            report.pass = report.pass && wd.pass;
            report.words.push_back(std::move(wd));
        }
    }
    report.verdict = report.pass
                         ? "stationary within tolerance at tested depths p <= " +
                               std::to_string(p_max) + "; no claim beyond the tested depths"
                         : "not stationary at some tested depth p <= " + std::to_string(p_max);
    return report;
}

namespace {

/// Per-point character power traces tr(C^p)/K for p = 1..p_max, where C
/// is the sum of the diagonal blocks.
void character_powers(const BlockMatrix& eval, int p_max, std::vector<Complex>& out) {
    const int k = eval.k();
    CMatrix c = CMatrix::Zero(k, k);
    for (int i = 0; i < eval.n(); ++i) c += eval.block(i, i);
    CMatrix power = CMatrix::Identity(k, k);
    for (int p = 1; p <= p_max; ++p) {
        power = (power * c).eval();
        out[size_t(p - 1)] = power.trace() / double(k);
    }
}

}  // namespace

std::vector<CharacterMoment> character_moments(const ModelSpec& model, int p_max,
                                               MomentMode mode,
                                               const TransferOptions& options) {
    require_evaluator(model);
    if (p_max < 0) throw std::invalid_argument("character_moments: p_max must be >= 0");
    std::vector<CharacterMoment> moments(size_t(p_max) + 1);
    moments[0] = {0, 1.0, 0.0, 0.0};
    if (p_max == 0) return moments;

    if (mode == MomentMode::Materialized) {
        for (int p = 1; p <= p_max; ++p) {
            TransferMatrix t = transfer_matrix(model, Word::plain(p), options);
            Complex value = t.values.trace();
            CharacterMoment m;
            m.p = p;
            m.value = value.real();
            m.imag_residual = std::abs(value.imag());
            if (!t.backend.exact) {
                std::vector<double> batch_traces;
                batch_traces.reserve(t.batch_means.size());
                for (const auto& tb : t.batch_means)
                    batch_traces.push_back(tb.trace().real());
                if (batch_traces.size() > 1) {
                    double mean = 0.0;
                    for (double v : batch_traces) mean += v;
                    mean /= double(batch_traces.size());
                    double variance = 0.0;
                    for (double v : batch_traces) variance += (v - mean) * (v - mean);
                    variance /= double(batch_traces.size() - 1);
                    m.se = std::sqrt(variance / double(batch_traces.size()));
                }
            }
            moments[size_t(p)] = m;
        }
        return moments;
    }

    const int n = model.coord_dim;
    const int k = model.block_dim;
    const int threads = resolve_threads(options.threads);
    if (model.is_exact()) {
        std::vector<Complex> acc(size_t(p_max), Complex(0.0));
        std::vector<Complex> point(static_cast<size_t>(p_max));
        BlockMatrix buffer(n, k);
        for (long long x = 0; x < model.point_count(); ++x) {
            model.evaluator(x, buffer);
            character_powers(buffer, p_max, point);
            for (int p = 1; p <= p_max; ++p)
                acc[size_t(p - 1)] += model.point_weight(x) * point[size_t(p - 1)];
        }
        for (int p = 1; p <= p_max; ++p) {
            Complex value = acc[size_t(p - 1)];
            moments[size_t(p)] = {p, value.real(), 0.0, std::abs(value.imag())};
        }
        return moments;
    }

    const auto& mc = std::get<MonteCarloBackend>(model.backend);
    if (mc.samples < 1)
        throw std::invalid_argument("character_moments: Monte Carlo backend needs samples >= 1");
    auto ranges = make_batches(mc.samples, options.batches);
    const int b = int(ranges.size());
    std::vector<std::vector<Complex>> batch_means(
        size_t(b), std::vector<Complex>(size_t(p_max), Complex(0.0)));
    parallel_for(b, threads, [&](int batch) {
        const BatchRange& range = ranges[size_t(batch)];
        std::vector<Complex> acc(size_t(p_max), Complex(0.0));
        std::vector<Complex> point(static_cast<size_t>(p_max));
        BlockMatrix buffer(n, k);
        for (long long x = range.begin; x < range.end; ++x) {
            model.evaluator(x, buffer);
            character_powers(buffer, p_max, point);
            for (int t = 0; t < p_max; ++t) acc[size_t(t)] += point[size_t(t)];
        }
        for (int t = 0; t < p_max; ++t)
            batch_means[size_t(batch)][size_t(t)] = acc[size_t(t)] / double(range.size());
    });
    for (int p = 1; p <= p_max; ++p) {
        Complex value = 0.0;
        for (int batch = 0; batch < b; ++batch)
            value += (double(ranges[size_t(batch)].size()) / double(mc.samples)) *
                     batch_means[size_t(batch)][size_t(p - 1)];
        double se = 0.0;
        if (b > 1) {
            double mean = 0.0;
            for (int batch = 0; batch < b; ++batch)
                mean += batch_means[size_t(batch)][size_t(p - 1)].real();
            mean /= double(b);
            double variance = 0.0;
            for (int batch = 0; batch < b; ++batch) {
                double d = batch_means[size_t(batch)][size_t(p - 1)].real() - mean;
                variance += d * d;
            }
            variance /= double(b - 1);
            se = std::sqrt(variance / double(b));
        }
        moments[size_t(p)] = {p, value.real(), se, std::abs(value.imag())};
    }
    return moments;
}

namespace {

/// Index plumbing shared by the closed-form Weyl transfer path.
struct WeylFastTables {
    int n = 0;                   // |H|
    int pair_count = 0;          // N = n^2
    std::vector<int> add;        // add[f*n + g] = flat(f + g)
    std::vector<int> sub;        // sub[f*n + g] = flat(f - g)
    std::vector<Complex> cp;     // cp[f*n + g] = coupling(f, g)
    std::vector<Complex> row_phase, col_phase;       // per multi-index
    std::vector<int> row_diff, col_diff;             // multi-index x p pair indices
};

WeylFastTables build_weyl_tables(const FiniteAbelianGroup& group, int p, long long dim) {
    WeylFastTables tables;
    const int n = group.order();
    tables.n = n;
    tables.pair_count = n * n;
    tables.add.resize(size_t(n) * n);
    tables.sub.resize(size_t(n) * n);
    tables.cp.resize(size_t(n) * n);
    for (int f = 0; f < n; ++f) {
        GroupIndex lhs = unflatten_index(group, f);
        for (int g = 0; g < n; ++g) {
            GroupIndex rhs = unflatten_index(group, g);
            tables.add[size_t(f) * n + g] = flat_index(group, index_add(group, lhs, rhs));
            tables.sub[size_t(f) * n + g] = flat_index(group, index_sub(group, lhs, rhs));
            tables.cp[size_t(f) * n + g] = coupling(group, lhs, rhs);
        }
    }
    if (p == 0) return tables;
    tables.row_phase.resize(size_t(dim));
    tables.col_phase.resize(size_t(dim));
    tables.row_diff.resize(size_t(dim) * p);
    tables.col_diff.resize(size_t(dim) * p);
    std::vector<int> digits(static_cast<size_t>(p));
    for (long long m = 0; m < dim; ++m) {
        long long rest = m;
        for (int t = p - 1; t >= 0; --t) {
            digits[size_t(t)] = int(rest % tables.pair_count);
            rest /= tables.pair_count;
        }
        Complex row_phase = 1.0, col_phase = 1.0;
        for (int t = 0; t < p; ++t) {
            int tn = (t + 1) % p;
            int it = digits[size_t(t)] / n, at = digits[size_t(t)] % n;
            int itn = digits[size_t(tn)] / n, atn = digits[size_t(tn)] % n;
            row_phase *= tables.cp[size_t(it) * n + tables.sub[size_t(at) * n + atn]];
            col_phase *= tables.cp[size_t(itn) * n + tables.sub[size_t(atn) * n + at]];
            tables.row_diff[size_t(m) * p + t] =
                tables.sub[size_t(itn) * n + it] * n + tables.sub[size_t(atn) * n + at];
            tables.col_diff[size_t(m) * p + t] =
                tables.sub[size_t(it) * n + itn] * n + tables.sub[size_t(at) * n + atn];
        }
        tables.row_phase[size_t(m)] = row_phase;
        tables.col_phase[size_t(m)] = col_phase;
    }
    return tables;
}

/// Normalized two-point traces g2[d1*N + d2] = tr(W_{d1} U W_{d2} U*).
void build_g2(const WeylFastTables& tables, const WeylMatrixSet& set, const CMatrix& u,
              std::vector<Complex>& g2) {
    const int n = tables.n;
    const int count = tables.pair_count;
    std::vector<CMatrix> conjugated(static_cast<size_t>(count));
    for (int d = 0; d < count; ++d)
        conjugated[size_t(d)] = u * set.matrices[size_t(d)] * u.adjoint();
    for (int d1 = 0; d1 < count; ++d1) {
        int fi = d1 / n, fa = d1 % n;
        for (int d2 = 0; d2 < count; ++d2) {
            const CMatrix& c = conjugated[size_t(d2)];
            Complex trace = 0.0;
            for (int fb = 0; fb < n; ++fb)
                trace += tables.cp[size_t(fi) * n + fb] *
                         c(fb, tables.add[size_t(fa) * n + fb]);
            g2[size_t(d1) * count + d2] = trace / double(n);
        }
    }
}

void accumulate_fast_point(const WeylFastTables& tables, const std::vector<Complex>& g2,
                           int p, long long dim, double weight, CMatrix& target,
                           int threads) {
    const int count = tables.pair_count;
    const double inv_n = 1.0 / double(count);
    parallel_for(int(dim), threads, [&](int row) {
        const int* row_diff = &tables.row_diff[size_t(row) * p];
        const Complex row_scale = weight * inv_n * tables.row_phase[size_t(row)];
        for (long long col = 0; col < dim; ++col) {
            const int* col_diff = &tables.col_diff[size_t(col) * p];
            Complex prod = g2[size_t(row_diff[0]) * count + col_diff[0]];
            for (int t = 1; t < p; ++t)
                prod *= g2[size_t(row_diff[t]) * count + col_diff[t]];
            target(row, col) += row_scale * tables.col_phase[size_t(col)] * prod;
        }
    });
}

}  // namespace

TransferMatrix weyl_transfer_fastpath(const FiniteAbelianGroup& group,
                                      const WeylEnsemble& ensemble, int p,
                                      const TransferOptions& options) {
    if (p < 0) throw std::invalid_argument("weyl_transfer_fastpath: negative p");
    ResolvedWeylEnsemble resolved = resolve_weyl_ensemble(group, ensemble);
    const int n = group.order();
    const int coord = n * n;
    long long budget_factor = resolved.exact ? 1 : (long long)(options.batches) + 2;
    long long dim = pow_within(coord, p, options.memory_cap_entries);
    long long total =
        dim < 0 ? -1 : pow_within(dim, 2, options.memory_cap_entries / budget_factor);
    if (dim < 0 || total < 0)
        throw std::runtime_error(
            "weyl_transfer_fastpath: transfer matrix exceeds the memory cap");
    const int threads = resolve_threads(options.threads);

    TransferMatrix result;
    result.coord_dim = coord;
    result.word = Word::plain(p);
    if (p == 0) {
        result.values = CMatrix::Ones(1, 1);
        result.backend.exact = resolved.exact;
        return result;
    }

    WeylMatrixSet set = weyl_matrices(group);
    WeylFastTables tables = build_weyl_tables(group, p, dim);
    std::vector<Complex> g2(size_t(coord) * coord);

    if (resolved.exact) {
        result.backend.exact = true;
        result.values = CMatrix::Zero(dim, dim);
        const double weight = 1.0 / double(resolved.points.size());
        for (const CMatrix& u : resolved.points) {
            build_g2(tables, set, u, g2);
            accumulate_fast_point(tables, g2, p, dim, weight, result.values, threads);
        }
        return result;
    }

    auto ranges = make_batches(resolved.samples, options.batches);
    const int b = int(ranges.size());
    result.backend = {false, resolved.samples, resolved.seed, b};
    result.batch_means.assign(size_t(b), CMatrix());
    parallel_for(b, threads, [&](int batch) {
        const BatchRange& range = ranges[size_t(batch)];
        CMatrix acc = CMatrix::Zero(dim, dim);
        std::vector<Complex> local_g2(size_t(coord) * coord);
        for (long long x = range.begin; x < range.end; ++x) {
            CMatrix u = weyl_sample_unitary(n, resolved.seed, x);
            build_g2(tables, set, u, local_g2);
            accumulate_fast_point(tables, local_g2, p, dim, 1.0, acc, 1);
        }
        result.batch_means[size_t(batch)] = acc / double(range.size());
    });
    result.values = CMatrix::Zero(dim, dim);
    for (int batch = 0; batch < b; ++batch)
        result.values += (double(ranges[size_t(batch)].size()) / double(resolved.samples)) *
                         result.batch_means[size_t(batch)];
    result.se = batch_standard_error(result.batch_means);
    return result;
}

TransferMatrix halfclassical_transfer(const std::vector<CMatrix>& unitaries, int p,
                                      const TransferOptions& options) {
    if (p < 0) throw std::invalid_argument("halfclassical_transfer: negative p");
    // runs the same closure and unitarity checks as the model constructor
    ModelSpec model = half_classical_model(unitaries);
    const int n = model.coord_dim;
    long long dim = pow_within(n, p, options.memory_cap_entries);
    long long total = dim < 0 ? -1 : pow_within(dim, 2, options.memory_cap_entries);
    if (dim < 0 || total < 0)
        throw std::runtime_error("halfclassical_transfer: transfer matrix exceeds the memory cap");
    const int threads = resolve_threads(options.threads);

    TransferMatrix result;
    result.coord_dim = n;
    result.word = Word::plain(p);
    result.backend.exact = true;
    if (p == 0) {
        result.values = CMatrix::Ones(1, 1);
        return result;
    }
    result.values = CMatrix::Zero(dim, dim);
    if (p % 2 == 1) return result;

    const double weight = 1.0 / double(unitaries.size());
    for (const CMatrix& v : unitaries) {
        parallel_for(int(dim), threads, [&](int row) {
            std::vector<int> is(static_cast<size_t>(p)), js(static_cast<size_t>(p));
            long long rest = row;
            for (int t = p - 1; t >= 0; --t) {
                is[size_t(t)] = int(rest % n);
                rest /= n;
            }
            for (long long col = 0; col < dim; ++col) {
                long long crest = col;
                for (int t = p - 1; t >= 0; --t) {
                    js[size_t(t)] = int(crest % n);
                    crest /= n;
                }
                Complex prod = 1.0;
                for (int t = 0; t < p; ++t) {
                    Complex entry = v(is[size_t(t)], js[size_t(t)]);
                    prod *= (t % 2 == 0) ? entry : std::conj(entry);
                }
                result.values(row, col) += weight * prod.real();
            }
        });
    }
    return result;
}

}  // namespace qmm
