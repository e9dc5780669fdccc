#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qmm/integration.hpp"

using namespace qmm;

namespace {

/// Brute-force reference integrator: loops over every multi-index pair and
/// multiplies the blocks directly, no shared prefixes, no recursion.
CMatrix naive_transfer(const ModelSpec& model, const Word& word) {
    const int n = model.coord_dim;
    const int k = model.block_dim;
    const int p = word.length();
    const long long dim = pow_ll(n, p);
    CMatrix out = CMatrix::Zero(dim, dim);
    for (long long x = 0; x < model.point_count(); ++x) {
        BlockMatrix u = model.evaluate(x);
        for (long long row = 0; row < dim; ++row) {
            MultiIndex is = decode(row, n, p);
            for (long long col = 0; col < dim; ++col) {
                MultiIndex js = decode(col, n, p);
                CMatrix prod = CMatrix::Identity(k, k);
                for (int t = 0; t < p; ++t) {
                    const CMatrix& block = u.block(is.slots[size_t(t)], js.slots[size_t(t)]);
                    if (word.letters[size_t(t)] == Letter::Star)
                        prod = prod * block.adjoint();
                    else
                        prod = prod * block;
                }
                out(row, col) += model.point_weight(x) * prod.trace() / double(k);
            }
        }
    }
    return out;
}

double max_diff(const CMatrix& a, const CMatrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

ModelSpec eight_element_half_classical() {
    CMatrix d(2, 2), x(2, 2);
    d << Complex(0, 1), 0, 0, Complex(0, -1);
    x << 0, 1, 1, 0;
    return half_classical_model(multiplicative_closure({d, x, d.conjugate()}));
}

std::vector<CMatrix> eight_element_closure() {
    CMatrix d(2, 2), x(2, 2);
    d << Complex(0, 1), 0, 0, Complex(0, -1);
    x << 0, 1, 1, 0;
    return multiplicative_closure({d, x, d.conjugate()});
}

}  // namespace

TEST_CASE("words parse and print as star strings") {
    CHECK(Word::plain(3).str() == "111");
    CHECK(Word::plain(0).length() == 0);
    Word w = Word::parse("1*1*");
    CHECK(w.length() == 4);
    CHECK(w.str() == "1*1*");
    CHECK_FALSE(w.all_plain());
    CHECK(Word::plain(2).all_plain());
    CHECK(Word::parse("").length() == 0);
    CHECK(Word::parse("11") == Word::plain(2));
    CHECK_THROWS_AS(Word::parse("1x1"), std::invalid_argument);
    CHECK_THROWS_AS(Word::plain(-1), std::invalid_argument);
}

TEST_CASE("canonical words collapse stars on self-adjoint coordinates") {
    ModelSpec classical = classical_permutation_model(3);
    CHECK(canonical_word(classical, Word::parse("1*")) == Word::plain(2));
    ModelSpec omega = root_of_unity_model(3);
    CHECK(canonical_word(omega, Word::parse("1*")) == Word::parse("1*"));
}

TEST_CASE("the empty word integrates to one") {
    TransferMatrix t = transfer_matrix(classical_permutation_model(3), Word::plain(0));
    CHECK(t.values.rows() == 1);
    CHECK(std::abs(t.values(0, 0) - Complex(1, 0)) <= 1e-15);
    CHECK(t.p() == 0);
}

TEST_CASE("the depth-one classical transfer is the flat doubly stochastic matrix") {
    TransferMatrix t = transfer_matrix(classical_permutation_model(3), Word::plain(1));
    REQUIRE(t.values.rows() == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(t.values(i, j) - Complex(1.0 / 3.0, 0)) <= 1e-15);
    CHECK(max_diff(t.values * t.values, t.values) <= 1e-15);
    CHECK(t.backend.exact);
    CHECK(t.backend.samples == 0);
}

TEST_CASE("depth-one rows of magic models sum to one") {
    std::vector<ModelSpec> models;
    models.push_back(classical_permutation_model(4));
    models.push_back(weyl_model(FiniteAbelianGroup::parse("Z2"), GeneratedWeylGroupEnsemble{}));
    models.push_back(latin_fiber_model(4));
    for (const auto& model : models) {
        TransferMatrix t = transfer_matrix(model, Word::plain(1));
        for (int i = 0; i < t.values.rows(); ++i) {
            Complex row_sum = t.values.row(i).sum();
            Complex col_sum = t.values.col(i).sum();
            INFO(model.name, " row ", i);
            CHECK(std::abs(row_sum - Complex(1, 0)) <= 1e-10);
            CHECK(std::abs(col_sum - Complex(1, 0)) <= 1e-10);
        }
    }
}

TEST_CASE("the transfer engine agrees with the brute-force integrator") {
    struct Case {
        ModelSpec model;
        const char* word;
    };
    std::vector<Case> cases;
    cases.push_back(
        {weyl_model(FiniteAbelianGroup::parse("Z2"), GeneratedWeylGroupEnsemble{}), "11"});
    cases.push_back({classical_permutation_model(3), "111"});
    cases.push_back({regular_representation_model(symmetric_group_table(3)), "1*"});
    {
        FiniteAbelianGroup z4 = FiniteAbelianGroup::parse("Z4");
        cases.push_back({dual_reflection_model(
                             z4, {unflatten_index(z4, 1), unflatten_index(z4, 2)}),
                         "*1"});
    }
    cases.push_back({eight_element_half_classical(), "11"});
    for (const auto& c : cases) {
        Word word = Word::parse(c.word);
        TransferMatrix t = transfer_matrix(c.model, word);
        CMatrix reference = naive_transfer(c.model, canonical_word(c.model, word));
        INFO(c.model.name, " word ", c.word);
        CHECK(max_diff(t.values, reference) <= 1e-13);
    }
}

TEST_CASE("the engine agrees with brute force on monte carlo sample sets") {
    ModelSpec model = weyl_model(FiniteAbelianGroup::parse("Z2"), HaarEnsemble{40, 17});
    TransferMatrix t = transfer_matrix(model, Word::plain(2));
    CMatrix reference = naive_transfer(model, Word::plain(2));
    CHECK(max_diff(t.values, reference) <= 1e-13);
}

TEST_CASE("matrix powers match repeated multiplication") {
    RandomStream stream(12);
    CMatrix m(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = 0.3 * stream.complex_gaussian();
    CMatrix naive = CMatrix::Identity(3, 3);
    for (long long r = 0; r <= 9; ++r) {
        CHECK(max_diff(matrix_power(m, r), naive) <= 1e-12);
        naive = naive * m;
    }
    CHECK_THROWS_AS(matrix_power(m, -1), std::invalid_argument);
    CHECK_THROWS_AS(matrix_power(CMatrix::Zero(2, 3), 2), std::invalid_argument);
}

TEST_CASE("truncated integrals follow the powers of the transfer matrix") {
    ModelSpec omega_model = root_of_unity_model(3);
    TransferMatrix t = transfer_matrix(omega_model, Word::plain(1));
    Complex omega = t.values(0, 0);
    CHECK(std::abs(truncated_integral(t, 1, 0, 0) - omega) <= 1e-15);
    CHECK(std::abs(truncated_integral(t, 2, 0, 0) - omega * omega) <= 1e-15);
    CHECK(std::abs(truncated_integral(t, 3, 0, 0) - Complex(1, 0)) <= 1e-14);

    MultiIndex root{{0}, 1};
    CHECK(std::abs(truncated_integral(t, 3, root, root) - Complex(1, 0)) <= 1e-14);
    CHECK_THROWS_AS(truncated_integral(t, 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(truncated_integral(t, 1, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(truncated_integral(t, 1, MultiIndex{{0, 0}, 1}, root),
                    std::invalid_argument);
    CHECK_THROWS_AS(truncated_integral(t, 1, MultiIndex{{0}, 2}, root), std::invalid_argument);
}

TEST_CASE("cesaro means fix idempotent matrices") {
    CMatrix t(2, 2);
    t << 1, 0, 0, 0;
    for (int k : {1, 7, 64}) {
        CesaroResult c = cesaro(t, k);
        CHECK(max_diff(c.mean, t) <= 1e-15);
        CHECK(c.k == k);
        CHECK(int(c.history.size()) == k);
        CHECK(std::abs(c.history.back() - c.mean(0, 0)) <= 1e-16);
    }
    CesaroResult unit = cesaro(CMatrix::Identity(1, 1), 10);
    CHECK(std::abs(unit.mean(0, 0) - Complex(1, 0)) <= 1e-15);
}

TEST_CASE("cesaro means of a nontrivial root of unity shrink at rate 1/k") {
    TransferMatrix t = transfer_matrix(root_of_unity_model(3), Word::plain(1));
    Complex omega = t.values(0, 0);
    double gap = std::abs(1.0 - omega);
    for (int k = 1; k <= 60; ++k) {
        CesaroResult c = cesaro(t.values, k);
        CHECK(std::abs(c.mean(0, 0)) <= 2.0 / (double(k) * gap) + 1e-14);
        if (k % 3 == 0) CHECK(std::abs(c.mean(0, 0)) <= 1e-14);
    }
    CesaroResult big = cesaro(t.values, 999);
    CHECK(std::abs(big.mean(0, 0)) <= 1e-13);
    CHECK(std::abs(big.history[2]) <= 1e-15);

    CHECK_THROWS_AS(cesaro(t.values, 0), std::invalid_argument);
    CHECK_THROWS_AS(cesaro(t.values, 5, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(cesaro(CMatrix::Zero(2, 3), 5), std::invalid_argument);
}

TEST_CASE("cesaro history records the running partial means") {
    ModelSpec classical = classical_permutation_model(2);
    TransferMatrix t = transfer_matrix(classical, Word::plain(1));
    CesaroResult c = cesaro(t.values, 5, 0, 1);
    CHECK(std::abs(c.history[0] - t.values(0, 1)) <= 1e-16);
    CHECK(c.tracked_row == 0);
    CHECK(c.tracked_col == 1);
    for (size_t r = 0; r < c.history.size(); ++r) {
        Complex partial = 0.0;
        CMatrix power = CMatrix::Identity(2, 2);
        for (size_t s = 0; s <= r; ++s) {
            power = power * t.values;
            partial += power(0, 1);
        }
        CHECK(std::abs(c.history[r] - partial / double(r + 1)) <= 1e-14);
    }
}

TEST_CASE("exact stationary models have vanishing defects at every tested depth") {
    StationarityReport report = stationarity_defect(classical_permutation_model(4), 4);
    CHECK(report.pass);
    CHECK(report.p_max == 4);
    CHECK(report.exact_tolerance == 1e-9);
    REQUIRE(report.words.size() == 4);
    for (const auto& w : report.words) {
        CHECK(w.pass);
        CHECK(w.defect <= 1e-12);
        CHECK(w.threshold_max == 1e-9);
    }
    CHECK(report.verdict.find("p <= 4") != std::string::npos);
    CHECK(report.verdict.find("no claim beyond") != std::string::npos);
}

TEST_CASE("a nontrivial root of unity fails stationarity with defect sqrt(3)") {
    StationarityReport report = stationarity_defect(root_of_unity_model(3), 1, {}, 1e-12);
    CHECK_FALSE(report.pass);
    // |omega^2 - omega| = |1 - omega| = sqrt(3) for the cube root
    REQUIRE(report.words.size() == 2);
    CHECK(std::abs(report.words[0].defect - std::sqrt(3.0)) <= 1e-12);
    CHECK(report.verdict.find("not stationary") != std::string::npos);
    CHECK(report.verdict.find("p <= 1") != std::string::npos);

    CHECK_THROWS_AS(stationarity_defect(root_of_unity_model(3), 0), std::invalid_argument);
}

TEST_CASE("models without self-adjoint coordinates test every star pattern") {
    FiniteAbelianGroup z4 = FiniteAbelianGroup::parse("Z4");
    ModelSpec dual = dual_reflection_model(z4, {unflatten_index(z4, 1)});
    StationarityReport report = stationarity_defect(dual, 2, {}, 1e-12);
    CHECK(report.words.size() == 6);  // 2 words at p = 1, 4 at p = 2
    CHECK(report.pass);
    for (const auto& w : report.words) CHECK(w.defect <= 1e-12);
}

TEST_CASE("monte carlo transfers are bit-identical across thread counts") {
    ModelSpec model = weyl_model(FiniteAbelianGroup::parse("Z2"), HaarEnsemble{2000, 4242});
    TransferOptions serial;
    serial.threads = 1;
    TransferOptions wide;
    wide.threads = 4;
    TransferMatrix a = transfer_matrix(model, Word::plain(2), serial);
    TransferMatrix b = transfer_matrix(model, Word::plain(2), wide);
    REQUIRE(a.values.size() == b.values.size());
    CHECK(std::memcmp(a.values.data(), b.values.data(),
                      sizeof(Complex) * size_t(a.values.size())) == 0);
    REQUIRE(a.batch_means.size() == b.batch_means.size());
    for (size_t t = 0; t < a.batch_means.size(); ++t)
        CHECK(std::memcmp(a.batch_means[t].data(), b.batch_means[t].data(),
                          sizeof(Complex) * size_t(a.batch_means[t].size())) == 0);
    CHECK(a.backend.exact == false);
    CHECK(a.backend.samples == 2000);
    CHECK(a.backend.seed == 4242);
    CHECK(a.backend.batches == 20);
    CHECK(a.se.rows() == 16);
    CHECK(a.se.maxCoeff() > 0.0);
}

TEST_CASE("monte carlo transfers are reproducible in the seed") {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse("Z2");
    TransferMatrix a = transfer_matrix(weyl_model(g, HaarEnsemble{300, 5}), Word::plain(2));
    TransferMatrix b = transfer_matrix(weyl_model(g, HaarEnsemble{300, 5}), Word::plain(2));
    TransferMatrix c = transfer_matrix(weyl_model(g, HaarEnsemble{300, 6}), Word::plain(2));
    CHECK(std::memcmp(a.values.data(), b.values.data(),
                      sizeof(Complex) * size_t(a.values.size())) == 0);
    CHECK(max_diff(a.values, c.values) > 1e-6);
}

TEST_CASE("short sample runs shrink the batch count instead of failing") {
    ModelSpec model = weyl_model(FiniteAbelianGroup::parse("Z2"), HaarEnsemble{7, 1});
    TransferMatrix t = transfer_matrix(model, Word::plain(1), {});
    CHECK(t.backend.batches == 7);
    CHECK(t.batch_means.size() == 7);
    // depth-one weyl entries are constant 1/K over the ensemble
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(t.values(i, j) - Complex(0.25, 0)) <= 1e-12);
    CHECK(t.se.maxCoeff() <= 1e-15);
}

TEST_CASE("the memory cap rejects transfers it cannot materialize") {
    CHECK_THROWS_WITH_AS(transfer_matrix(classical_permutation_model(4), Word::plain(8)),
                         doctest::Contains("streaming character moments"), std::runtime_error);
    TransferOptions tiny;
    tiny.memory_cap_entries = 100;
    CHECK_THROWS_AS(transfer_matrix(classical_permutation_model(3), Word::plain(3), tiny),
                    std::runtime_error);
    CHECK_NOTHROW(transfer_matrix(classical_permutation_model(3), Word::plain(2), tiny));
}

TEST_CASE("classical character moments count mean fixed points of permutations") {
    // independent oracle: enumerate S_4 with std::next_permutation
    std::vector<double> expected(6, 0.0);
    std::vector<int> perm{0, 1, 2, 3};
    int count = 0;
    do {
        int fixed = 0;
        for (int t = 0; t < 4; ++t) fixed += perm[size_t(t)] == t;
        double pw = 1.0;
        for (int p = 0; p <= 5; ++p) {
            expected[size_t(p)] += pw;
            pw *= fixed;
        }
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& e : expected) e /= count;

    ModelSpec model = classical_permutation_model(4);
    auto streaming = character_moments(model, 5, MomentMode::Streaming);
    auto materialized = character_moments(model, 5, MomentMode::Materialized);
    REQUIRE(streaming.size() == 6);
    REQUIRE(materialized.size() == 6);
    CHECK(streaming[0].value == 1.0);
    for (int p = 0; p <= 5; ++p) {
        INFO("p = ", p);
        CHECK(std::abs(streaming[size_t(p)].value - expected[size_t(p)]) <= 1e-12);
        CHECK(std::abs(materialized[size_t(p)].value - expected[size_t(p)]) <= 1e-12);
        CHECK(streaming[size_t(p)].imag_residual <= 1e-13);
    }
    // frozen values: 1, 1, 2, 5, 15 are the first bell numbers
    CHECK(std::abs(expected[1] - 1.0) <= 1e-15);
    CHECK(std::abs(expected[2] - 2.0) <= 1e-15);
    CHECK(std::abs(expected[3] - 5.0) <= 1e-15);
    CHECK(std::abs(expected[4] - 15.0) <= 1e-15);
}

TEST_CASE("streaming and materialized moments agree on every exact model") {
    std::vector<ModelSpec> models;
    models.push_back(weyl_model(FiniteAbelianGroup::parse("Z2"), GeneratedWeylGroupEnsemble{}));
    models.push_back(classical_permutation_model(4));
    models.push_back(eight_element_half_classical());
    models.push_back(regular_representation_model(symmetric_group_table(3)));
    models.push_back(latin_fiber_model(4));
    models.push_back(root_of_unity_model(4));
    {
        FiniteAbelianGroup z4 = FiniteAbelianGroup::parse("Z4");
        models.push_back(dual_reflection_model(z4, {unflatten_index(z4, 1)}));
    }
    for (const auto& model : models) {
        auto streaming = character_moments(model, 4, MomentMode::Streaming);
        auto materialized = character_moments(model, 4, MomentMode::Materialized);
        for (int p = 0; p <= 4; ++p) {
            INFO(model.name, " p = ", p);
            CHECK(std::abs(streaming[size_t(p)].value - materialized[size_t(p)].value) <=
                  1e-10);
        }
    }
}

TEST_CASE("streaming and materialized moments agree on shared monte carlo samples") {
    ModelSpec model = weyl_model(FiniteAbelianGroup::parse("Z2"), HaarEnsemble{500, 3});
    auto streaming = character_moments(model, 4, MomentMode::Streaming);
    auto materialized = character_moments(model, 4, MomentMode::Materialized);
    for (int p = 1; p <= 4; ++p) {
        INFO("p = ", p);
        CHECK(std::abs(streaming[size_t(p)].value - materialized[size_t(p)].value) <= 1e-10);
        CHECK(std::abs(streaming[size_t(p)].se - materialized[size_t(p)].se) <= 1e-10);
        CHECK(streaming[size_t(p)].se >= 0.0);
    }
    CHECK(streaming[2].se > 0.0);
    CHECK_THROWS_AS(character_moments(model, -1, MomentMode::Streaming),
                    std::invalid_argument);
}

TEST_CASE("the closed-form weyl transfer matches the generic engine exactly") {
    for (const char* literal : {"Z2", "Z3"}) {
        FiniteAbelianGroup g = FiniteAbelianGroup::parse(literal);
        int p_cap = g.order() == 2 ? 3 : 2;
        ModelSpec model = weyl_model(g, GeneratedWeylGroupEnsemble{});
        for (int p = 0; p <= p_cap; ++p) {
            TransferMatrix fast = weyl_transfer_fastpath(g, GeneratedWeylGroupEnsemble{}, p);
            TransferMatrix generic = transfer_matrix(model, Word::plain(p));
            INFO(literal, " p = ", p);
            CHECK(max_diff(fast.values, generic.values) <= 1e-12);
        }
    }
}

TEST_CASE("the closed-form weyl transfer shares monte carlo samples with the model") {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse("Z2");
    HaarEnsemble ensemble{300, 99};
    ModelSpec model = weyl_model(g, ensemble);
    for (int p = 1; p <= 2; ++p) {
        TransferMatrix fast = weyl_transfer_fastpath(g, ensemble, p);
        TransferMatrix generic = transfer_matrix(model, Word::plain(p));
        INFO("p = ", p);
        CHECK(max_diff(fast.values, generic.values) <= 1e-12);
        REQUIRE(fast.batch_means.size() == generic.batch_means.size());
        CHECK((fast.se - generic.se).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK_THROWS_AS(weyl_transfer_fastpath(g, ensemble, -1), std::invalid_argument);
}

TEST_CASE("the closed-form half-classical transfer vanishes at odd depths") {
    std::vector<CMatrix> closure = eight_element_closure();
    ModelSpec model = half_classical_model(closure);
    for (int p = 0; p <= 4; ++p) {
        TransferMatrix fast = halfclassical_transfer(closure, p);
        TransferMatrix generic = transfer_matrix(model, Word::plain(p));
        INFO("p = ", p);
        CHECK(max_diff(fast.values, generic.values) <= 1e-12);
        if (p % 2 == 1) CHECK(fast.values.cwiseAbs().maxCoeff() == 0.0);
    }
    // the singleton identity gives the constant transfer at even depth
    std::vector<CMatrix> trivial{CMatrix::Identity(1, 1)};
    TransferMatrix t2 = halfclassical_transfer(trivial, 2);
    CHECK(std::abs(t2.values(0, 0) - Complex(1, 0)) <= 1e-15);
    CHECK_THROWS_AS(halfclassical_transfer({}, 2), std::invalid_argument);
}

TEST_CASE("exact transfers do not depend on the thread count") {
    ModelSpec model = weyl_model(FiniteAbelianGroup::parse("Z2"), GeneratedWeylGroupEnsemble{});
    TransferOptions serial;
    serial.threads = 1;
    TransferOptions wide;
    wide.threads = 3;
    TransferMatrix a = transfer_matrix(model, Word::plain(2), serial);
    TransferMatrix b = transfer_matrix(model, Word::plain(2), wide);
    CHECK(std::memcmp(a.values.data(), b.values.data(),
                      sizeof(Complex) * size_t(a.values.size())) == 0);
}
