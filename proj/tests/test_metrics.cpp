#include <algorithm>
#include <sstream>

#include "doctest.h"

#include "cascademl/error.hpp"
#include "cascademl/metrics.hpp"
#include "cascademl/rng.hpp"
#include "support.hpp"

using namespace cascademl;

namespace {

const Matrix kPred{{1, 0}, {0, 1}, {1, 1}};
const Matrix kTruth{{1, 0}, {1, 1}, {1, 0}};

// Precision and recall materialized per label, F as their harmonic mean.
double oracle_macro_f(const Matrix& p, const Matrix& t) {
    double sum = 0;
    for (std::size_t c = 0; c < p.cols(); ++c) {
        double tp = 0, pp = 0, ap = 0;
        for (std::size_t r = 0; r < p.rows(); ++r) {
            tp += p(r, c) * t(r, c);
            pp += p(r, c);
            ap += t(r, c);
        }
        if (pp + ap == 0) continue;
        const double precision = pp == 0 ? 0 : tp / pp;
        const double recall = ap == 0 ? 0 : tp / ap;
        sum += precision + recall == 0 ? 0 : 2 * precision * recall / (precision + recall);
    }
    return sum / static_cast<double>(p.cols());
}

Matrix random_binary(Rng& rng, std::size_t n, std::size_t q) {
    Matrix m(n, q);
    for (auto& v : m.data()) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
    return m;
}

}  // namespace

TEST_CASE("confusion hand case") {
    const auto conf = confusion(kPred, kTruth);
    CHECK(conf.labels[0] == LabelCounts{2, 0, 1, 0});
    CHECK(conf.labels[1] == LabelCounts{1, 1, 0, 1});
    CHECK(macro_f_score(conf) == doctest::Approx((0.8 + 2.0 / 3.0) / 2));
    CHECK(macro_f_score(conf) == doctest::Approx(0.7333).epsilon(1e-4));
    // One missed and one spurious label out of six cells.
    CHECK(hamming_loss(kPred, kTruth) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("perfect and inverted predictions") {
    Rng rng(1);
    const Matrix t = random_binary(rng, 10, 4);
    const auto same = confusion(t, t);
    for (const auto& k : same.labels) {
        CHECK(k.fp == 0);
        CHECK(k.fn == 0);
    }
    Matrix inv = t;
    for (auto& v : inv.data()) v = 1 - v;
    for (const auto& k : confusion(inv, t).labels) {
        CHECK(k.tp == 0);
        CHECK(k.tn == 0);
    }
    CHECK(hamming_loss(t, t) == 0.0);
    CHECK(hamming_loss(inv, t) == 1.0);
    const Matrix ones(3, 2, 1.0);
    CHECK(macro_f_score(confusion(ones, ones)) == 1.0);
}

TEST_CASE("degenerate label scores zero") {
    const Matrix t{{1, 0}, {1, 0}};
    const auto rep = evaluate(t, t);
    CHECK(rep.per_label_f == std::vector<double>{1.0, 0.0});
    CHECK(rep.macro_f == 0.5);
    CHECK(rep.degenerate_labels == 1);
}

TEST_CASE("metric errors") {
    CHECK_THROWS_AS(confusion(Matrix(2, 2), Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(confusion(Matrix{{0.5}}, Matrix{{1}}), InvalidArgument);
    CHECK_THROWS_AS(hamming_loss(Matrix{{1}}, Matrix{{2}}), InvalidArgument);
}

TEST_CASE("metrics match brute force and symmetries") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(50), q = 1 + rng.below(10);
        const Matrix p = random_binary(rng, n, q), t = random_binary(rng, n, q);
        const auto rep = evaluate(p, t);
        CHECK(rep.macro_f == doctest::Approx(oracle_macro_f(p, t)).epsilon(1e-12));
        CHECK((rep.macro_f >= 0 && rep.macro_f <= 1));
        CHECK((rep.hamming_loss >= 0 && rep.hamming_loss <= 1));
        CHECK(hamming_loss(p, t) == hamming_loss(t, p));
        const auto conf = confusion(p, t);
        for (const auto& k : conf.labels) CHECK(k.tp + k.fp + k.fn + k.tn == n);

        std::vector<std::size_t> perm(q);
        for (std::size_t k = 0; k < q; ++k) perm[k] = k;
        rng.shuffle(perm);
        Matrix pp(n, q), tp(n, q);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < q; ++c) {
                pp(r, c) = p(r, perm[c]);
                tp(r, c) = t(r, perm[c]);
            }
        CHECK(macro_f_score(confusion(pp, tp)) == doctest::Approx(rep.macro_f).epsilon(1e-12));
        CHECK(hamming_loss(pp, tp) == rep.hamming_loss);
    }
}

TEST_CASE("mean and population sd") {
    const auto m = mean_sd({0.5, 0.7});
    CHECK(m.mean == doctest::Approx(0.6));
    CHECK(m.sd == doctest::Approx(0.1));
}

TEST_CASE("cross validation harness") {
    const auto ds = testing::toy_dataset(50, 3, 3, 9);
    const auto plan = make_folds(ds.instances(), 2, 5, 4);
    std::size_t calls = 0;
    const TrainFn zeros = [&](const MultiLabelDataset& train, std::size_t, std::size_t) {
        ++calls;
        CHECK(train.instances() == 40);
        return FoldModel{[](const Matrix& x) { return Matrix(x.rows(), 3); }, 2, 6};
    };
    const auto summary = cv_evaluate(ds, plan, zeros);
    CHECK(calls == 10);
    REQUIRE(summary.folds.size() == 10);
    for (const auto& f : summary.folds) CHECK(f.report.macro_f == 0.0);
    CHECK(summary.depth.mean == 2.0);
    CHECK(summary.scaled_hidden.mean == doctest::Approx(2.0));
    CHECK(summary.folds[7].rep == 1);
    CHECK(summary.folds[7].fold == 2);

    const auto truth = [&](const MultiLabelDataset&, std::size_t, std::size_t) {
        return FoldModel{[&](const Matrix& x) {
                             // Look rows up by their feature values.
                             Matrix y(x.rows(), 3);
                             for (std::size_t r = 0; r < x.rows(); ++r)
                                 for (std::size_t i = 0; i < ds.instances(); ++i)
                                     if (std::equal(x.row(r).begin(), x.row(r).end(), ds.x.row(i).begin()))
                                         for (std::size_t k = 0; k < 3; ++k) y(r, k) = ds.y(i, k);
                             return y;
                         },
                         0, 0};
    };
    const auto perfect = cv_evaluate(ds, plan, truth, 3);
    CHECK(perfect.hamming.mean == 0.0);

    const auto short_plan = make_folds(10, 1, 2, 1);
    CHECK_THROWS_AS(cv_evaluate(ds, short_plan, zeros), InvalidArgument);

    std::ostringstream csv;
    write_fold_csv(summary, csv);
    CHECK(csv.str().rfind("rep,fold,macro_f,hamming_loss,depth,hidden_units,scaled_hidden\n0,0,0.000000,", 0) == 0);
    CHECK(to_json(summary)["folds"].size() == 10);
}
