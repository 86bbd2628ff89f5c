#include "cascademl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascademl/error.hpp"
#include "cascademl/rng.hpp"

namespace cascademl {

void MultiLabelDataset::validate() const {
    if (x.rows() != y.rows())
        throw InvalidArgument("dataset: feature rows " + std::to_string(x.rows()) +
                              " != label rows " + std::to_string(y.rows()));
    if (x.rows() == 0) throw InvalidArgument("dataset: no instances");
    if (x.cols() == 0) throw InvalidArgument("dataset: no feature columns");
    if (!feature_names.empty() && feature_names.size() != x.cols())
        throw InvalidArgument("dataset: feature name count does not match feature columns");
    if (!label_names.empty() && label_names.size() != y.cols())
        throw InvalidArgument("dataset: label name count does not match label columns");
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j)
            if (y(i, j) != 0.0 && y(i, j) != 1.0)
                throw InvalidArgument("dataset: label entry (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ") is not 0/1");
}

MultiLabelDataset MultiLabelDataset::subset(std::span<const std::size_t> rows) const {
    return {select_rows(x, rows), select_rows(y, rows), feature_names, label_names};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> FoldPlan::split(
    std::size_t rep, std::size_t fold) const {
    if (rep >= assignments.size() || fold >= folds)
        throw InvalidArgument("fold plan: no fold " + std::to_string(fold) + " in repetition " +
                              std::to_string(rep));
    std::vector<std::size_t> train, test;
    const auto& assign = assignments[rep];
    for (std::size_t i = 0; i < assign.size(); ++i) (assign[i] == fold ? test : train).push_back(i);
    return {std::move(train), std::move(test)};
}

Matrix to_bipolar(const Matrix& y) {
    Matrix out(y.rows(), y.cols());
    auto src = y.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == 1.0 ? 1.0 : -1.0;
    return out;
}

Matrix to_bipolar(const MultiLabelDataset& ds) { return to_bipolar(ds.y); }

DatasetStats compute_stats(const MultiLabelDataset& ds) {
    DatasetStats s;
    s.instances = ds.instances();
    s.inputs = ds.inputs();
    s.labels = ds.labels();
    if (s.instances == 0) throw InvalidArgument("compute_stats: empty dataset");
    if (s.labels == 0) throw InvalidArgument("compute_stats: dataset has no label columns");

    std::vector<double> counts(s.labels, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < s.instances; ++i)
        for (std::size_t j = 0; j < s.labels; ++j) {
            counts[j] += ds.y(i, j);
            total += ds.y(i, j);
        }
    s.cardinality = total / static_cast<double>(s.instances);

    for (std::size_t j = 0; j < s.labels; ++j)
        if (counts[j] == 0.0) {
            const std::string name =
                j < ds.label_names.size() ? ds.label_names[j] : "#" + std::to_string(j);
            throw InvalidArgument("compute_stats: label " + name +
                                  " has no positive instances; imbalance ratio undefined");
        }
    const double most = *std::max_element(counts.begin(), counts.end());
    double ir_sum = 0.0;
    for (double c : counts) ir_sum += most / c;
    s.mean_ir = s.labels == 0 ? 0.0 : ir_sum / static_cast<double>(s.labels);
    return s;
}

FoldPlan make_folds(std::size_t n, std::size_t repetitions, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("make_folds: need at least 2 folds");
    if (folds > n)
        throw InvalidArgument("make_folds: " + std::to_string(folds) + " folds exceed " +
                              std::to_string(n) + " instances");
    if (repetitions == 0) throw InvalidArgument("make_folds: need at least 1 repetition");

    FoldPlan plan;
    plan.repetitions = repetitions;
    plan.folds = folds;
    plan.seed = seed;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        Rng rng(derive_seed(seed, rep));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);

        std::vector<std::size_t> assign(n);
        std::size_t pos = 0;
        for (std::size_t f = 0; f < folds; ++f) {
            const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
            for (std::size_t k = 0; k < size; ++k) assign[order[pos++]] = f;
        }
        plan.assignments.push_back(std::move(assign));
    }
    return plan;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(
    std::span<const std::size_t> indices, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidArgument("split_validation: fraction must lie in (0, 1), got " +
                              std::to_string(fraction));
    std::vector<std::size_t> order(indices.begin(), indices.end());
    Rng rng(seed);
    rng.shuffle(order);
    const auto n_val =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(order.size())));
    if (n_val >= order.size())
        throw InvalidArgument("split_validation: " + std::to_string(order.size()) +
                              " rows are too few to leave a training part");
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    return {std::move(train), std::move(val)};
}

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    const std::size_t n = x.rows();
    s.mean.assign(x.cols(), 0.0);
    s.scale.assign(x.cols(), 1.0);
    if (n == 0) return s;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s.mean[j] += x(i, j);
    for (double& m : s.mean) m /= static_cast<double>(n);
    std::vector<double> var(x.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double dv = x(i, j) - s.mean[j];
            var[j] += dv * dv;
        }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(n));
        s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (empty()) return x;
    if (x.cols() != mean.size())
        throw DimensionError("standardizer fitted on " + std::to_string(mean.size()) +
                             " columns applied to " + x.shape_string());
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean[j]) / scale[j];
    }
    return out;
}

}  // namespace cascademl
