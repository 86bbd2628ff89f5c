#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cascademl/matrix.hpp"

namespace cascademl {

/// Features x (n x d) and 0/1 labels y (n x q).
struct MultiLabelDataset {
    Matrix x;
    Matrix y;
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;

    std::size_t instances() const noexcept { return x.rows(); }
    std::size_t inputs() const noexcept { return x.cols(); }
    std::size_t labels() const noexcept { return y.cols(); }

    /// Throws InvalidArgument when an invariant is broken: equal row counts,
    /// y strictly 0/1, d >= 1, n >= 1, name lists matching widths. q = 0 is
    /// allowed for unlabeled prediction inputs; training needs q >= 2,
    /// checked where networks are built.
    void validate() const;

    MultiLabelDataset subset(std::span<const std::size_t> rows) const;
};

struct DatasetStats {
    std::size_t instances = 0;
    std::size_t inputs = 0;
    std::size_t labels = 0;
    double cardinality = 0.0;
    double mean_ir = 0.0;
};

/// Row assignment to folds for repeated k-fold cross validation.
struct FoldPlan {
    std::size_t repetitions = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    /// assignments[rep][row] = fold id.
    std::vector<std::vector<std::size_t>> assignments;

    std::size_t instances() const noexcept {
        return assignments.empty() ? 0 : assignments.front().size();
    }
    /// (train rows, test rows) for one repetition/fold pair, both ascending.
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split(std::size_t rep,
                                                                        std::size_t fold) const;
};

enum class LabelPosition { Last, First };

/// Comma-separated file with one header row. `label_count` columns at the
/// end (or start) hold 0/1 labels; all other columns are numeric features.
/// `label_count` 0 reads an unlabeled file.
MultiLabelDataset load_csv(const std::filesystem::path& path, std::size_t label_count,
                           LabelPosition position = LabelPosition::Last);
MultiLabelDataset parse_csv(std::string_view text, std::size_t label_count,
                            LabelPosition position = LabelPosition::Last);

/// ARFF file (dense or sparse rows). Attributes named in `labels` become the
/// label columns and must be binary nominals; numeric attributes pass
/// through; other nominal attributes are one-hot encoded.
MultiLabelDataset load_arff(const std::filesystem::path& path, std::span<const std::string> labels);
MultiLabelDataset parse_arff(std::string_view text, std::span<const std::string> labels);
/// Same, taking the last (or first) `label_count` attributes as labels, the
/// MEKA/MULAN convention when no label list is available.
MultiLabelDataset load_arff(const std::filesystem::path& path, std::size_t label_count,
                            LabelPosition position = LabelPosition::Last);
MultiLabelDataset parse_arff(std::string_view text, std::size_t label_count,
                             LabelPosition position = LabelPosition::Last);

/// +1 where y == 1, -1 elsewhere.
Matrix to_bipolar(const MultiLabelDataset& ds);
Matrix to_bipolar(const Matrix& y);

DatasetStats compute_stats(const MultiLabelDataset& ds);

FoldPlan make_folds(std::size_t n, std::size_t repetitions, std::size_t folds, std::uint64_t seed);

/// Shuffles `indices` and carves off ceil(fraction * size) validation rows.
/// Returns (train, validation).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(
    std::span<const std::size_t> indices, double fraction, std::uint64_t seed);

/// Per-column z-scoring fitted on one matrix and applied to others.
/// Constant columns get scale 1 so they map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
    bool empty() const noexcept { return mean.empty(); }
};

}  // namespace cascademl
