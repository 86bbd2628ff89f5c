#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "cascademl/dataset.hpp"
#include "cascademl/matrix.hpp"

namespace cascademl {

struct LabelCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

struct LabelConfusion {
    std::size_t n = 0;
    std::vector<LabelCounts> labels;
};

/// Per-label counts. Both matrices must be n x q with entries exactly 0 or 1.
LabelConfusion confusion(const Matrix& pred, const Matrix& truth);

/// F = 2tp / (2tp + fp + fn) per label, 0 when the denominator is 0.
std::vector<double> per_label_f(const LabelConfusion& conf);
double macro_f_score(const LabelConfusion& conf);
double hamming_loss(const Matrix& pred, const Matrix& truth);

struct EvalReport {
    double macro_f = 0.0;
    double hamming_loss = 0.0;
    std::vector<double> per_label_f;
    std::size_t n = 0;
    std::size_t q = 0;
    /// Labels with 2tp + fp + fn = 0, scored as 0.
    std::size_t degenerate_labels = 0;
};

EvalReport evaluate(const Matrix& pred, const Matrix& truth);

nlohmann::json to_json(const EvalReport& report);

/// What a trainer hands back for one fold.
struct FoldModel {
    std::function<Matrix(const Matrix& raw_x)> predict;  // 0/1 labels
    std::size_t depth = 0;
    std::size_t hidden_units = 0;
};

using TrainFn = std::function<FoldModel(const MultiLabelDataset& train, std::size_t rep, std::size_t fold)>;

struct FoldReport {
    std::size_t rep = 0;
    std::size_t fold = 0;
    EvalReport report;
    std::size_t depth = 0;
    std::size_t hidden_units = 0;
    /// hidden_units / d.
    double scaled_hidden = 0.0;
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // population
};

MeanSd mean_sd(const std::vector<double>& values);

struct CvSummary {
    std::vector<FoldReport> folds;  // rep-major
    MeanSd macro_f;
    MeanSd hamming;
    MeanSd depth;
    MeanSd scaled_hidden;
};

/// Trains on out-of-fold rows and evaluates on fold rows for every
/// repetition x fold; folds run on up to `jobs` threads.
CvSummary cv_evaluate(const MultiLabelDataset& ds, const FoldPlan& plan, const TrainFn& train_fn,
                      std::size_t jobs = 1);

/// `rep,fold,macro_f,hamming_loss,depth,hidden_units,scaled_hidden`.
void write_fold_csv(const CvSummary& summary, std::ostream& out);
nlohmann::json to_json(const CvSummary& summary);

}  // namespace cascademl
