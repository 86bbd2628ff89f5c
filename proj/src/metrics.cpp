#include "cascademl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cascademl/error.hpp"
#include "cascademl/parallel.hpp"

namespace cascademl {

namespace {

void check_pair(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw DimensionError("metrics: prediction " + pred.shape_string() + " vs truth " +
                             truth.shape_string());
    auto binary = [](const Matrix& m, const char* what) {
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c)
                if (m(r, c) != 0.0 && m(r, c) != 1.0)
                    throw InvalidArgument(std::string("metrics: ") + what + " entry (" +
                                          std::to_string(r) + ", " + std::to_string(c) +
                                          ") is not 0 or 1");
    };
    binary(pred, "prediction");
    binary(truth, "truth");
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

LabelConfusion confusion(const Matrix& pred, const Matrix& truth) {
    check_pair(pred, truth);
    LabelConfusion conf;
    conf.n = pred.rows();
    conf.labels.resize(pred.cols());
    for (std::size_t r = 0; r < pred.rows(); ++r)
        for (std::size_t c = 0; c < pred.cols(); ++c) {
            auto& k = conf.labels[c];
            const bool p = pred(r, c) == 1.0;
            const bool t = truth(r, c) == 1.0;
            if (p && t) ++k.tp;
            else if (p) ++k.fp;
            else if (t) ++k.fn;
            else ++k.tn;
        }
    return conf;
}

std::vector<double> per_label_f(const LabelConfusion& conf) {
    std::vector<double> f;
    f.reserve(conf.labels.size());
    for (const auto& k : conf.labels) {
        const auto denom = 2 * k.tp + k.fp + k.fn;
        f.push_back(denom == 0 ? 0.0 : 2.0 * static_cast<double>(k.tp) / static_cast<double>(denom));
    }
    return f;
}

double macro_f_score(const LabelConfusion& conf) {
    if (conf.labels.empty()) return 0.0;
    double sum = 0.0;
    for (double f : per_label_f(conf)) sum += f;
    return sum / static_cast<double>(conf.labels.size());
}

double hamming_loss(const Matrix& pred, const Matrix& truth) {
    check_pair(pred, truth);
    if (pred.size() == 0) return 0.0;
    std::size_t wrong = 0;
    auto p = pred.data();
    auto t = truth.data();
    for (std::size_t i = 0; i < p.size(); ++i) wrong += p[i] != t[i];
    return static_cast<double>(wrong) / static_cast<double>(p.size());
}

EvalReport evaluate(const Matrix& pred, const Matrix& truth) {
    const auto conf = confusion(pred, truth);
    EvalReport rep;
    rep.n = pred.rows();
    rep.q = pred.cols();
    rep.per_label_f = per_label_f(conf);
    rep.macro_f = macro_f_score(conf);
    rep.hamming_loss = hamming_loss(pred, truth);
    for (const auto& k : conf.labels) rep.degenerate_labels += (2 * k.tp + k.fp + k.fn) == 0;
    return rep;
}

nlohmann::json to_json(const EvalReport& report) {
    return {{"macro_f", report.macro_f},
            {"hamming_loss", report.hamming_loss},
            {"per_label_f", report.per_label_f},
            {"n", report.n},
            {"q", report.q},
            {"degenerate_labels", report.degenerate_labels}};
}

MeanSd mean_sd(const std::vector<double>& values) {
    MeanSd out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    for (double v : values) out.mean += v;
    out.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / n);
    return out;
}

CvSummary cv_evaluate(const MultiLabelDataset& ds, const FoldPlan& plan, const TrainFn& train_fn,
                      std::size_t jobs) {
    if (plan.instances() != ds.instances())
        throw InvalidArgument("cv_evaluate: fold plan covers " + std::to_string(plan.instances()) +
                              " rows but the dataset has " + std::to_string(ds.instances()));
    if (!train_fn) throw InvalidArgument("cv_evaluate: no trainer given");

    CvSummary summary;
    const std::size_t runs = plan.repetitions * plan.folds;
    summary.folds.resize(runs);
    parallel_for(runs, jobs, [&](std::size_t i) {
        const std::size_t rep = i / plan.folds;
        const std::size_t fold = i % plan.folds;
        const auto [train_rows, test_rows] = plan.split(rep, fold);
        const auto model = train_fn(ds.subset(train_rows), rep, fold);
        const auto test = ds.subset(test_rows);
        auto& out = summary.folds[i];
        out.rep = rep;
        out.fold = fold;
        out.report = evaluate(model.predict(test.x), test.y);
        out.depth = model.depth;
        out.hidden_units = model.hidden_units;
        out.scaled_hidden = static_cast<double>(model.hidden_units) / static_cast<double>(ds.inputs());
    });

    std::vector<double> f, h, depth, scaled;
    for (const auto& r : summary.folds) {
        f.push_back(r.report.macro_f);
        h.push_back(r.report.hamming_loss);
        depth.push_back(static_cast<double>(r.depth));
        scaled.push_back(r.scaled_hidden);
    }
    summary.macro_f = mean_sd(f);
    summary.hamming = mean_sd(h);
    summary.depth = mean_sd(depth);
    summary.scaled_hidden = mean_sd(scaled);
    return summary;
}

void write_fold_csv(const CvSummary& summary, std::ostream& out) {
    out << "rep,fold,macro_f,hamming_loss,depth,hidden_units,scaled_hidden\n";
    for (const auto& r : summary.folds)
        out << r.rep << ',' << r.fold << ',' << fixed6(r.report.macro_f) << ','
            << fixed6(r.report.hamming_loss) << ',' << r.depth << ',' << r.hidden_units << ','
            << fixed6(r.scaled_hidden) << '\n';
}

nlohmann::json to_json(const CvSummary& summary) {
    auto ms = [](const MeanSd& m) { return nlohmann::json{{"mean", m.mean}, {"sd", m.sd}}; };
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& r : summary.folds) {
        auto j = to_json(r.report);
        j["rep"] = r.rep;
        j["fold"] = r.fold;
        j["depth"] = r.depth;
        j["hidden_units"] = r.hidden_units;
        j["scaled_hidden"] = r.scaled_hidden;
        folds.push_back(std::move(j));
    }
    return {{"folds", std::move(folds)},
            {"macro_f", ms(summary.macro_f)},
            {"hamming_loss", ms(summary.hamming)},
            {"depth", ms(summary.depth)},
            {"scaled_hidden", ms(summary.scaled_hidden)}};
}

}  // namespace cascademl
