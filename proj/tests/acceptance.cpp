// Acceptance checks. Run without arguments for every check, or with one
// check name. Exit codes: 0 pass, 1 fail, 77 skipped (data unavailable).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cascademl/cli.hpp"
#include "cascademl/irprop.hpp"
#include "cascademl/loss.hpp"
#include "cascademl/metrics.hpp"
#include "cascademl/trainer.hpp"
#include "support.hpp"

using namespace cascademl;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

Verdict verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// |a - b| / max(|a|, |b|), with pairs below 1e-7 in magnitude compared
// absolutely against the same tolerance.
double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-7});
    return std::abs(a - b) / scale;
}

double worst_fd(const std::function<double(const Matrix&)>& f, Matrix at, const Matrix& analytic,
                double h = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double orig = at.data()[i];
        at.data()[i] = orig + h;
        const double up = f(at);
        at.data()[i] = orig - h;
        const double down = f(at);
        at.data()[i] = orig;
        worst = std::max(worst, rel_err(analytic.data()[i], (up - down) / (2 * h)));
    }
    return worst;
}

Matrix random_bipolar(Rng& rng, std::size_t n, std::size_t q) {
    Matrix t(n, q);
    for (auto& v : t.data()) v = rng.uniform() < 0.5 ? 1.0 : -1.0;
    return t;
}

// ---- gradients

Verdict check_gradients() {
    Rng rng(20240501);
    double worst_rank = 0, worst_mse = 0, worst_net = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(6), q = 2 + rng.below(5), d = 1 + rng.below(8);
        const Matrix c = rand_matrix(rng, n, q, -1, 1);
        const Matrix t = random_bipolar(rng, n, q);
        worst_rank = std::max(worst_rank, worst_fd([&](const Matrix& m) { return bpmll_loss(m, t).total; }, c,
                                                   bpmll_gradient(c, t).d_outputs));

        const Matrix r = rand_matrix(rng, n, q, -1, 1);
        worst_mse = std::max(worst_mse, worst_fd([&](const Matrix& m) { return mse_loss(m, r); }, c, mse_gradient(c, r)));

        // Baseline architecture: one tanh level, no input-to-output weights.
        const std::size_t h = 1 + rng.below(4);
        CascadeNetwork net;
        net.d = d;
        net.q = q;
        net.levels.emplace_back(Activation::Tanh, rand_matrix(rng, h, d + 1, -1, 1));
        net.out_weights = rand_matrix(rng, q, 1 + d + h, -1, 1);
        for (std::size_t k = 0; k < q; ++k)
            for (std::size_t j = 1; j <= d; ++j) net.out_weights(k, j) = 0.0;
        const Matrix x = rand_matrix(rng, n, d, -1, 1);
        const double lambda = 1e-5;
        const auto obj = ranking_objective(net, x, t, lambda, true);
        worst_net = std::max(worst_net, worst_fd(
                                            [&](const Matrix& w) {
                                                auto m = net;
                                                m.levels[0].blocks[0].in_weights = w;
                                                return ranking_objective(m, x, t, lambda, true).value;
                                            },
                                            net.levels[0].blocks[0].in_weights, obj.gradient.level_grads[0][0]));
        const auto full = ranking_objective(net, x, t, lambda, false);
        worst_net = std::max(worst_net, worst_fd(
                                            [&](const Matrix& w) {
                                                auto m = net;
                                                m.out_weights = w;
                                                return ranking_objective(m, x, t, lambda, false).value;
                                            },
                                            net.out_weights, full.gradient.out_grad));
    }
    const double tol = 1e-5;
    return verdict(worst_rank < tol && worst_mse < tol && worst_net < tol,
                   fmt("50 instances, h=1e-6, worst relative error ranking %.2e, mse %.2e, network %.2e (tol 1e-5)",
                       worst_rank, worst_mse, worst_net));
}

// ---- optimizer

Verdict check_optimizer() {
    Rng rng(77);
    std::size_t converged = 0, worst_iters = 0;
    bool invariant = true;
    for (int start = 0; start < 20; ++start) {
        const Matrix w0 = rand_matrix(rng, 1, 10, -10, 10);
        std::vector<Matrix> w{w0};
        auto st = irprop_init_like(w);
        std::size_t it = 0;
        while (it < 200 && max_abs(w[0]) >= 0.01) {
            std::vector<Matrix> g{scale(w[0], 2.0)};
            irprop_step(w, g, st);
            ++it;
        }
        if (max_abs(w[0]) < 0.01) ++converged;
        worst_iters = std::max(worst_iters, it);

        for (double factor : {1e-6, 0.37, 5.0, 1e8}) {
            std::vector<Matrix> a{w0}, b{w0};
            auto sa = irprop_init_like(a), sb = irprop_init_like(b);
            for (int k = 0; k < 200; ++k) {
                std::vector<Matrix> ga{scale(a[0], 2.0)}, gb{scale(b[0], 2.0 * factor)};
                irprop_step(a, ga, sa);
                irprop_step(b, gb, sb);
                if (!(a[0] == b[0])) invariant = false;
            }
        }
    }
    return verdict(converged == 20 && invariant,
                   fmt("%zu/20 starts reached |w|inf < 0.01 (max %zu iterations); scaled-gradient trajectories %s",
                       converged, worst_iters, invariant ? "bit-identical" : "DIFFER"));
}

// ---- frozen weights and determinism

Verdict check_frozen_and_determinism() {
    const auto ds = testing::xor_dataset(200, 11);
    TrainConfig cfg;
    cfg.seed = 5;
    auto data = prepare_training_data(ds, cfg).first;

    Rng rng(derive_seed(cfg.seed, 2));
    auto net = phase1(new_perceptron(ds.inputs(), ds.labels(), rng), data, cfg).net;
    std::size_t snapshots = 0;
    bool frozen = true;
    for (std::size_t g = 1; g <= 5; ++g) {
        const std::string before = serialize(net).dump();
        const auto p2 = phase2(net, data, cfg, derive_seed(99, g));
        frozen = frozen && serialize(net).dump() == before;
        ++snapshots;
        net = phase1(install_level(net, to_level(p2.best), p2.best.out_block,
                                   p2.best.spec.kind == CandidateKind::Sibling),
                     data, cfg)
                  .net;
    }

    cfg.max_growth_iterations = 8;
    cfg.jobs = 1;
    const auto one = train_cascademl(ds, cfg);
    cfg.jobs = 8;
    const auto eight = train_cascademl(ds, cfg);
    std::ostringstream a, b;
    write_epoch_csv(one.log, a);
    write_epoch_csv(eight.log, b);
    const bool same = one.log == eight.log && a.str() == b.str() &&
                      serialize(one.model).dump() == serialize(eight.model).dump();
    return verdict(frozen && same,
                   fmt("main network snapshot %s across %zu Phase II runs; GrowthLog (%zu epochs, %zu iterations) "
                       "jobs=1 vs jobs=8 %s",
                       frozen ? "unchanged" : "CHANGED", snapshots, one.log.epochs.size(), one.log.iterations.size(),
                       same ? "bit-identical" : "DIFFERENT"));
}

// ---- metric oracle

Verdict check_metric_oracle() {
    Rng rng(4242);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(50), q = 1 + rng.below(10);
        const double density = rng.uniform();
        Matrix p(n, q), t(n, q);
        for (auto& v : p.data()) v = rng.uniform() < density ? 1.0 : 0.0;
        for (auto& v : t.data()) v = rng.uniform() < density ? 1.0 : 0.0;

        double f_sum = 0;
        std::size_t wrong = 0;
        for (std::size_t c = 0; c < q; ++c) {
            std::size_t tp = 0, fp = 0, fn = 0;
            for (std::size_t r = 0; r < n; ++r) {
                const bool pr = p(r, c) == 1.0, tr = t(r, c) == 1.0;
                tp += pr && tr;
                fp += pr && !tr;
                fn += !pr && tr;
                wrong += pr != tr;
            }
            const std::size_t denom = 2 * tp + fp + fn;
            f_sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        }
        const double oracle_f = f_sum / static_cast<double>(q);
        const double oracle_h = static_cast<double>(wrong) / static_cast<double>(n * q);
        if (macro_f_score(confusion(p, t)) != oracle_f || hamming_loss(p, t) != oracle_h) ++mismatches;
    }
    return verdict(mismatches == 0, fmt("1000 random pairs up to 50x10, %zu mismatches (exact equality)", mismatches));
}

// ---- real datasets

struct DatasetInfo {
    const char* name;
    std::size_t n, d, q;
    double cardinality, mean_ir;
};

constexpr DatasetInfo kFlags{"flags", 194, 26, 7, 3.392, 2.255};
constexpr DatasetInfo kYeast{"yeast", 2417, 103, 14, 4.237, 7.197};
constexpr DatasetInfo kEmotions{"emotions", 593, 72, 6, 1.869, 1.478};
constexpr DatasetInfo kScene{"scene", 2407, 294, 6, 1.074, 1.254};

fs::path data_dir() {
    if (const char* env = std::getenv("CASCADEML_DATA_DIR")) return env;
    return CASCADEML_DEFAULT_DATA_DIR;
}

std::optional<fs::path> find_dataset(const DatasetInfo& info) {
    for (const char* ext : {".arff", ".csv"}) {
        const auto p = data_dir() / (std::string(info.name) + ext);
        if (fs::exists(p)) return p;
    }
    return std::nullopt;
}

std::vector<std::string> data_args(const fs::path& path, const DatasetInfo& info) {
    return {path.string(), "--label-count", std::to_string(info.q)};
}

Verdict skip_missing(const std::vector<DatasetInfo>& infos) {
    std::string missing;
    for (const auto& i : infos)
        if (!find_dataset(i)) missing += std::string(missing.empty() ? "" : ", ") + i.name;
    return {Outcome::Skip, "dataset files not found in " + data_dir().string() + " (" + missing +
                               "); set CASCADEML_DATA_DIR to a directory holding <name>.arff"};
}

Verdict check_dataset_stats() {
    const std::vector<DatasetInfo> all{kFlags, kYeast, kEmotions, kScene};
    for (const auto& i : all)
        if (!find_dataset(i)) return skip_missing(all);
    bool ok = true;
    std::string detail;
    for (const auto& i : all) {
        std::ostringstream out, err;
        auto args = data_args(*find_dataset(i), i);
        args.insert(args.begin(), "stats");
        if (run_cli(args, out, err) != 0) return {Outcome::Fail, std::string(i.name) + ": " + err.str()};
        const std::string text = out.str();
        const auto doc = nlohmann::json::parse(text.substr(text.find('{')));
        const bool row = doc["instances"] == i.n && doc["inputs"] == i.d && doc["labels"] == i.q &&
                         std::abs(doc["cardinality"].get<double>() - i.cardinality) <= 0.005 &&
                         std::abs(doc["mean_ir"].get<double>() - i.mean_ir) <= 0.005;
        ok = ok && row;
        detail += fmt("%s%s %zu/%zu/%zu %.3f/%.3f", detail.empty() ? "" : "; ", i.name,
                      doc["instances"].get<std::size_t>(), doc["inputs"].get<std::size_t>(),
                      doc["labels"].get<std::size_t>(), doc["cardinality"].get<double>(), doc["mean_ir"].get<double>());
    }
    return verdict(ok, detail);
}

std::optional<nlohmann::json> run_cv(const DatasetInfo& info) {
    const auto path = find_dataset(info);
    if (!path) return std::nullopt;
    const auto out_dir = fs::temp_directory_path() / (std::string("cascademl_acceptance_") + info.name);
    std::ostringstream out, err;
    auto args = data_args(*path, info);
    args.insert(args.begin(), "cv");
    for (const char* a : {"--reps", "2", "--folds", "5", "--jobs", "4", "--out"}) args.emplace_back(a);
    args.push_back(out_dir.string());
    if (run_cli(args, out, err) != 0) throw std::runtime_error(std::string(info.name) + ": " + err.str());
    std::ifstream f(out_dir / "summary.json");
    auto doc = nlohmann::json::parse(f)["summaries"][0];
    fs::remove_all(out_dir);
    return doc;
}

Verdict check_cv_macro_f() {
    const std::vector<DatasetInfo> needed{kFlags, kEmotions};
    for (const auto& i : needed)
        if (!find_dataset(i)) return skip_missing(needed);
    const auto flags = *run_cv(kFlags);
    const auto emotions = *run_cv(kEmotions);
    const double f = flags["macro_f"]["mean"], e = emotions["macro_f"]["mean"];
    return verdict(f >= 0.58 && e >= 0.63,
                   fmt("flags %.4f +- %.4f (>= 0.58), emotions %.4f +- %.4f (>= 0.63)", f,
                       flags["macro_f"]["sd"].get<double>(), e, emotions["macro_f"]["sd"].get<double>()));
}

Verdict check_architecture() {
    if (!find_dataset(kFlags)) return skip_missing({kFlags});
    const auto flags = *run_cv(kFlags);
    bool each = true;
    for (const auto& fold : flags["folds"]) {
        const auto depth = fold["depth"].get<std::size_t>();
        each = each && depth >= 1 && depth <= 20;
    }
    const double depth = flags["depth"]["mean"], scaled = flags["scaled_hidden"]["mean"];
    return verdict(each && depth >= 3 && depth <= 14 && scaled >= 0.2 && scaled <= 0.9,
                   fmt("every fold depth in [1,20]: %s; mean depth %.2f (in [3,14]); mean scaled hidden %.2f (in "
                       "[0.2,0.9])",
                       each ? "yes" : "no", depth, scaled));
}

// ---- loss curve around growth steps

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

Verdict check_growth_curve() {
    const auto dir = fs::temp_directory_path() / "cascademl_acceptance_curve";
    fs::create_directories(dir);
    std::size_t accepted = 0, spikes = 0, monotone = 0, runs = 0;
    double worst_drop = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = testing::xor_dataset(240, seed);
        std::ofstream csv(dir / "toy.csv");
        csv << "a,b,c,e,ab,ce,sum\n";
        csv.precision(17);
        for (std::size_t i = 0; i < ds.instances(); ++i) {
            for (std::size_t j = 0; j < 4; ++j) csv << ds.x(i, j) << ',';
            csv << ds.y(i, 0) << ',' << ds.y(i, 1) << ',' << ds.y(i, 2) << '\n';
        }
        csv.close();
        std::ostringstream out, err;
        const auto run = dir / ("run" + std::to_string(seed));
        if (run_cli({"train", (dir / "toy.csv").string(), "--label-count", "3", "--seed", std::to_string(seed),
                     "--out", run.string()},
                    out, err) != 0)
            return {Outcome::Fail, "train failed: " + err.str()};
        ++runs;

        std::map<std::size_t, double> install_loss;
        for (const auto& r : read_csv_rows(run / "epochs.csv"))
            if (r[0] == "1" && r[2] == "0") install_loss[std::stoul(r[1])] = std::stod(r[4]);
        for (const auto& r : read_csv_rows(run / "growth.csv")) {
            if (r[6] != "1") continue;
            const std::size_t g = std::stoul(r[0]);
            const double before = std::stod(r[4]), after = std::stod(r[5]);
            ++accepted;
            spikes += install_loss.at(g) >= before;
            monotone += after <= before;
            worst_drop = std::max(worst_drop, before - install_loss.at(g));
        }
    }
    fs::remove_all(dir);
    return verdict(accepted > 0 && spikes == accepted && monotone == accepted,
                   fmt("%zu runs, %zu accepted growth steps: install loss >= pre-growth in %zu, post-Phase-I <= "
                       "pre-growth in %zu (largest drop at install %.6f)",
                       runs, accepted, spikes, monotone, worst_drop));
}

struct Check {
    const char* name;
    const char* title;
    Verdict (*fn)();
};

const Check kChecks[] = {
    {"gradients", "Gradient correctness", check_gradients},
    {"optimizer", "iRProp- convergence and scale invariance", check_optimizer},
    {"frozen_determinism", "Frozen weights and jobs determinism", check_frozen_and_determinism},
    {"metric_oracle", "Metric oracle", check_metric_oracle},
    {"dataset_stats", "Dataset statistics", check_dataset_stats},
    {"cv_macro_f", "Cross-validated macro F-score", check_cv_macro_f},
    {"architecture", "Grown architecture", check_architecture},
    {"growth_curve", "Validation loss at growth steps", check_growth_curve},
};

Outcome run(const Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = c.fn();
    } catch (const std::exception& e) {
        v = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("%s %s [%s] %.1fs: %s\n", tag, c.title, c.name, secs, v.detail.c_str());
    std::fflush(stdout);
    return v.outcome;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 2) {
        std::fprintf(stderr, "usage: %s [check]\n", argv[0]);
        return 2;
    }
    if (argc == 2) {
        for (const auto& c : kChecks)
            if (c.name == std::string(argv[1])) {
                const auto o = run(c);
                return o == Outcome::Pass ? 0 : o == Outcome::Skip ? 77 : 1;
            }
        std::fprintf(stderr, "unknown check '%s'\n", argv[1]);
        return 2;
    }
    bool failed = false;
    for (const auto& c : kChecks) failed |= run(c) == Outcome::Fail;
    return failed ? 1 : 0;
}
