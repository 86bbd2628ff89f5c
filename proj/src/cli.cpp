#include "cascademl/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "cascademl/config.hpp"
#include "cascademl/dataset.hpp"
#include "cascademl/error.hpp"
#include "cascademl/metrics.hpp"
#include "cascademl/trainer.hpp"
#include "text_util.hpp"

namespace cascademl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (auto t = detail::trim(item); !t.empty()) out.emplace_back(t);
    return out;
}

struct DataArgs {
    std::string path;
    std::string format;
    std::string labels;
    std::size_t label_count = 0;
    bool labels_first = false;
    CLI::Option* count_opt = nullptr;

    void add_to(CLI::App& app, const std::string& positional) {
        app.add_option(positional, path, "Dataset file (CSV or ARFF)")->required();
        app.add_option("--format", format, "Dataset format")->check(CLI::IsMember({"csv", "arff"}));
        app.add_option("--labels", labels, "Comma-separated label attribute names");
        count_opt = app.add_option("--label-count", label_count, "Number of label columns");
        app.add_flag("--labels-first", labels_first, "Label columns come first");
    }

    std::string resolved_format() const {
        if (!format.empty()) return format;
        return detail::lower(fs::path(path).extension().string()) == ".arff" ? "arff" : "csv";
    }

    MultiLabelDataset load(std::optional<std::size_t> default_count = std::nullopt) const {
        const auto names = split_list(labels);
        const auto pos = labels_first ? LabelPosition::First : LabelPosition::Last;
        const bool arff = resolved_format() == "arff";
        if (!names.empty()) {
            if (arff) return load_arff(path, names);
            return load_csv(path, names.size(), pos);
        }
        std::size_t count = label_count;
        if (count_opt->count() == 0) {
            if (!default_count) throw UsageError("--label-count or --labels is required");
            count = *default_count;
        }
        return arff ? load_arff(path, count, pos) : load_csv(path, count, pos);
    }

    json to_json() const {
        json j{{"path", path}, {"format", resolved_format()}, {"labels_first", labels_first}};
        if (!labels.empty()) j["labels"] = split_list(labels);
        else j["label_count"] = label_count;
        return j;
    }
};

// Trainer flags mirror TrainConfig keys and are applied as text so that
// flags, config files and manifests share one parser.
struct ConfigArgs {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::vector<std::pair<CLI::Option*, std::string>> options;

    void add_to(CLI::App& app) {
        app.add_option("--config", config_path, "Config file (key = value lines or a JSON manifest)");
        const std::pair<const char*, const char*> flags[] = {
            {"--seed", "seed"},
            {"--jobs", "jobs"},
            {"--pool-per-combo", "pool_per_combo"},
            {"--activations", "activations"},
            {"--width-fraction-max", "width_fraction_max"},
            {"--max-growth", "max_growth_iterations"},
            {"--phase-epoch-cap", "phase_epoch_cap"},
            {"--stop-window", "stop_window"},
            {"--lambda", "lambda"},
            {"--validation-fraction", "validation_fraction"},
            {"--standardize", "standardize"},
            {"--init-range", "init_range"},
            {"--baseline-epoch-cap", "baseline_epoch_cap"},
            {"--hidden-fraction", "hidden_fraction"},
            {"--eta-plus", "irprop.eta_plus"},
            {"--eta-minus", "irprop.eta_minus"},
            {"--delta0", "irprop.delta0"},
            {"--delta-min", "irprop.delta_min"},
            {"--delta-max", "irprop.delta_max"},
        };
        for (const auto& [flag, key] : flags)
            options.emplace_back(app.add_option(flag, values[key], std::string("config key ") + key), key);
    }

    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!config_path.empty()) {
            const std::string text = detail::read_file(config_path);
            const auto first = text.find_first_not_of(" \t\r\n");
            if (first != std::string::npos && text[first] == '{') {
                json doc;
                try {
                    doc = json::parse(text);
                } catch (const json::exception& e) {
                    throw ConfigError(config_path + ": " + e.what());
                }
                cfg = config_from_json(doc.contains("config") ? doc["config"] : doc);
            } else {
                apply_config_text(cfg, text);
            }
        }
        for (const auto& [opt, key] : options)
            if (opt->count() > 0) set_config_value(cfg, key, values.at(key));
        cfg.validate();
        return cfg;
    }
};

std::string timestamp() {
    std::time_t t;
    if (const char* fixed_time = std::getenv("SOURCE_DATE_EPOCH")) t = std::strtoll(fixed_time, nullptr, 10);
    else t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    fn(f);
}

// ---- stats

int cmd_stats(const DataArgs& data, std::ostream& out) {
    const auto ds = data.load();
    const auto s = compute_stats(ds);
    out << "instances  inputs  labels  cardinality  mean_ir\n";
    char row[128];
    std::snprintf(row, sizeof row, "%9zu  %6zu  %6zu  %11.3f  %7.3f\n", s.instances, s.inputs, s.labels,
                  s.cardinality, s.mean_ir);
    out << row;
    out << json{{"instances", s.instances},
                {"inputs", s.inputs},
                {"labels", s.labels},
                {"cardinality", s.cardinality},
                {"mean_ir", s.mean_ir}}
               .dump()
        << '\n';
    return kExitOk;
}

// ---- train

int cmd_train(const DataArgs& data, const ConfigArgs& cargs, const std::string& algorithm,
              const std::string& out_dir, std::ostream& out) {
    const TrainConfig cfg = cargs.resolve();
    const auto ds = data.load();
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    const json manifest{{"command", "train"},
                        {"algorithm", algorithm},
                        {"dataset", data.to_json()},
                        {"config", to_json(cfg)},
                        {"seed", cfg.seed},
                        {"output_dir", out_dir},
                        {"timestamp", timestamp()}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    const auto res = algorithm == "bpmll" ? train_bpmll_baseline(ds, cfg.hidden_fraction, cfg)
                                          : train_cascademl(ds, cfg);
    save_model(res.model, dir / "model.json");
    write_with(dir / "epochs.csv", [&](std::ostream& f) { write_epoch_csv(res.log, f); });
    write_with(dir / "growth.csv", [&](std::ostream& f) { write_iteration_csv(res.log, f); });

    const auto& net = res.model.net;
    const auto rep = evaluate(res.model.predict(ds.x), ds.y);
    out << "trained " << algorithm << ": depth " << net.depth() << ", hidden units " << net.hidden_units()
        << ", parameters " << net.parameter_count() << '\n';
    out << "training macro_f " << fixed(rep.macro_f, 4) << ", hamming " << fixed(rep.hamming_loss, 4) << '\n';
    out << "wrote " << (dir / "model.json").string() << ", epochs.csv, growth.csv, manifest.json\n";
    return kExitOk;
}

// ---- predict

int cmd_predict(const std::string& model_path, const DataArgs& data, const std::string& out_path,
                std::ostream& out) {
    const Model model = load_model(model_path);
    const auto ds = data.load(model.net.q);
    if (ds.inputs() != model.net.d)
        throw DimensionError("model expects d=" + std::to_string(model.net.d) + " inputs but data has d=" +
                             std::to_string(ds.inputs()));
    const bool labelled = ds.labels() > 0;
    if (labelled && ds.labels() != model.net.q)
        throw DimensionError("model has q=" + std::to_string(model.net.q) + " labels but data has q=" +
                             std::to_string(ds.labels()));

    const auto trace = model.forward(ds.x);
    const Matrix pred = threshold_scores(trace.output);
    auto name = [&](std::size_t k) {
        return labelled && !ds.label_names.empty() ? ds.label_names[k] : "l" + std::to_string(k);
    };

    std::ostringstream csv;
    for (std::size_t k = 0; k < model.net.q; ++k) csv << (k ? "," : "") << "pred_" << name(k);
    for (std::size_t k = 0; k < model.net.q; ++k) csv << ",score_" << name(k);
    csv << '\n';
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        for (std::size_t k = 0; k < pred.cols(); ++k) csv << (k ? "," : "") << static_cast<int>(pred(i, k));
        for (std::size_t k = 0; k < pred.cols(); ++k) csv << ',' << fixed(trace.output(i, k));
        csv << '\n';
    }
    if (out_path.empty()) out << csv.str();
    else write_text(out_path, csv.str());

    if (labelled) out << to_json(evaluate(pred, ds.y)).dump() << '\n';
    return kExitOk;
}

// ---- cv

struct CvArgs {
    std::size_t reps = 2;
    std::size_t folds = 5;
    std::string algorithm = "cascademl";
    std::string hidden_fractions;
    std::string out_dir;
};

int cmd_cv(const DataArgs& data, const ConfigArgs& cargs, const CvArgs& args, std::ostream& out) {
    const TrainConfig cfg = cargs.resolve();
    const auto ds = data.load();
    const auto plan = make_folds(ds.instances(), args.reps, args.folds, cfg.seed);

    std::vector<double> fractions{cfg.hidden_fraction};
    if (args.algorithm == "bpmll" && !args.hidden_fractions.empty()) {
        fractions.clear();
        for (const auto& f : split_list(args.hidden_fractions)) {
            const auto v = detail::parse_double(f);
            if (!v || !(*v > 0)) throw ConfigError("--hidden-fractions: '" + f + "' is not a positive number");
            fractions.push_back(*v);
        }
    }

    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        const json manifest{{"command", "cv"},
                            {"algorithm", args.algorithm},
                            {"dataset", data.to_json()},
                            {"config", to_json(cfg)},
                            {"repetitions", args.reps},
                            {"folds", args.folds},
                            {"hidden_fractions", fractions},
                            {"seed", cfg.seed},
                            {"output_dir", args.out_dir},
                            {"timestamp", timestamp()}};
        write_text(fs::path(args.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    }

    json summaries = json::array();
    std::size_t best = 0;
    double best_f = -1.0;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const double fraction = fractions[fi];
        const TrainFn train = [&](const MultiLabelDataset& part, std::size_t rep, std::size_t fold) {
            TrainConfig c = cfg;
            c.jobs = 1;
            c.seed = derive_seed(cfg.seed, 100 + rep * args.folds + fold);
            TrainResult r = args.algorithm == "bpmll" ? train_bpmll_baseline(part, fraction, c)
                                                      : train_cascademl(part, c);
            FoldModel m;
            m.depth = r.model.net.depth();
            m.hidden_units = r.model.net.hidden_units();
            m.predict = [model = std::move(r.model)](const Matrix& x) { return model.predict(x); };
            return m;
        };
        const auto summary = cv_evaluate(ds, plan, train, cfg.jobs);

        if (args.algorithm == "bpmll") out << "hidden_fraction " << fixed(fraction, 2) << '\n';
        write_fold_csv(summary, out);
        out << "macro_f " << fixed(summary.macro_f.mean, 4) << " ± " << fixed(summary.macro_f.sd, 4)
            << "  hamming " << fixed(summary.hamming.mean, 4) << " ± " << fixed(summary.hamming.sd, 4)
            << "  depth " << fixed(summary.depth.mean, 2) << " ± " << fixed(summary.depth.sd, 2)
            << "  scaled_hidden " << fixed(summary.scaled_hidden.mean, 2) << " ± "
            << fixed(summary.scaled_hidden.sd, 2) << '\n';

        auto j = to_json(summary);
        j["algorithm"] = args.algorithm;
        if (args.algorithm == "bpmll") j["hidden_fraction"] = fraction;
        summaries.push_back(j);
        if (summary.macro_f.mean > best_f) {
            best_f = summary.macro_f.mean;
            best = fi;
        }
        if (!args.out_dir.empty()) {
            const std::string name = fractions.size() > 1 ? "folds_h" + fixed(fraction, 2) + ".csv" : "folds.csv";
            write_with(fs::path(args.out_dir) / name, [&](std::ostream& f) { write_fold_csv(summary, f); });
        }
    }
    if (fractions.size() > 1) out << "best hidden_fraction " << fixed(fractions[best], 2) << '\n';
    if (!args.out_dir.empty()) {
        json doc{{"summaries", summaries}};
        if (args.algorithm == "bpmll") doc["best_hidden_fraction"] = fractions[best];
        write_text(fs::path(args.out_dir) / "summary.json", doc.dump(2) + "\n");
    }
    return kExitOk;
}

// ---- inspect

int cmd_inspect(const std::string& model_path, std::ostream& out) {
    const Model model = load_model(model_path);
    const auto& net = model.net;
    out << "inputs " << net.d << ", labels " << net.q << ", depth " << net.depth() << ", hidden units "
        << net.hidden_units() << '\n';
    out << "level  units  activation  fan_in  in_weights  out_weights\n";
    char row[160];
    for (std::size_t li = 0; li < net.depth(); ++li)
        for (const auto& block : net.levels[li].blocks) {
            std::snprintf(row, sizeof row, "%5zu  %5zu  %-10s  %6zu  %10zu  %11zu\n", li + 1, block.units(),
                          std::string(to_string(block.activation)).c_str(), block.fan_in(),
                          block.units() * block.fan_in(), net.q * block.units());
            out << row;
        }
    out << "output (bias + inputs): " << (net.d + 1) * net.q << " weights, " << to_string(net.output_activation)
        << '\n';
    out << "total parameters: " << net.parameter_count() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constructive cascade networks for multi-label classification", "cascademl"};
    app.require_subcommand(1);

    auto* stats = app.add_subcommand("stats", "Print dataset statistics");
    DataArgs stats_data;
    stats_data.add_to(*stats, "dataset");

    auto* train = app.add_subcommand("train", "Train a model");
    DataArgs train_data;
    ConfigArgs train_cfg;
    std::string train_out = "run";
    std::string train_alg = "cascademl";
    train_data.add_to(*train, "dataset");
    train_cfg.add_to(*train);
    train->add_option("--out", train_out, "Output directory");
    train->add_option("--algorithm", train_alg)->check(CLI::IsMember({"cascademl", "bpmll"}));

    auto* predict = app.add_subcommand("predict", "Predict labels with a saved model");
    std::string predict_model, predict_out;
    DataArgs predict_data;
    predict->add_option("model", predict_model, "Model file")->required();
    predict_data.add_to(*predict, "dataset");
    predict->add_option("--out", predict_out, "Predictions CSV (default: stdout)");

    auto* cv = app.add_subcommand("cv", "Repeated k-fold cross validation");
    DataArgs cv_data;
    ConfigArgs cv_cfg;
    CvArgs cv_args;
    cv_data.add_to(*cv, "dataset");
    cv_cfg.add_to(*cv);
    cv->add_option("--reps", cv_args.reps)->check(CLI::PositiveNumber);
    cv->add_option("--folds", cv_args.folds)->check(CLI::Range(2, 1000000));
    cv->add_option("--algorithm", cv_args.algorithm)->check(CLI::IsMember({"cascademl", "bpmll"}));
    cv->add_option("--hidden-fractions", cv_args.hidden_fractions, "Comma-separated sweep for bpmll");
    cv->add_option("--out", cv_args.out_dir, "Output directory");

    auto* inspect = app.add_subcommand("inspect", "Describe a saved model");
    std::string inspect_model;
    inspect->add_option("model", inspect_model, "Model file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (stats->parsed()) return cmd_stats(stats_data, out);
        if (train->parsed()) return cmd_train(train_data, train_cfg, train_alg, train_out, out);
        if (predict->parsed()) return cmd_predict(predict_model, predict_data, predict_out, out);
        if (cv->parsed()) return cmd_cv(cv_data, cv_cfg, cv_args, out);
        if (inspect->parsed()) return cmd_inspect(inspect_model, out);
    } catch (const FileNotFound& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionError& e) {
        err << "dimension error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace cascademl
