#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cascademl/cli.hpp"
#include "cascademl/dataset.hpp"
#include "cascademl/rng.hpp"
#include "cascademl/trainer.hpp"
#include "support.hpp"

using namespace cascademl;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void write_csv(const fs::path& p, const MultiLabelDataset& ds, bool with_labels = true) {
    std::ofstream f(p);
    for (std::size_t j = 0; j < ds.inputs(); ++j) f << (j ? "," : "") << "f" << j;
    if (with_labels)
        for (std::size_t k = 0; k < ds.labels(); ++k) f << ",l" << k;
    f << '\n';
    f.precision(17);
    for (std::size_t i = 0; i < ds.instances(); ++i) {
        for (std::size_t j = 0; j < ds.inputs(); ++j) f << (j ? "," : "") << ds.x(i, j);
        if (with_labels)
            for (std::size_t k = 0; k < ds.labels(); ++k) f << ',' << ds.y(i, k);
        f << '\n';
    }
}

struct TempDir {
    fs::path path;
    TempDir() {
        Rng rng(static_cast<std::uint64_t>(std::hash<std::string>{}(doctest::getContextOptions()->binary_name.c_str())));
        path = fs::temp_directory_path() / ("cascademl_cli_" + std::to_string(rng.next()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("stats command") {
    TempDir tmp;
    const auto ds = testing::xor_dataset(40, 1);
    write_csv(tmp.path / "d.csv", ds);
    const auto r = cli({"stats", (tmp.path / "d.csv").string(), "--label-count", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"instances\":40") != std::string::npos);
    CHECK(r.out.find("\"labels\":3") != std::string::npos);

    {
        std::ofstream(tmp.path / "one.csv") << "a,x,y,z\n0.5,1,1,0\n";
    }
    const auto one = cli({"stats", (tmp.path / "one.csv").string(), "--label-count", "3"});
    CHECK(one.code == 1);  // label z never occurs
    {
        std::ofstream(tmp.path / "one.csv") << "a,x,y,z\n0.5,1,1,1\n";
    }
    CHECK(cli({"stats", (tmp.path / "one.csv").string(), "--label-count", "3"}).out.find("\"cardinality\":3.0") !=
          std::string::npos);

    const auto missing = cli({"stats", "/nonexistent/flags.csv", "--label-count", "7"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/nonexistent/flags.csv") != std::string::npos);
    CHECK(cli({"stats", (tmp.path / "d.csv").string()}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("train, inspect and predict") {
    TempDir tmp;
    const auto ds = testing::xor_dataset(80, 2);
    const auto data = (tmp.path / "d.csv").string();
    write_csv(data, ds);
    const auto out1 = (tmp.path / "a").string(), out2 = (tmp.path / "b").string();

    auto r = cli({"train", data, "--label-count", "3", "--out", out1, "--seed", "9", "--max-growth", "3"});
    REQUIRE(r.code == 0);
    for (const char* f : {"model.json", "epochs.csv", "growth.csv", "manifest.json"}) CHECK(fs::exists(fs::path(out1) / f));
    CHECK(slurp(fs::path(out1) / "epochs.csv").rfind("phase,growth_iter,epoch,train_loss,val_loss\n", 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(out1) / "manifest.json"));
    CHECK(manifest["config"]["max_growth_iterations"] == 3);
    CHECK(manifest["config"]["seed"] == 9);
    CHECK(manifest["dataset"]["label_count"] == 3);

    r = cli({"train", data, "--label-count", "3", "--out", out2, "--seed", "9", "--max-growth", "3", "--jobs", "4"});
    REQUIRE(r.code == 0);
    CHECK(slurp(fs::path(out1) / "model.json") == slurp(fs::path(out2) / "model.json"));
    CHECK(slurp(fs::path(out1) / "epochs.csv") == slurp(fs::path(out2) / "epochs.csv"));

    // Re-running from the manifest reproduces the model.
    const auto out3 = (tmp.path / "c").string();
    r = cli({"train", data, "--label-count", "3", "--out", out3, "--config", (fs::path(out1) / "manifest.json").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(fs::path(out1) / "model.json") == slurp(fs::path(out3) / "model.json"));

    const auto model = (fs::path(out1) / "model.json").string();
    const auto loaded = load_model(model);
    const auto ins = cli({"inspect", model});
    CHECK(ins.code == 0);
    CHECK(ins.out.find("total parameters: " + std::to_string(loaded.net.parameter_count())) != std::string::npos);

    const auto pred_path = (tmp.path / "pred.csv").string();
    const auto p = cli({"predict", model, data, "--out", pred_path});
    CHECK(p.code == 0);
    CHECK(p.out.find("\"macro_f\"") != std::string::npos);
    const auto pred = slurp(pred_path);
    CHECK(pred.rfind("pred_l0,pred_l1,pred_l2,score_l0,score_l1,score_l2\n", 0) == 0);
    CHECK(std::count(pred.begin(), pred.end(), '\n') == 81);

    write_csv(tmp.path / "x.csv", ds, false);
    const auto unl = cli({"predict", model, (tmp.path / "x.csv").string(), "--label-count", "0"});
    CHECK(unl.code == 0);
    CHECK(unl.out.find("macro_f") == std::string::npos);

    const auto wide = testing::toy_dataset(10, 5, 3, 1);
    write_csv(tmp.path / "w.csv", wide);
    const auto bad = cli({"predict", model, (tmp.path / "w.csv").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("d=4") != std::string::npos);
    CHECK(bad.err.find("d=5") != std::string::npos);
}

TEST_CASE("train with zero growth gives a perceptron") {
    TempDir tmp;
    const auto data = (tmp.path / "d.csv").string();
    write_csv(data, testing::toy_dataset(30, 3, 2, 4));
    const auto out = (tmp.path / "m").string();
    REQUIRE(cli({"train", data, "--label-count", "2", "--out", out, "--max-growth", "0"}).code == 0);
    const auto doc = nlohmann::json::parse(slurp(fs::path(out) / "model.json"));
    CHECK(doc["levels"].empty());
    const auto ins = cli({"inspect", (fs::path(out) / "model.json").string()});
    CHECK(ins.out.find("output (bias + inputs): 8 weights") != std::string::npos);
}

TEST_CASE("zero model predicts nothing") {
    TempDir tmp;
    Rng rng(1);
    const Model zero{new_perceptron(3, 2, rng, 0.0), {}};
    save_model(zero, tmp.path / "z.json");
    const auto data = (tmp.path / "d.csv").string();
    write_csv(data, testing::toy_dataset(5, 3, 2, 2));
    const auto r = cli({"predict", (tmp.path / "z.json").string(), data});
    CHECK(r.code == 0);
    CHECK(r.out.find("\n0,0,0.000000,0.000000\n") != std::string::npos);
}

TEST_CASE("config errors stop before training") {
    TempDir tmp;
    const auto data = (tmp.path / "d.csv").string();
    write_csv(data, testing::toy_dataset(20, 3, 2, 4));
    const auto out = tmp.path / "never";
    CHECK(cli({"train", data, "--label-count", "2", "--out", out.string(), "--lambda", "-1"}).code == 2);
    CHECK(cli({"train", data, "--label-count", "2", "--out", out.string(), "--activations", "relu"}).code == 2);
    CHECK_FALSE(fs::exists(out));
    {
        std::ofstream(tmp.path / "c.toml") << "# run\n[trainer]\nmax_growth = 0\nbogus = 1\n";
    }
    CHECK(cli({"train", data, "--label-count", "2", "--out", out.string(), "--config", (tmp.path / "c.toml").string()})
              .code == 2);
    CHECK(cli({"train", data, "--label-count", "2", "--config", "/nonexistent.toml"}).code == 2);
}

TEST_CASE("config file then flags") {
    TempDir tmp;
    const auto data = (tmp.path / "d.csv").string();
    write_csv(data, testing::toy_dataset(20, 3, 2, 4));
    {
        std::ofstream(tmp.path / "c.toml") << "max_growth = 0\nlambda = 0.5\n";
    }
    const auto out = tmp.path / "m";
    REQUIRE(cli({"train", data, "--label-count", "2", "--out", out.string(), "--config",
                 (tmp.path / "c.toml").string(), "--lambda", "0.25"})
                .code == 0);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["config"]["max_growth_iterations"] == 0);
    CHECK(manifest["config"]["lambda"] == 0.25);
}

TEST_CASE("cv command") {
    TempDir tmp;
    const auto data = (tmp.path / "d.csv").string();
    write_csv(data, testing::xor_dataset(60, 5));
    const auto out = tmp.path / "cv";
    const auto r = cli({"cv", data, "--label-count", "3", "--max-growth", "2", "--out", out.string(), "--jobs", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find(" ± ") != std::string::npos);
    const auto folds = slurp(out / "folds.csv");
    CHECK(std::count(folds.begin(), folds.end(), '\n') == 11);
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    for (const auto& f : summary["summaries"][0]["folds"]) CHECK(f["depth"].get<int>() <= 2);

    const auto sweep = cli({"cv", data, "--label-count", "3", "--algorithm", "bpmll", "--hidden-fractions",
                            "0.2,0.4,0.6,0.8,1.0", "--baseline-epoch-cap", "20", "--reps", "1", "--folds", "2"});
    REQUIRE(sweep.code == 0);
    std::size_t summaries = 0;
    for (auto pos = sweep.out.find("macro_f "); pos != std::string::npos; pos = sweep.out.find("macro_f ", pos + 1))
        ++summaries;
    CHECK(summaries == 5);
    CHECK(sweep.out.find("best hidden_fraction") != std::string::npos);
}
