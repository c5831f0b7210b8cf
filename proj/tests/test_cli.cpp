#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shill/classifiers.hpp"
#include "shill/features.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("shill_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    /// Runs the tool inside the scratch directory; stderr lands in err().
    int run(const std::string& args) {
        std::string cmd = "cd '" + dir_.string() + "' && '" SHILL_CLI "' " + args + " >stdout.txt 2>stderr.txt";
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::string err() const { return slurp(dir_ / "stderr.txt"); }
    fs::path at(const std::string& rel) const { return dir_ / rel; }
    json read_json(const std::string& rel) const { return json::parse(slurp(at(rel))); }

    fs::path dir_;
};

const std::string small_report =
    " --algorithm one-r naive-bayes rotation-forest --folds 5 --ratios 2,5 --repetitions 1 --max-k 40"
    " --trees 5 --rotation-members 3";

} // namespace

TEST_F(Cli, SynthThenFeaturesCoversEveryUser) {
    ASSERT_EQ(run("synth --out corpus --users 1000 --seed 7"), 0) << err();
    ASSERT_EQ(run("features --corpus corpus --out feat"), 0) << err();
    std::ifstream in(at("feat/features.csv"));
    auto m = shill::read_feature_csv(in);
    EXPECT_EQ(m.size(), 1000u);
    EXPECT_EQ(std::count(m.labels.begin(), m.labels.end(), 1), 50);

    // the features manifest digests what synth wrote
    auto synth = read_json("corpus/manifest.json");
    auto feat = read_json("feat/manifest.json");
    std::map<std::string, std::string> written;
    for (const auto& o : synth["outputs"]) written[o["path"]] = o["sha256"];
    ASSERT_FALSE(feat["inputs"].empty());
    for (const auto& i : feat["inputs"]) {
        auto name = fs::path(i["path"].get<std::string>()).filename().string();
        EXPECT_EQ(written.at(name), i["sha256"]) << name;
    }
    EXPECT_EQ(feat["command"], "features");
}

TEST_F(Cli, EvaluateReportsTableMetrics) {
    ASSERT_EQ(run("synth --out corpus --users 800 --seed 3"), 0) << err();
    ASSERT_EQ(run("features --corpus corpus --out feat"), 0) << err();
    ASSERT_EQ(run("evaluate --features feat/features.csv --out eval --algorithm rotation-forest --folds 5"), 0)
        << err();
    auto j = read_json("eval/evaluation.json");
    ASSERT_EQ(j["classifiers"].size(), 1u);
    const auto& r = j["classifiers"][0];
    EXPECT_EQ(r["algorithm"], "rotation-forest");
    for (const char* key : {"tp_rate", "fp_rate", "f_measure", "auc"}) {
        ASSERT_TRUE(r.contains(key)) << key;
        EXPECT_GE(r[key].get<double>(), 0.0);
        EXPECT_LE(r[key].get<double>(), 1.0);
    }
    EXPECT_TRUE(fs::exists(at("eval/metrics.csv")));
}

TEST_F(Cli, TrainWritesLoadableModel) {
    ASSERT_EQ(run("synth --out corpus --users 600 --seed 4"), 0) << err();
    ASSERT_EQ(run("features --corpus corpus --out feat"), 0) << err();
    ASSERT_EQ(run("train --features feat/features.csv --out model --algorithm decision-tree"), 0) << err();
    auto model = shill::ml::model_from_json(read_json("model/model.json"), shill::feature_manifest_hash());
    EXPECT_EQ(model.algorithm, shill::ml::Algorithm::decision_tree);
    EXPECT_THROW(shill::ml::model_from_json(read_json("model/model.json"), "other"), shill::Error);
}

TEST_F(Cli, FullPipelineIsByteIdentical) {
    ASSERT_EQ(run("synth --out corpus --users 1200 --seed 9"), 0) << err();
    ASSERT_EQ(run("report --corpus corpus --out a" + small_report), 0) << err();
    ASSERT_EQ(run("report --corpus corpus --out b" + small_report), 0) << err();
    auto ma = read_json("a/manifest.json"), mb = read_json("b/manifest.json");
    EXPECT_EQ(ma["outputs"], mb["outputs"]);
    ASSERT_GE(ma["outputs"].size(), 5u);
    for (const auto& o : ma["outputs"]) {
        std::string name = o["path"];
        EXPECT_EQ(slurp(at("a/" + name)), slurp(at("b/" + name))) << name;
    }
    auto report = read_json("a/report.json");
    EXPECT_TRUE(report.contains("ecosystem"));
    EXPECT_TRUE(report.contains("information_gain"));
}

TEST_F(Cli, EcosystemArtifacts) {
    ASSERT_EQ(run("synth --out corpus --users 1500 --seed 7"), 0) << err();
    ASSERT_EQ(run("ecosystem --corpus corpus --out eco --weight-mode count"), 0) << err();
    for (const char* f : {"ecosystem.json", "comparison.json", "cliques.txt", "cohort.graphml", "cohort.dot"})
        EXPECT_TRUE(fs::exists(at(std::string("eco/") + f))) << f;
    auto c = read_json("eco/comparison.json");
    EXPECT_FALSE(c.empty());
}

TEST_F(Cli, RefusesToOverwrite) {
    ASSERT_EQ(run("synth --out corpus --users 300 --seed 1"), 0) << err();
    EXPECT_EQ(run("synth --out corpus --users 300 --seed 1"), 1);
    auto e = json::parse(err());
    EXPECT_EQ(e["error"], "io.exists");
}

TEST_F(Cli, ErrorsAreJson) {
    EXPECT_EQ(run("evaluate --out x"), 2);
    EXPECT_EQ(json::parse(err())["error"], "cli.usage");

    EXPECT_EQ(run("features --corpus missing --out f"), 1);
    EXPECT_TRUE(json::parse(err()).contains("message"));

    EXPECT_EQ(run("synth --out s --users 40 --shill-fraction 0.05"), 1);
    EXPECT_EQ(json::parse(err())["error"], "synth.too_few_shills");
}

TEST_F(Cli, ConfigFileSections) {
    {
        std::ofstream ini(at("run.ini"));
        ini << "[synth]\nusers = 350\nseed = 12\n";
    }
    ASSERT_EQ(run("--config run.ini synth --out corpus"), 0) << err();
    auto m = read_json("corpus/manifest.json");
    EXPECT_EQ(m["config"]["market"]["users"], 350);
    EXPECT_EQ(m["seeds"]["seed"], 12);
}
