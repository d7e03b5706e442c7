#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "navnet/app/cli.hpp"
#include "support.hpp"

using navnet::testing::TempDir;

namespace {

struct Result {
    int status;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "navnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = navnet::app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs synth through deploy in `dir` and returns the status of each step.
void pipeline(const TempDir& dir) {
    const auto f = [&](const char* name) { return dir.file(name); };
    navnet::write_file(f("small.json"),
                       R"({"version":1,"n_misinformation":120,"n_propaganda":12,"n_authoritative":160,)"
                       R"("n_unlabeled_misinfo":15,"n_unlabeled_propaganda":3,"n_benign_unlabeled":500})");
    ASSERT_EQ(run({"synth", "--config", f("small.json"), "--out-dir", f("syn")}).status, 0);
    ASSERT_EQ(run({"ingest", "--logs", f("syn/logs.csv"), "--out", f("records.csv")}).status, 0);
    ASSERT_EQ(run({"build-graph", "--records", f("records.csv"), "--out", f("graphs.csv")}).status, 0);
    ASSERT_EQ(run({"features", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--out-dir", f("feat")}).status, 0);
    auto train = run({"train", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--out", f("model.json")});
    ASSERT_EQ(train.status, 0) << train.err;
    auto eval = run({"evaluate", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--out", f("metrics.csv")});
    ASSERT_EQ(eval.status, 0) << eval.err;
    auto deploy = run({"deploy", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--model", f("model.json"),
                       "--runs-dir", f("runs"), "--run-id", "r1"});
    ASSERT_EQ(deploy.status, 0) << deploy.err;
}

}  // namespace

TEST(Cli, EndToEndPipelineProducesArtifacts) {
    TempDir dir;
    pipeline(dir);
    for (const char* p : {"syn/logs.csv", "syn/labels.csv", "syn/truth.csv", "syn/config.json", "records.csv",
                          "graphs.csv", "feat/features_2022-10.csv", "model.json", "metrics.csv", "runs/r1/run.json",
                          "runs/r1/positives.csv", "runs/r1/summary.json"})
        EXPECT_TRUE(std::filesystem::exists(dir.file(p))) << p;
    const auto metrics = navnet::read_lines(dir.file("metrics.csv"));
    ASSERT_EQ(metrics.size(), 5u);  // header + four models
    EXPECT_EQ(metrics[0].substr(0, 23), "model,2022-10_accuracy,");
    EXPECT_EQ(std::count(metrics[0].begin(), metrics[0].end(), ','), 9);
}

TEST(Cli, EveryStageIsByteIdenticalAcrossReruns) {
    TempDir a, b;
    pipeline(a);
    pipeline(b);
    for (const char* p : {"syn/logs.csv", "syn/labels.csv", "records.csv", "graphs.csv", "feat/features_2022-11.csv",
                          "model.json", "metrics.csv", "runs/r1/run.json", "runs/r1/candidates.csv",
                          "runs/r1/positives.csv", "runs/r1/summary.json"})
        EXPECT_EQ(slurp(a.file(p)), slurp(b.file(p))) << p;
}

TEST(Cli, EmptyInputIsAStructuredError) {
    TempDir dir;
    navnet::write_file(dir.file("empty.csv"), "");
    const auto r = run({"build-graph", "--records", dir.file("empty.csv"), "--out", dir.file("g.csv")});
    EXPECT_NE(r.status, 0);
    const auto j = nlohmann::json::parse(r.err);
    EXPECT_EQ(j.at("error").at("code"), "empty_input");
    EXPECT_FALSE(std::filesystem::exists(dir.file("g.csv")));
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).status, 2);
    EXPECT_EQ(run({"frobnicate"}).status, 2);
    EXPECT_EQ(run({"train", "--graphs", "/definitely/missing.csv", "--labels", "x", "--out", "m"}).status, 2);
    const auto help = run({"--help"});
    EXPECT_EQ(help.status, 0);
    EXPECT_NE(help.out.find("build-graph"), std::string::npos);
}

TEST(Cli, IngestAppliesPrivacyFloorUnlessDisabled) {
    TempDir dir;
    navnet::write_file(dir.file("log.csv"),
                       "month,referrer,target,page_views\n"
                       "2022-10,a.example,b.example,5000\n"
                       "2022-10,a.example,c.example,100\n"
                       "2022-10,www.a.example,b.example,50\n");
    navnet::write_file(dir.file("aliases.csv"), "from_host,to_host\nwww.a.example,a.example\n");
    auto r = run({"ingest", "--logs", dir.file("log.csv"), "--aliases", dir.file("aliases.csv"), "--out", dir.file("r.csv")});
    ASSERT_EQ(r.status, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("dropped_by_privacy_floor"), 1);
    EXPECT_EQ(navnet::read_lines(dir.file("r.csv")),
              (std::vector<std::string>{"month,referrer,target,page_views", "2022-10,a.example,b.example,5050"}));
    r = run({"ingest", "--logs", dir.file("log.csv"), "--privacy-floor", "0", "--out", dir.file("r2.csv")});
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(navnet::read_lines(dir.file("r2.csv")).size(), 4u);
}

TEST(Cli, EstimateFromReviewedEvents) {
    TempDir dir;
    pipeline(dir);
    const auto positives = navnet::read_lines(dir.file("runs/r1/positives.csv"));
    ASSERT_GE(positives.size(), 2u);
    const auto domain = navnet::split_csv(positives[1])[0];
    navnet::append_event(dir.file("events.jsonl"), {domain, navnet::Verdict::confirmed_misinformation, "amy", "t", "r1", {}});
    const auto r = run({"estimate", "--run", dir.file("runs/r1"), "--events", dir.file("events.jsonl")});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("reviewed"), 1);
    EXPECT_DOUBLE_EQ(j.at("precision").get<double>(), 1.0);
    EXPECT_TRUE(j.at("recall").is_null());
}
