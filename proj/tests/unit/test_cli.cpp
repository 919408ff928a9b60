#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "underloc/cli/commands.hpp"

namespace underloc::cli {
namespace {

using underloc::testing::TempDir;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "underloc");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// One small synthetic dataset shared by the CLI tests.
class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new TempDir("cli");
        const auto r = cli({"synth", "--out", (dir_->path() / "data").string(), "--views", "9",
                            "--max-keypoints", "160", "--seed", "3"});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }

    static std::string data(const std::string& f) { return (dir_->path() / "data" / f).string(); }
    static std::string out(const std::string& f) { return (dir_->path() / f).string(); }

    static std::vector<std::string> run_args(const std::string& out_dir) {
        return {"run", "--query", data("query.jsonl"), "--database", data("database.jsonl"),
                "--out", out(out_dir), "--max-keypoints", "160"};
    }

    static TempDir* dir_;
};

TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, MissingManifestNamesThePath) {
    const auto r = cli({"run", "--query", "/nonexistent/q.jsonl", "--database", data("database.jsonl"),
                        "--out", out("missing")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/nonexistent/q.jsonl"), std::string::npos) << r.err;
}

TEST_F(CliTest, InvalidKNamesTheField) {
    auto args = run_args("badk");
    args.insert(args.end(), {"-K", "0"});
    const auto r = cli(args);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("-K"), std::string::npos) << r.err;
    args = run_args("badchi");
    args.insert(args.end(), {"--chi", "-1"});
    EXPECT_EQ(cli(args).code, 1);
}

TEST_F(CliTest, UnknownSubcommandFails) { EXPECT_EQ(cli({"frobnicate"}).code, 1); }

TEST_F(CliTest, RunWritesArtifacts) {
    auto args = run_args("run1");
    args.insert(args.end(), {"--baseline", "random"});
    const auto r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"metrics.json", "recall.csv", "pr.csv", "registrations.jsonl",
                          "config.json", "timing.json"}) {
        EXPECT_TRUE(std::filesystem::exists(out("run1") + "/" + f)) << f;
    }
    const auto recall = slurp(out("run1") + "/recall.csv");
    EXPECT_EQ(recall.rfind("series,k,recall\n", 0), 0u);
    EXPECT_NE(recall.find("\nrandom,1,"), std::string::npos);
    EXPECT_NE(recall.find("\nhierarchical,1,"), std::string::npos);
    const auto metrics = nlohmann::json::parse(slurp(out("run1") + "/metrics.json"));
    EXPECT_EQ(metrics["config"]["k"], 10);
    EXPECT_EQ(metrics["config"]["chi_px"], 10.0);
    EXPECT_EQ(metrics["config"]["trials"], 100);
    EXPECT_FALSE(metrics.contains("timing"));
    // One registration line per query.
    const auto regs = slurp(out("run1") + "/registrations.jsonl");
    EXPECT_EQ(std::count(regs.begin(), regs.end(), '\n'), 9);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
    auto a = run_args("det_a");
    auto b = run_args("det_b");
    b.insert(b.end(), {"--threads", "3"});
    ASSERT_EQ(cli(a).code, 0);
    ASSERT_EQ(cli(b).code, 0);
    for (const char* f : {"metrics.json", "registrations.jsonl", "recall.csv", "pr.csv"}) {
        EXPECT_EQ(slurp(out("det_a") + "/" + f), slurp(out("det_b") + "/" + f)) << f;
    }
}

TEST_F(CliTest, EchoedConfigReproducesTheRun) {
    auto args = run_args("echo_a");
    args.insert(args.end(), {"-K", "4", "--chi", "7.5", "--seed", "11"});
    ASSERT_EQ(cli(args).code, 0);
    const auto r = cli({"run", "--config", out("echo_a") + "/config.json", "--out", out("echo_b")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(out("echo_a") + "/metrics.json"), slurp(out("echo_b") + "/metrics.json"));
    EXPECT_EQ(slurp(out("echo_a") + "/registrations.jsonl"),
              slurp(out("echo_b") + "/registrations.jsonl"));
}

TEST_F(CliTest, SeedPrecedence) {
    ::setenv("UNDERLOC_SEED", "77", 1);
    EXPECT_EQ(resolve_seed(std::nullopt), 77u);
    EXPECT_EQ(resolve_seed(5), 5u);
    ::setenv("UNDERLOC_SEED", "abc", 1);
    EXPECT_THROW(resolve_seed(std::nullopt), std::invalid_argument);
    ::unsetenv("UNDERLOC_SEED");
    EXPECT_EQ(resolve_seed(std::nullopt), 42u);
}

TEST_F(CliTest, BaselineGtAndIouSubcommands) {
    auto r = cli({"baseline", "--kind", "random", "--query", data("query.jsonl"), "--database",
                  data("database.jsonl"), "--out", out("rb"), "--trials", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(out("rb") + "/recall.csv").find("random,1,"), std::string::npos);

    r = cli({"baseline", "--kind", "bruteforce", "--query", data("query.jsonl"), "--database",
             data("database.jsonl"), "--out", out("bf")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = nlohmann::json::parse(slurp(out("bf") + "/metrics.json"));
    EXPECT_EQ(m["counters"]["bruteforce_local_match_invocations"], 81);

    r = cli({"baseline", "--kind", "magic", "--query", data("query.jsonl"), "--database",
             data("database.jsonl"), "--out", out("bad")});
    EXPECT_EQ(r.code, 1);

    r = cli({"gt", "--query", data("query.jsonl"), "--database", data("database.jsonl"), "--out",
             out("gt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(out("gt") + "/ground_truth.csv").find("p1_v0000,p0_v0000"), std::string::npos);

    ASSERT_EQ(cli(run_args("for_iou")).code, 0);
    r = cli({"iou", "--query", data("query.jsonl"), "--database", data("database.jsonl"),
             "--registrations", out("for_iou") + "/registrations.jsonl", "--out", out("iou")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto iou = slurp(out("iou") + "/iou.csv");
    EXPECT_EQ(iou.rfind("query_id,database_id,iou\n", 0), 0u);
    EXPECT_GT(std::count(iou.begin(), iou.end(), '\n'), 1);
}

TEST_F(CliTest, ExtractRewritesManifest) {
    const auto r = cli({"extract", "--manifest", data("database.jsonl"), "--out", out("ext"),
                        "--max-keypoints", "160"});
    ASSERT_EQ(r.code, 0) << r.err;
    // Built-in extraction of the same images gives the same bytes as synth.
    EXPECT_EQ(slurp(out("ext") + "/database.uld"), slurp(data("database.uld")));
    EXPECT_EQ(slurp(out("ext") + "/database.ulk"), slurp(data("database.ulk")));
    const auto again = cli({"run", "--query", data("query.jsonl"), "--database",
                            out("ext") + "/database.jsonl", "--out", out("ext_run")});
    EXPECT_EQ(again.code, 0) << again.err;
}

TEST_F(CliTest, BuiltinFeaturesFlag) {
    auto args = run_args("builtin");
    args.push_back("--use-builtin-features");
    ASSERT_EQ(cli(args).code, 0);
    ASSERT_EQ(cli(run_args("files")).code, 0);
    EXPECT_EQ(slurp(out("builtin") + "/registrations.jsonl"),
              slurp(out("files") + "/registrations.jsonl"));
}

}  // namespace
}  // namespace underloc::cli
