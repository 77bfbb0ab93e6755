#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "eventchron_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& stdout_file = "") {
    std::string cmd = std::string("\"") + EVENTCHRON_CLI_PATH + "\" " + args;
    cmd += stdout_file.empty() ? " >/dev/null" : " >\"" + (workdir() / stdout_file).string() + "\"";
    cmd += " 2>\"" + (workdir() / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
    std::ifstream in(workdir() / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string path(const std::string& name) { return "\"" + (workdir() / name).string() + "\""; }

void simulate_chain() {
    if (fs::exists(workdir() / "chain.csv")) return;
    ASSERT_EQ(run("simulate --preset chain --rows 1500 --seed 4 --out " + path("chain.csv") + " --sidecar " +
                  path("chain.json")),
              0);
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("discover --algo hc"), 1);  // --data missing
}

TEST(Cli, SimulateIsDeterministic) {
    simulate_chain();
    ASSERT_EQ(run("simulate --preset chain --rows 1500 --seed 4", "again.csv"), 0);
    EXPECT_EQ(slurp("chain.csv"), slurp("again.csv"));
    EXPECT_EQ(slurp("chain.csv").substr(0, 15), "X1,X2,X3,X4,X5\n");
    EXPECT_NE(slurp("chain.json").find("true_effects"), std::string::npos);
}

TEST(Cli, DiscoverWritesEdgesAndDot) {
    simulate_chain();
    ASSERT_EQ(run("discover --data " + path("chain.csv") + " --algo hc --out-prefix " + path("hc")), 0);
    const auto edges = slurp("hc.edges");
    EXPECT_FALSE(edges.empty());
    EXPECT_NE(slurp("hc.dot").find("digraph"), std::string::npos);
    EXPECT_EQ(run("discover --data " + path("chain.csv") + " --algo ges --out-prefix " + path("x")), 1);
}

TEST(Cli, EffectsAndChronology) {
    simulate_chain();
    std::ofstream(workdir() / "truth.edges") << "X1\tX2\nX2\tX3\nX3\tX4\nX4\tX5\n";
    ASSERT_EQ(run("effects --data " + path("chain.csv") + " --dag " + path("truth.edges") + " --out " +
                  path("effects.csv") + " --refute none"),
              0);
    const auto csv = slurp("effects.csv");
    EXPECT_EQ(csv.substr(0, csv.find(',')), "treatment");
    ASSERT_EQ(run("chronology --relations " + path("effects.csv") + " --dag " + path("truth.edges") +
                  " --out-prefix " + path("chrono")),
              0);
    EXPECT_TRUE(fs::exists(workdir() / "chrono.edges"));
}

TEST(Cli, BaselineAndMissingness) {
    simulate_chain();
    ASSERT_EQ(run("baseline --data " + path("chain.csv") + " --out-prefix " + path("base")), 0);
    ASSERT_EQ(run("missingness --data " + path("chain.csv"), "miss.json"), 0);
    EXPECT_NE(slurp("miss.json").find("fully_observed"), std::string::npos);
}

TEST(Cli, ValidationErrorsExitOne) {
    std::ofstream(workdir() / "bad.csv") << "a,b\nTrue,Maybe\n";
    EXPECT_EQ(run("missingness --data " + path("bad.csv")), 1);
    EXPECT_NE(slurp("stderr.txt").find("error:"), std::string::npos);
    EXPECT_EQ(run("missingness --data " + path("absent.csv")), 1);
}

TEST(Cli, PipelineStageFailureExitsTwo) {
    std::ofstream(workdir() / "bad.csv") << "a,b\nTrue,Maybe\n";
    EXPECT_EQ(run("pipeline --input " + path("bad.csv") + " --out-dir " + path("run_bad")), 2);
    EXPECT_NE(slurp("stderr.txt").find("stage 'load'"), std::string::npos);
}
