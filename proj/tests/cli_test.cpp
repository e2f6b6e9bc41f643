#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string out;  // stdout only
};

std::string cli_path() {
    const char* env = std::getenv("TCM_CLI_BIN");
    REQUIRE_MESSAGE(env != nullptr, "TCM_CLI_BIN must point at the CLI binary");
    return env;
}

CommandResult run_cli(const std::string& args) {
    const std::string command = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CommandResult result;
    char buffer[4096];
    while (std::size_t n = fread(buffer, 1, sizeof(buffer), pipe)) {
        result.out.append(buffer, n);
        if (n < sizeof(buffer)) break;
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("tcm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

const char* kRunConfig = R"(
[dataset]
classes = 3
per_class = 20
dim = 4
separation = 4.0
data_seed = 1

[strategy]
name = tcm

[regime]
name = tiny
num_steps = 2

[train]
epochs = 30

[run]
seeds = 0,1
)";

}  // namespace

TEST_CASE("gen-data then validate-data round-trips through files") {
    TempDir dir;
    write_file(dir.file("gen.ini"), kRunConfig);
    const auto gen = run_cli("gen-data --config " + dir.file("gen.ini") + " --out " +
                             dir.file("data") + " --quiet");
    CHECK(gen.exit_code == 0);
    const auto paths = lines_of(gen.out);
    REQUIRE(paths.size() == 2);
    for (const auto& p : paths) CHECK(fs::exists(p));

    const auto validate =
        run_cli("validate-data --features " + paths[0] + " --labels " + paths[1]);
    CHECK(validate.exit_code == 0);
    CHECK(validate.out == "N=60 D=4 C=3\n");
}

TEST_CASE("validate-data exits 1 on malformed input with a row pointer") {
    TempDir dir;
    write_file(dir.file("bad.emb"), "EMB v1 2 2\nxx");  // truncated payload
    write_file(dir.file("bad.lab"), "0\n1\n");
    const auto result = run_cli("validate-data --features " + dir.file("bad.emb") +
                                " --labels " + dir.file("bad.lab"));
    CHECK(result.exit_code == 1);
}

TEST_CASE("run produces byte-identical outputs across executions") {
    TempDir dir;
    write_file(dir.file("run.ini"), kRunConfig);
    const auto first = run_cli("run --config " + dir.file("run.ini") + " --out " +
                               dir.file("out1") + " --quiet");
    REQUIRE(first.exit_code == 0);
    const auto paths = lines_of(first.out);
    REQUIRE(paths.size() == 2);
    CHECK(fs::exists(paths[0]));
    CHECK(fs::exists(paths[1]));

    const auto second = run_cli("run --config " + dir.file("run.ini") + " --out " +
                                dir.file("out2") + " --quiet");
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(dir.file("out1/records.csv")) == slurp(dir.file("out2/records.csv")));
    CHECK(slurp(dir.file("out1/records.json")) == slurp(dir.file("out2/records.json")));

    // The CSV carries the configured run: 2 seeds x 3 steps + header.
    CHECK(lines_of(slurp(dir.file("out1/records.csv"))).size() == 1 + 6);
}

TEST_CASE("run rejects an invalid config with exit 1 and reports every error") {
    TempDir dir;
    write_file(dir.file("bad.ini"), "[strategy]\nname = nope\n");
    const auto result =
        run_cli("run --config " + dir.file("bad.ini") + " --out " + dir.file("out"));
    CHECK(result.exit_code == 1);
    CHECK(result.out.empty());  // errors go to stderr, nothing was emitted
}

TEST_CASE("seeds override replaces the configured list") {
    TempDir dir;
    write_file(dir.file("run.ini"), kRunConfig);
    const auto result = run_cli("run --config " + dir.file("run.ini") + " --out " +
                                dir.file("out") + " --seeds 7 --quiet");
    REQUIRE(result.exit_code == 0);
    const auto csv = slurp(dir.file("out/records.csv"));
    CHECK(csv.find("tcm,tiny,7,0,") != std::string::npos);
    CHECK(csv.find("tcm,tiny,0,0,") == std::string::npos);
}

TEST_CASE("aggregate computes improvement over the random baseline") {
    TempDir dir;
    write_file(dir.file("run.ini"), kRunConfig);
    std::string random_config(kRunConfig);
    const std::size_t pos = random_config.find("name = tcm");
    random_config.replace(pos, 10, "name = random");
    write_file(dir.file("rand.ini"), random_config);

    REQUIRE(run_cli("run --config " + dir.file("run.ini") + " --out " + dir.file("r_tcm") +
                    " --quiet")
                .exit_code == 0);
    REQUIRE(run_cli("run --config " + dir.file("rand.ini") + " --out " +
                    dir.file("r_rand") + " --quiet")
                .exit_code == 0);

    fs::create_directories(dir.file("all"));
    fs::copy_file(dir.file("r_tcm/records.csv"), dir.file("all/tcm.csv"));
    fs::copy_file(dir.file("r_rand/records.csv"), dir.file("all/random.csv"));

    const auto agg =
        run_cli("aggregate --in " + dir.file("all") + " --out " + dir.file("agg"));
    REQUIRE(agg.exit_code == 0);
    const auto paths = lines_of(agg.out);
    REQUIRE(paths.size() == 1);
    const auto csv = slurp(paths[0]);
    CHECK(csv.find("strategy,cumulative_budget,improvement_mean,improvement_std") == 0);
    CHECK(csv.find("tcm,3,") != std::string::npos);
    // Random against itself is identically zero.
    CHECK(csv.find("random,3,0,0") != std::string::npos);

    // Without the baseline the aggregation is a runtime error: exit 2.
    fs::remove(dir.file("all/random.csv"));
    const auto missing =
        run_cli("aggregate --in " + dir.file("all") + " --out " + dir.file("agg2"));
    CHECK(missing.exit_code == 2);
}

TEST_CASE("long-tail files flow through gen-data, validate-data and run") {
    TempDir dir;
    write_file(dir.file("gen.ini"), R"(
[dataset]
classes = 10
per_class = 200
dim = 16
separation = 5.0
data_seed = 7
longtail_rho = 10
longtail_seed = 7

[strategy]
name = random

[regime]
name = tiny
)");
    const auto gen = run_cli("gen-data --config " + dir.file("gen.ini") + " --out " +
                             dir.file("data") + " --quiet");
    REQUIRE(gen.exit_code == 0);
    const auto paths = lines_of(gen.out);
    REQUIRE(paths.size() == 2);

    // Class sizes decay 200, 155, 120, ..., 20: 818 rows in total.
    const auto validate =
        run_cli("validate-data --features " + paths[0] + " --labels " + paths[1]);
    CHECK(validate.exit_code == 0);
    CHECK(validate.out == "N=818 D=16 C=10\n");

    write_file(dir.file("run.ini"), std::string(R"(
[dataset]
features = )") + paths[0] + "\nlabels = " + paths[1] + R"(

[strategy]
name = margin

[regime]
name = tiny
num_steps = 3

[train]
epochs = 40

[run]
seeds = 0
metric = balanced_accuracy
)");
    const auto run = run_cli("run --config " + dir.file("run.ini") + " --out " +
                             dir.file("out") + " --quiet");
    REQUIRE(run.exit_code == 0);
    const auto csv = slurp(dir.file("out/records.csv"));
    CHECK(lines_of(csv).size() == 1 + 4);
    CHECK(csv.find("margin,tiny,0,3,40,balanced_accuracy,") != std::string::npos);
}

TEST_CASE("aggregate reads its records directory from the config") {
    TempDir dir;
    write_file(dir.file("run.ini"), kRunConfig);
    std::string random_config(kRunConfig);
    const std::size_t pos = random_config.find("name = tcm");
    random_config.replace(pos, 10, "name = random");
    write_file(dir.file("rand.ini"), random_config);
    REQUIRE(run_cli("run --config " + dir.file("rand.ini") + " --out " + dir.file("all") +
                    " --quiet")
                .exit_code == 0);

    write_file(dir.file("agg.ini"),
               "[aggregate]\nrecords_dir = " + dir.file("all") + "\ngroup = pooled\n");
    const auto agg = run_cli("aggregate --config " + dir.file("agg.ini") + " --out " +
                             dir.file("agg"));
    REQUIRE(agg.exit_code == 0);
    const auto csv = slurp(dir.file("agg/aggregate.csv"));
    CHECK(csv.find("random,pooled,0,0") != std::string::npos);
}

TEST_CASE("ablate-transition emits one labeled variant per N") {
    TempDir dir;
    std::string config(kRunConfig);
    config += "\n[ablation]\ntransition_ns = 1,3\n";
    write_file(dir.file("ab.ini"), config);
    const auto result = run_cli("ablate-transition --config " + dir.file("ab.ini") +
                                " --out " + dir.file("out") + " --quiet");
    REQUIRE(result.exit_code == 0);
    const auto csv = slurp(dir.file("out/records.csv"));
    CHECK(csv.find("tcm_n1,") != std::string::npos);
    CHECK(csv.find("tcm_n3,") != std::string::npos);
}

TEST_CASE("ablate-steps truncates the last step to hold the budget fixed") {
    TempDir dir;
    std::string config(kRunConfig);
    const std::size_t pos = config.find("name = tcm");
    config.replace(pos, 10, "name = tcm\ntypiclust_steps = 1");
    config += "\n[ablation]\nstep_sizes = 2,4\n";
    write_file(dir.file("ab.ini"), config);
    const auto result = run_cli("ablate-steps --config " + dir.file("ab.ini") + " --out " +
                                dir.file("out") + " --quiet");
    REQUIRE(result.exit_code == 0);
    const auto csv = slurp(dir.file("out/records.csv"));
    // Diversity spends 3 of the 9-sample budget. S=2 covers the remaining
    // 6 in steps 2+2+2; S=4 in 4 then a truncated 2. Both end at 9.
    CHECK(csv.find("tcm_s2,tiny,0,3,9,") != std::string::npos);
    CHECK(csv.find("tcm_s4,tiny,0,2,9,") != std::string::npos);
    CHECK(csv.find("tcm_s4,tiny,0,1,7,") != std::string::npos);
}
