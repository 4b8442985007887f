#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "opode/pipeline.hpp"

using namespace opode;
using nlohmann::json;

namespace {

struct CliRun {
    int code;
    std::string out;
};

CliRun cli(const std::string &args) {
    const std::string cmd = std::string(OPODE_CLI) + " " + args + " 2>/dev/null";
    FILE *pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

void strip_timing(json &j) {
    if (j.is_object()) {
        j.erase("timing");
        for (auto &[k, v] : j.items()) strip_timing(v);
    } else if (j.is_array()) {
        for (auto &v : j) strip_timing(v);
    }
}

SolveRequest request(const std::string &ode, Method m = Method::Auto) {
    SolveRequest r;
    r.ode = ode;
    r.method = m;
    return r;
}

}  // namespace

TEST(Cli, ReduceExample) {
    const CliRun r = cli("solve 'diff(u,t) = u^2 + 1' --method reduce");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("tan(t + arctan(c))"), std::string::npos) << r.out;
}

TEST(Cli, DysonExample) {
    const CliRun r = cli("solve 'diff(u,t) = u^2 + 2*t - t^4' --method dyson --json");
    EXPECT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_EQ(j["solutions"][0]["expr"], "t^2");
    EXPECT_EQ(j["solutions"][0]["primary"], true);
    EXPECT_EQ(j["solutions"][0]["provenance"], "dyson");
}

TEST(Cli, NoStrategyApplies) {
    const CliRun r = cli("solve 'diff(u,t) = exp(u^2)'");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("no strategy"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli("solve 'diff(u,t) = u^2 +'").code, 1);
    EXPECT_EQ(cli("solve 'diff(u,t) = u^2' --method magic").code, 1);
    EXPECT_EQ(cli("solve 'diff(u,t) = u^2' --method riccati").code, 1);
    EXPECT_EQ(cli("solve 'diff(u,t) = u^2' --method riccati --seed-solution '1/t'").code, 1);
    EXPECT_EQ(cli("frobnicate").code, 1);
    EXPECT_EQ(cli("").code, 1);
}

TEST(Cli, ExitCodeContract) {
    const std::vector<std::pair<std::string, int>> corpus{
        {"solve 'diff(u,t) = t'", 0},
        {"solve 'diff(u,t) = u, at t=0' --method flow --max-iter 5", 2},
        {"solve 'diff(u,t) = cos(t), at t=0' --method flow", 0},
        {"solve 'diff(u,t) = u^2' --method riccati --seed-solution '-1/t'", 0},
        {"solve 'diff(u,t) = t*u' --method riccati --seed-solution 0", 2},
        {"solve 'a = t^2; diff(u,t) = u^2 + diff(a,t) - a^2' --method dyson", 0},
        {"solve 'diff(u,t) = u^2 + diff(a,t) - a^2' --def 'a=t*exp(t)' --method dyson", 0},
        {"solve 'diff(u,t) = exp(u^2) + t' --method reduce", 2},
        {"verify 'diff(u,t) = u^2 + 1' 'tan(t + arctan(c))'", 0},
        {"verify 'diff(u,t) = u^2 + 1' t", 2},
        {"reduce 'diff(u,t) = u^2 + 1'", 0},
        {"solve 'diff(u,t = u'", 1},
    };
    for (const auto &[args, code] : corpus) EXPECT_EQ(cli(args).code, code) << args;
}

TEST(Cli, DeterministicJson) {
    const std::string args = "solve 'diff(u,t) = u^2 + 2*t - t^4' --json";
    json a = json::parse(cli(args).out), b = json::parse(cli(args).out);
    strip_timing(a);
    strip_timing(b);
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_TRUE(a["solutions"][0]["verification"]["max_residual"].is_string());
    EXPECT_EQ(a["schema"], "opode.solve/1");
}

TEST(Cli, TrialsFileAndBasePoint) {
    const std::string path = testing::TempDir() + "cli_trials.txt";
    std::ofstream(path) << "c\n";
    const CliRun r = cli("solve 'diff(u,t) = u^2 + 1' --at 0 --method reduce --trials " + path + " --json");
    std::remove(path.c_str());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["solutions"][0]["expr"], "tan(t + arctan(c))");
}

TEST(Cli, ReduceSubcommand) {
    const CliRun r = cli("reduce 'diff(u,t) = u^2 + 1' --json");
    ASSERT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_EQ(j["trials"][0]["trial"], "c");
    EXPECT_EQ(j["trials"][0]["separable"]["kind"], "separable");
    EXPECT_TRUE(j["trials"][0]["linear"].is_null());
}

TEST(Pipeline, AutoAddsRiccatiFromDysonSeed) {
    // An empty trial file takes reduce out of the way.
    const std::string path = testing::TempDir() + "no_trials.txt";
    std::ofstream(path) << "# none\n";
    SolveRequest r = request("diff(u,t) = u^2 + 2*t - t^4");
    r.trials_path = path;
    const SolveReport rep = run_solve(r);
    std::remove(path.c_str());
    ASSERT_EQ(rep.exit_code, 0);
    ASSERT_EQ(rep.runs.size(), 3u);
    EXPECT_FALSE(rep.runs[0].found);
    ASSERT_EQ(rep.solutions.size(), 2u);
    EXPECT_EQ(rep.solutions[0].provenance(), Provenance::Dyson);
    EXPECT_EQ(rep.solutions[1].provenance(), Provenance::Part2Gen);
    EXPECT_EQ(rep.solutions[1].kind(), SolutionKind::General);

    // An explicit method runs only that strategy.
    const SolveReport d = run_solve(request("diff(u,t) = u^2 + 2*t - t^4", Method::Dyson));
    EXPECT_EQ(d.runs.size(), 1u);
    EXPECT_EQ(d.solutions.size(), 1u);
}

TEST(Pipeline, DeAudit) {
    // DE1 and DE2 as printed do not admit their stated answers.
    SolveRequest de1 = request("diff(u,t) = u^2 + 1/t^138 + 41552420*t^90 + 4410*t^89 + 7225/t^136 - 13430*t^23 + "
                               "8330*t^22 + 6241*t^182 - 7742*t^181 - 2401*t^180 + 1");
    const VerifyReport r1 = run_verify(de1, "-85/t^68 + 79*t^91 + 49*t^90");
    EXPECT_FALSE(r1.pass);
    EXPECT_NE(r1.residual, "0");

    const VerifyReport r2 = run_verify(request("diff(u,t) = u^2 - p*m*cos(t)*sin(t)^(m-1) + p^2*sin(t)^(2*m)"),
                                       "p*sin(t)^m");
    EXPECT_FALSE(r2.pass);
    const VerifyReport fixed = run_verify(request("diff(u,t) = u^2 + p*m*cos(t)*sin(t)^(m-1) - p^2*sin(t)^(2*m)"),
                                          "p*sin(t)^m");
    EXPECT_TRUE(fixed.pass);
}
