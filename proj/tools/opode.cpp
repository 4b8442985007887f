// Command-line front end: solve, verify, reduce, oracle.

#include <iostream>

#include <CLI11.hpp>

#include "opode/chronos.hpp"
#include "opode/pipeline.hpp"
#include "opode/reduce.hpp"

using namespace opode;

namespace {

void emit(bool as_json, const nlohmann::json &j, const std::string &text) {
    if (as_json) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << text;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Symbolic solver for first-order ODEs du/dt = f(t, u)"};
    app.require_subcommand(1);

    SolveRequest req;
    std::string method = "auto", verify_mode = "both", candidate;
    bool as_json = false;
    std::uint64_t rng_seed = 1;

    auto common = [&](CLI::App *cmd) {
        cmd->add_option("ode", req.ode, "Equation, e.g. \"diff(u,t) = u^2 + 1, at t=0\"")->required();
        cmd->add_option("--at", req.at, "Base point a (u(a) = c)");
        cmd->add_option("--def", req.definitions, "Helper definition name=expr (repeatable)");
        cmd->add_option("--verify", verify_mode, "Verification mode")
            ->check(CLI::IsMember({"symbolic", "numeric", "both"}));
        cmd->add_option("--tol", req.verify.tol, "Numeric residual tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--rng-seed", req.verify.seed, "Sampling seed");
        cmd->add_flag("--json", as_json, "Emit the JSON report");
    };

    CLI::App *solve = app.add_subcommand("solve", "Find a verified solution");
    common(solve);
    solve->add_option("--method", method, "Strategy")
        ->check(CLI::IsMember({"auto", "dyson", "flow", "reduce", "riccati"}));
    solve->add_option("--max-iter", req.max_iter, "Iteration limit for dyson and flow")->check(CLI::PositiveNumber);
    solve->add_option("--window", req.window, "Survived-part window")->check(CLI::PositiveNumber);
    solve->add_option("--trials", req.trials_path, "Trial functions, one expression in (t, c) per line");
    solve->add_option("--seed-solution", req.seed_solution, "Known particular solution for riccati");

    CLI::App *verify = app.add_subcommand("verify", "Check a candidate solution");
    common(verify);
    verify->add_option("candidate", candidate, "Candidate u(t[, c])")->required();

    CLI::App *reduce = app.add_subcommand("reduce", "Show phi and the criterion outcomes per trial");
    common(reduce);
    reduce->add_option("--trials", req.trials_path, "Trial functions, one expression in (t, c) per line");

    CLI::App *oracle = app.add_subcommand("oracle", "Run the numerical ordered-exponential checks");
    oracle->add_option("--rng-seed", rng_seed, "Seed for the random paths and pairs");
    oracle->add_flag("--json", as_json, "Emit the JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 1;
    }

    req.verify.mode = verify_mode == "symbolic" ? VerifyMode::Symbolic
                      : verify_mode == "numeric" ? VerifyMode::Numeric
                                                 : VerifyMode::Both;
    const std::map<std::string, Method> methods{{"auto", Method::Auto},     {"dyson", Method::Dyson},
                                                {"flow", Method::Flow},     {"reduce", Method::Reduce},
                                                {"riccati", Method::Riccati}};
    req.method = methods.at(method);

    try {
        if (*solve) {
            const SolveReport rep = run_solve(req);
            emit(as_json, to_json(rep), to_text(rep));
            return rep.exit_code;
        }
        if (*verify) {
            const VerifyReport rep = run_verify(req, candidate);
            emit(as_json, to_json(rep), to_text(rep));
            return rep.pass ? 0 : 2;
        }
        if (*reduce) {
            const ODEProblem p = request_problem(req);
            const auto trials = req.trials_path ? load_trials(p, *req.trials_path) : builtin_trials(p);
            const auto reps = examine_trials(p, trials, req.verify);
            emit(as_json, to_json(reps), to_text(reps));
            return 0;
        }
        auto checks = chronos::oracle_suite(rng_seed);
        for (auto &c : chronos::homomorphy_suite(rng_seed, 10)) checks.push_back(std::move(c));
        bool all = true;
        for (const auto &c : checks) all = all && c.pass;
        emit(as_json, to_json(checks), to_text(checks));
        return all ? 0 : 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
