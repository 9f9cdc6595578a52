// Command-line front end: single solves, benchmark suites, data profiles.
// Numerical work happens in the library; this file only wires flags to it.

#include "msg/bench.hpp"
#include "msg/driver.hpp"
#include "msg/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

msg::Variant parse_variant(const std::string& name) {
    if (name == "msg1") return msg::Variant::MSG1;
    if (name == "msg2") return msg::Variant::MSG2;
    throw msg::ContractViolation("unknown variant '" + name + "' (expected msg1 or msg2)");
}

struct SolveArgs {
    std::string problem_file;
    std::string map_name;
    std::string h_file;
    int gen_l = 0;
    std::uint64_t seed = 0;
    std::string variant = "msg2";
    long budget = 100000;
    double delta0 = 1.0;
    double sigma = 1e-8;
    double eta1 = 0.01;
    double eta2 = 1e4;
    bool quadratic_models = false;
    std::string out = "msg_run";
};

msg::Problem resolve_problem(const SolveArgs& args) {
    if (!args.problem_file.empty()) return msg::load_problem_file(args.problem_file, args.map_name);
    if (!args.map_name.empty() && !args.h_file.empty()) {
        const msg::RegistryMap& map = msg::find_map(args.map_name);
        msg::toml::Table tbl = msg::toml::parse_file(args.h_file);
        const msg::toml::Table& h = tbl.has_table("h") ? tbl.table("h") : tbl;
        msg::Problem prob;
        prob.name = map.name;
        prob.n = map.n;
        prob.p = map.p;
        prob.F = map.value;
        prob.grad_matrix = map.grad_matrix;
        prob.x0 = map.x0;
        if (tbl.contains("x0")) {
            std::vector<double> x0 = tbl.at("x0").as_double_array();
            if (static_cast<int>(x0.size()) != map.n)
                throw msg::toml::ParseError("x0 length must equal the map dimension");
            prob.x0 = Eigen::Map<msg::Vector>(x0.data(), map.n);
        }
        prob.h = msg::load_selection(h, map.p);
        return prob;
    }
    if (!args.map_name.empty() && args.gen_l >= 2) {
        msg::SuiteEntry entry{args.map_name, args.gen_l, args.seed};
        return msg::make_generated_problem(entry);
    }
    throw msg::toml::ParseError(
        "no problem given: use --problem FILE, or --map with --h FILE, or --map with --l/--seed");
}

int cmd_solve(const SolveArgs& args) {
    msg::Problem prob = resolve_problem(args);
    msg::SolverConfig cfg;
    cfg.variant = parse_variant(args.variant);
    cfg.budget = args.budget;
    cfg.delta0 = args.delta0;
    cfg.sigma = args.sigma;
    cfg.eta1 = args.eta1;
    cfg.eta2 = args.eta2;
    cfg.quadratic_models = args.quadratic_models;

    msg::SolveOutcome outcome = msg::solve(prob, cfg);
    msg::write_trace_jsonl(outcome, args.out + ".trace.jsonl");
    msg::write_summary_json(outcome, prob.name, args.variant, args.out + ".summary.json");
    std::cout << msg::summary_to_json(outcome, prob.name, args.variant).dump(2) << '\n';
    return outcome.termination == msg::Termination::fault ? 2 : 0;
}

struct BenchArgs {
    std::string manifest_file;
    std::string methods = "msg1,msg2";
    std::string out_dir = ".";
    double sigma = 1e-8;
    double delta0 = 1.0;
};

int cmd_bench(const BenchArgs& args) {
    msg::SuiteManifest manifest = msg::load_manifest_file(args.manifest_file);
    std::vector<msg::Variant> methods;
    std::stringstream ss(args.methods);
    std::string name;
    while (std::getline(ss, name, ',')) methods.push_back(parse_variant(name));
    if (methods.empty()) throw msg::ContractViolation("no methods given");

    msg::SolverConfig cfg;
    cfg.sigma = args.sigma;
    cfg.delta0 = args.delta0;

    std::vector<msg::SuiteResultRow> rows = msg::run_suite(manifest, methods, cfg);
    std::filesystem::create_directories(args.out_dir);
    const std::string path = args.out_dir + "/results.csv";
    msg::write_results_csv(rows, path);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    return 0;
}

struct ProfileArgs {
    std::string results_file;
    std::string metric = "f";
    double tau = 1e-3;
    std::string out = "profile.csv";
};

int cmd_profile(const ProfileArgs& args) {
    std::vector<msg::SuiteResultRow> rows = msg::read_results_csv(args.results_file);
    msg::ProfileTable table = msg::profile_from_results(rows, args.metric);
    auto curves = msg::data_profile(table, msg::profile_grid(table));
    msg::write_profile_csv(curves, args.out);
    std::cout << "wrote " << args.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"manifold sampling trust-region solver for nonsmooth compositions h(F(x))"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "run one solve, write trace and summary");
    solve->add_option("--problem", solve_args.problem_file, "problem TOML file");
    solve->add_option("--map", solve_args.map_name, "registry map name");
    solve->add_option("--h", solve_args.h_file, "selection-function TOML file");
    solve->add_option("--l", solve_args.gen_l, "selection count for a generated instance");
    solve->add_option("--seed", solve_args.seed, "instance generation seed");
    solve->add_option("--variant", solve_args.variant, "msg1 or msg2")->capture_default_str();
    solve->add_option("--budget", solve_args.budget, "max F evaluations")->capture_default_str();
    solve->add_option("--delta0", solve_args.delta0, "initial trust-region radius")
        ->capture_default_str();
    solve->add_option("--sigma", solve_args.sigma, "near-activity tolerance")->capture_default_str();
    solve->add_option("--eta1", solve_args.eta1, "success threshold")->capture_default_str();
    solve->add_option("--eta2", solve_args.eta2, "acceptability factor")->capture_default_str();
    solve->add_flag("--quadratic-models", solve_args.quadratic_models,
                    "min-Frobenius-norm curvature when cached points allow");
    solve->add_option("--out", solve_args.out, "output path prefix")->capture_default_str();

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "run a suite manifest, write results CSV");
    bench->add_option("--manifest", bench_args.manifest_file, "suite manifest TOML")->required();
    bench->add_option("--methods", bench_args.methods, "comma-separated variants")
        ->capture_default_str();
    bench->add_option("--out", bench_args.out_dir, "output directory")->capture_default_str();
    bench->add_option("--sigma", bench_args.sigma, "near-activity tolerance")->capture_default_str();
    bench->add_option("--delta0", bench_args.delta0, "initial trust-region radius")
        ->capture_default_str();

    ProfileArgs profile_args;
    CLI::App* profile = app.add_subcommand("profile", "data profile from a results CSV");
    profile->add_option("--results", profile_args.results_file, "results CSV path")->required();
    profile->add_option("--metric", profile_args.metric, "f or gamma")->capture_default_str();
    profile->add_option("--tau", profile_args.tau, "accuracy level (informational; results "
                                                   "already encode the tau used by bench)")
        ->capture_default_str();
    profile->add_option("--out", profile_args.out, "output CSV path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(solve_args);
        if (bench->parsed()) return cmd_bench(bench_args);
        if (profile->parsed()) return cmd_profile(profile_args);
    } catch (const msg::toml::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const msg::ContractViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const msg::Fault& e) {
        std::cerr << "fault: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
