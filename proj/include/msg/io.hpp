#ifndef MSG_IO_HPP
#define MSG_IO_HPP

#include "msg/bench.hpp"
#include "msg/core.hpp"
#include "msg/driver.hpp"
#include "msg/toml.hpp"

#include <json.hpp>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace msg {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json json_num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline ordered_json json_vec(const Vector& v) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

} // namespace detail

inline ordered_json record_to_json(const IterationRecord& rec) {
    ordered_json j;
    j["k"] = rec.k;
    j["x"] = detail::json_vec(rec.x);
    j["delta"] = detail::json_num(rec.delta);
    j["g_norm"] = detail::json_num(rec.g_norm);
    j["rho"] = rec.rho ? detail::json_num(*rec.rho) : ordered_json(nullptr);
    j["verdict"] = to_string(rec.verdict);
    j["loop_count"] = rec.loop_count;
    j["evals"] = rec.evals;
    j["f"] = detail::json_num(rec.f_value);
    return j;
}

/// One IterationRecord per line.
inline void write_trace_jsonl(const SolveOutcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractViolation("write_trace_jsonl: cannot open " + path);
    for (const IterationRecord& rec : outcome.records) out << record_to_json(rec).dump() << '\n';
}

inline ordered_json summary_to_json(const SolveOutcome& outcome, const std::string& problem_name,
                                    const std::string& method) {
    ordered_json j;
    j["problem"] = problem_name;
    j["method"] = method;
    j["best_x"] = detail::json_vec(outcome.best_x);
    j["best_f"] = detail::json_num(outcome.best_f);
    j["termination"] = to_string(outcome.termination);
    j["iterations"] = outcome.records.size();
    j["evals"] = outcome.evals;
    if (!outcome.fault_message.empty()) j["fault"] = outcome.fault_message;
    return j;
}

inline void write_summary_json(const SolveOutcome& outcome, const std::string& problem_name,
                               const std::string& method, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractViolation("write_summary_json: cannot open " + path);
    out << summary_to_json(outcome, problem_name, method).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Problem files

inline std::shared_ptr<const SelectionOracle> load_selection(const toml::Table& h, int p) {
    const std::string family = h.get_string("family", "");
    if (family == "max_quad") {
        std::vector<Matrix> Q;
        std::vector<Vector> centers;
        std::vector<double> b;
        for (const toml::Table& sel : h.table_array("selection")) {
            const toml::Array& rows = sel.at("Q").as_array();
            Matrix Qj(p, p);
            if (static_cast<int>(rows.size()) != p)
                throw toml::ParseError("selection Q must have p rows");
            for (int r = 0; r < p; ++r) {
                std::vector<double> row = rows[r].as_double_array();
                if (static_cast<int>(row.size()) != p)
                    throw toml::ParseError("selection Q rows must have p entries");
                for (int c = 0; c < p; ++c) Qj(r, c) = row[c];
            }
            std::vector<double> zc = sel.at("z").as_double_array();
            if (static_cast<int>(zc.size()) != p)
                throw toml::ParseError("selection z must have p entries");
            centers.push_back(Eigen::Map<Vector>(zc.data(), p));
            Q.push_back(Qj);
            b.push_back(sel.get_double("b", 0.0));
        }
        return std::make_shared<MaxQuadraticSelection>(Q, centers, b);
    }
    if (family == "max_affine") {
        std::vector<Vector> slopes;
        std::vector<double> b;
        for (const toml::Table& sel : h.table_array("selection")) {
            std::vector<double> c = sel.at("c").as_double_array();
            if (static_cast<int>(c.size()) != p)
                throw toml::ParseError("selection c must have p entries");
            slopes.push_back(Eigen::Map<Vector>(c.data(), p));
            b.push_back(sel.get_double("b", 0.0));
        }
        return std::make_shared<MaxAffineSelection>(slopes, b);
    }
    if (family == "l1") return std::make_shared<SignedL1Selection>(p);
    if (family == "abs") {
        if (p != 1) throw toml::ParseError("abs selection needs p = 1");
        return make_abs_selection();
    }
    if (family == "linear") {
        Vector c = Vector::Zero(p);
        c[0] = 1.0;
        if (h.contains("c")) {
            std::vector<double> cv = h.at("c").as_double_array();
            if (static_cast<int>(cv.size()) != p) throw toml::ParseError("linear c must have p entries");
            c = Eigen::Map<Vector>(cv.data(), p);
        }
        return std::make_shared<LinearSelection>(c, h.get_double("b", 0.0));
    }
    if (family == "sumsq") return std::make_shared<SumSquaresSelection>(p);
    throw toml::ParseError("unknown selection family '" + family + "'");
}

/// Problem file: registry map name, optional x0 override, and an [h] table.
inline Problem load_problem_file(const std::string& path, const std::string& map_override = "") {
    toml::Table tbl = toml::parse_file(path);
    std::string map_name = map_override.empty() ? tbl.get_string("map", "") : map_override;
    if (map_name.empty()) throw toml::ParseError("problem file needs a map name");
    const RegistryMap& map = find_map(map_name);

    Problem prob;
    prob.name = map.name;
    prob.n = map.n;
    prob.p = map.p;
    prob.F = map.value;
    prob.grad_matrix = map.grad_matrix;
    prob.x0 = map.x0;
    if (tbl.contains("x0")) {
        std::vector<double> x0 = tbl.at("x0").as_double_array();
        if (static_cast<int>(x0.size()) != map.n)
            throw toml::ParseError("x0 length must equal the map dimension");
        prob.x0 = Eigen::Map<Vector>(x0.data(), map.n);
    }
    if (!tbl.has_table("h")) throw toml::ParseError("problem file needs an [h] table");
    prob.h = load_selection(tbl.table("h"), map.p);
    return prob;
}

// ---------------------------------------------------------------------------
// Suite manifests

inline SuiteManifest load_manifest_file(const std::string& path) {
    toml::Table tbl = toml::parse_file(path);
    SuiteManifest manifest;
    manifest.budget_multiplier = tbl.get_int("budget_multiplier", 1000);
    manifest.tau = tbl.get_double("tau", 1e-3);
    if (tbl.has_table_array("problem")) {
        for (const toml::Table& p : tbl.table_array("problem")) {
            SuiteEntry entry;
            entry.map = p.at("map").as_string();
            entry.l = static_cast<int>(p.get_int("l", 2));
            entry.seed = static_cast<std::uint64_t>(p.get_int("seed", 0));
            manifest.entries.push_back(std::move(entry));
        }
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// CSV results and profiles

inline const char* kResultsHeader =
    "problem_id,method,n,budget_used,final_f,final_gamma,solved_at_f_tau,solved_at_gamma_tau";

inline void write_results_csv(const std::vector<SuiteResultRow>& rows, std::ostream& out) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.problem_id << ',' << r.method << ',' << r.n << ',' << r.budget_used << ','
            << format_double(r.final_f) << ',' << format_double(r.final_gamma) << ','
            << r.solved_at_f << ',' << r.solved_at_gamma << '\n';
    }
}

inline void write_results_csv(const std::vector<SuiteResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractViolation("write_results_csv: cannot open " + path);
    write_results_csv(rows, out);
}

inline std::vector<SuiteResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("read_results_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw ContractViolation("read_results_csv: unexpected header");
    std::vector<SuiteResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw ContractViolation("read_results_csv: malformed row");
        SuiteResultRow r;
        r.problem_id = fields[0];
        r.method = fields[1];
        r.n = std::stoi(fields[2]);
        r.budget_used = std::stol(fields[3]);
        r.final_f = std::stod(fields[4]);
        r.final_gamma = std::stod(fields[5]);
        r.solved_at_f = std::stol(fields[6]);
        r.solved_at_gamma = std::stol(fields[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_profile_csv(
    const std::map<std::string, std::vector<std::pair<double, double>>>& curves,
    std::ostream& out) {
    out << "method,alpha,fraction\n";
    for (const auto& [method, curve] : curves)
        for (const auto& [alpha, fraction] : curve)
            out << method << ',' << format_double(alpha) << ',' << format_double(fraction) << '\n';
}

inline void write_profile_csv(
    const std::map<std::string, std::vector<std::pair<double, double>>>& curves,
    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractViolation("write_profile_csv: cannot open " + path);
    write_profile_csv(curves, out);
}

/// Breakpoint grid for a profile: every distinct scaled solve budget, plus 0.
inline std::vector<double> profile_grid(const ProfileTable& table) {
    std::vector<double> grid{0.0};
    for (const auto& r : table.rows)
        if (r.solved) grid.push_back(static_cast<double>(r.t) / (r.n + 1.0));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

} // namespace msg

#endif // MSG_IO_HPP
