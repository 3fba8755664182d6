// Copyright 2026 The rppqubo Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// Command-line driver: build, solve, compare and generate instances.
// JSON goes to stdout, a short human summary to stderr.
//
// Exit codes: 0 ok / feasible, 1 internal error, 2 input error,
// 3 formulations or causality modes disagree, 4 solution infeasible.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rppqubo/rppqubo.hpp"

namespace {

using namespace rppqubo;
using nlohmann::json;

enum Exit : int { kOk = 0, kInternal = 1, kInput = 2, kDisagree = 3, kInfeasible = 4 };

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string instance;
    std::string formulation = "node";
    bool capacity = false;
    bool no_presolve = false;
    std::string causality = "incentive";
    std::string solver = "exhaustive";
    std::uint64_t seed = 0;
    std::optional<int> sweeps;
    std::optional<int> restarts;
    unsigned threads = 0;
    int limit = kDefaultExhaustiveLimit;
    std::optional<double> lambda_location, lambda_step, lambda_incentive, lambda_capacity;
    std::string out;
    bool quiet = false;

    // gen
    int vehicles = 1;
    int requests = 1;
    int capacity_min = 1;
    int capacity_max = 4;
    int max_passengers = 0;
    double box = 10.0;
};

double now_ms() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

RoutingInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read instance file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        auto inst = parse_instance(ss.str());
        if (inst.name.empty()) inst.name = path;
        return inst;
    } catch (const InstanceError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

PenaltyConfig penalties(const Options& o, const RoutingInstance& inst) {
    auto p = PenaltyConfig::defaults_for(inst.path_length());
    if (o.lambda_location) p.lambda_location = *o.lambda_location;
    if (o.lambda_step) p.lambda_step = *o.lambda_step;
    if (o.lambda_incentive) p.lambda_incentive = *o.lambda_incentive;
    if (o.lambda_capacity) p.lambda_capacity = *o.lambda_capacity;
    return p;
}

BuildOptions node_options(const Options& o, const RoutingInstance& inst) {
    BuildOptions b;
    b.with_capacity = o.capacity;
    b.with_presolve = !o.no_presolve;
    b.causality = o.causality == "penalty" ? CausalityMode::penalty : CausalityMode::incentive;
    b.penalty = penalties(o, inst);
    return b;
}

QuboModel build_model(const Options& o, const RoutingInstance& inst, const std::string& formulation) {
    if (formulation == "edge") return build_rpp_edge(inst, {.penalty = penalties(o, inst)});
    return build_rpp(inst, node_options(o, inst));
}

json penalty_json(const PenaltyConfig& p) {
    return {{"location", p.lambda_location},
            {"step", p.lambda_step},
            {"incentive", p.lambda_incentive},
            {"capacity", p.lambda_capacity},
            {"nonedge", p.lambda_nonedge}};
}

json counts_json(const QuboModel& m, const RoutingInstance& inst, const std::string& formulation, bool capacity) {
    long slack = 0;
    for (const auto& k : m.keys()) slack += std::holds_alternative<SlackVar>(k);
    for (const auto& [k, v] : m.fixed()) slack += std::holds_alternative<SlackVar>(k);
    const Formulation f = formulation == "edge" ? Formulation::edge : capacity ? Formulation::node_capacity : Formulation::node;
    return {{"free", m.num_variables()},
            {"fixed", m.fixed().size()},
            {"slack", slack},
            {"registered", m.num_registered()},
            {"closed_form", count_variables(inst, f)},
            {"interactions", m.num_interactions()}};
}

json echo_options(const Options& o, const RoutingInstance& inst, const std::string& formulation) {
    return {{"instance_path", o.instance},
            {"formulation", formulation},
            {"capacity", o.capacity},
            {"presolve", !o.no_presolve},
            {"causality", o.causality},
            {"penalties", penalty_json(penalties(o, inst))}};
}

SaSchedule schedule(const Options& o, const RoutingInstance& inst) {
    auto s = SaSchedule::defaults_for(inst.path_length(), o.seed);
    if (o.sweeps) s.sweeps = *o.sweeps;
    if (o.restarts) s.restarts = *o.restarts;
    s.threads = o.threads;
    return s;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

void note(const Options& o, const std::string& line) {
    if (!o.quiet) std::cerr << line << '\n';
}

std::string route_text(const DecodedSolution& sol, const RoutingInstance& inst) {
    std::string s;
    for (std::size_t a = 0; a < sol.routes.size(); ++a) {
        s += "  " + inst.vehicles[a].id + ":";
        for (int l : sol.routes[a]) s += " " + inst.locations[static_cast<std::size_t>(l)].id;
        s += '\n';
    }
    return s;
}

// ---------------------------------------------------------------------------

int cmd_build(const Options& o) {
    const auto inst = load_instance(o.instance);
    const auto m = build_model(o, inst, o.formulation);
    json report = {{"instance", inst.name}, {"options", echo_options(o, inst, o.formulation)},
                   {"counts", counts_json(m, inst, o.formulation, o.capacity)}};
    const auto side = sidecar(m, o.formulation, &inst);
    if (!o.out.empty()) {
        write_file(o.out, export_qubo(m));
        write_file(o.out + ".json", side.dump(2));
        report["qubo_file"] = o.out;
        report["sidecar_file"] = o.out + ".json";
    } else {
        report["qubo"] = export_qubo(m);
        report["sidecar"] = side;
    }
    emit(report);
    char line[160];
    std::snprintf(line, sizeof line, "%s %s: %d free, %zu fixed, %d registered (closed form %lld)", inst.name.c_str(),
                  o.formulation.c_str(), m.num_variables(), m.fixed().size(), m.num_registered(),
                  count_variables(inst, o.formulation == "edge" ? Formulation::edge
                                        : o.capacity             ? Formulation::node_capacity
                                                                 : Formulation::node));
    note(o, line);
    return kOk;
}

struct Solved {
    DecodedSolution sol;
    std::optional<SolveResult> result;
    std::optional<QuboModel> model;
    std::string solver;
    double build_ms = 0.0;
};

Solved run_solver(const Options& o, const RoutingInstance& inst, const std::string& formulation, const std::string& solver) {
    Solved s;
    s.solver = solver;
    if (solver == "oracle") {
        s.sol = routing_oracle(inst, {.capacity = o.capacity});
        return s;
    }
    const double t0 = now_ms();
    s.model = build_model(o, inst, formulation);
    s.build_ms = now_ms() - t0;
    s.result = solver == "sa" ? solve_sa(*s.model, schedule(o, inst)) : solve_exhaustive(*s.model, o.limit);
    s.sol = formulation == "edge" ? decode_edge(s.result->best_assignment, *s.model, inst)
                                  : decode_node(s.result->best_assignment, *s.model, inst);
    return s;
}

int cmd_solve(const Options& o) {
    const auto inst = load_instance(o.instance);
    const auto s = run_solver(o, inst, o.formulation, o.solver);
    json report = {{"instance", inst.name},
                   {"options", echo_options(o, inst, o.formulation)},
                   {"solver", o.solver},
                   {"seed", o.seed},
                   {"solution", to_json(s.sol, inst)}};
    json timing = json::object();
    if (s.model) {
        report["counts"] = counts_json(*s.model, inst, o.formulation, o.capacity);
        report["best_energy"] = s.result->best_energy;
        report["energy"] = to_json(energy_decomposition(*s.model, s.result->best_assignment));
        report["evaluations"] = s.result->evaluations;
        timing["build_ms"] = s.build_ms;
        timing["solve_ms"] = s.result->wall_ms;
        if (o.solver == "sa") {
            const auto sc = schedule(o, inst);
            report["schedule"] = {{"sweeps", sc.sweeps},
                                  {"restarts", sc.restarts},
                                  {"beta_initial", sc.beta_initial},
                                  {"beta_final", sc.beta_final}};
        } else {
            report["minimizers"] = s.result->all_minimizers->size();
        }
    }
    report["timing"] = timing;
    emit(report);

    char line[160];
    std::snprintf(line, sizeof line, "%s via %s: %s, distance %.6g", inst.name.c_str(), o.solver.c_str(),
                  s.sol.feasible ? "feasible" : "INFEASIBLE", s.sol.total_distance);
    note(o, line + std::string("\n") + route_text(s.sol, inst));
    for (const auto& v : s.sol.violations) note(o, "  violation " + std::string(to_string(v.kind)) + ": " + v.detail);
    return s.sol.feasible ? kOk : kInfeasible;
}

int cmd_compare(const Options& o) {
    const auto inst = load_instance(o.instance);
    auto pick = [&](const QuboModel& m) { return m.num_variables() <= o.limit ? std::string("exhaustive") : std::string("sa"); };

    const auto node_model = build_model(o, inst, "node");
    const auto edge_model = build_model(o, inst, "edge");
    const auto node = run_solver(o, inst, "node", pick(node_model));
    const auto edge = run_solver(o, inst, "edge", pick(edge_model));
    const auto oracle = routing_oracle(inst, {.capacity = o.capacity});

    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    const bool node_ok = node.sol.feasible && same(node.sol.total_distance, oracle.total_distance);
    const bool edge_ok = edge.sol.feasible && same(edge.sol.total_distance, node.sol.total_distance);

    json causality = {{"checked", false}};
    bool causality_ok = true;
    if (node_model.num_variables() <= o.limit) {
        auto opts = node_options(o, inst);
        opts.causality = CausalityMode::incentive;
        const auto inc = solve_exhaustive(build_rpp(inst, opts), o.limit);
        opts.causality = CausalityMode::penalty;
        const auto pen = solve_exhaustive(build_rpp(inst, opts), o.limit);
        causality_ok = *inc.all_minimizers == *pen.all_minimizers;
        causality = {{"checked", true},
                     {"identical_minimizers", causality_ok},
                     {"incentive_minimizers", inc.all_minimizers->size()},
                     {"energy_gap", pen.best_energy - inc.best_energy}};
    }

    auto side = [&](const Solved& s, const QuboModel& m, const std::string& f) {
        json c = counts_json(m, inst, f, o.capacity && f == "node");
        c["solver"] = s.solver;
        c["solution"] = to_json(s.sol, inst);
        return c;
    };
    const bool agree = node_ok && edge_ok && causality_ok;
    json report = {{"instance", inst.name},
                   {"options", echo_options(o, inst, "node")},
                   {"seed", o.seed},
                   {"node", side(node, node_model, "node")},
                   {"edge", side(edge, edge_model, "edge")},
                   {"oracle", to_json(oracle, inst)},
                   {"node_matches_oracle", node_ok},
                   {"edge_matches_node", edge_ok},
                   {"causality_modes", causality},
                   {"agree", agree}};
    emit(report);

    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%-10s %10s %10s %12s %9s\n"
                  "%-10s %10d %10d %12.6g %9s\n"
                  "%-10s %10d %10d %12.6g %9s\n"
                  "%-10s %10s %10s %12.6g %9s\n",
                  "", "registered", "free", "distance", "feasible", "node", node_model.num_registered(),
                  node_model.num_variables(), node.sol.total_distance, node.sol.feasible ? "yes" : "no", "edge",
                  edge_model.num_registered(), edge_model.num_variables(), edge.sol.total_distance,
                  edge.sol.feasible ? "yes" : "no", "oracle", "-", "-", oracle.total_distance, oracle.feasible ? "yes" : "no");
    note(o, buf);
    note(o, std::string("causality modes: ") +
                (causality["checked"].get<bool>() ? (causality_ok ? "identical minimizers" : "MINIMIZERS DIFFER") : "not checked"));
    note(o, agree ? "verdict: agree" : "verdict: DISAGREE");
    return agree ? kOk : kDisagree;
}

int cmd_gen(const Options& o) {
    GeneratorOptions g;
    g.vehicles = o.vehicles;
    g.requests = o.requests;
    g.capacity_min = o.capacity_min;
    g.capacity_max = o.capacity_max;
    g.max_passengers = o.max_passengers;
    g.box = o.box;
    RoutingInstance inst;
    try {
        inst = generate_instance(o.seed, g);
    } catch (const InstanceError& e) {
        throw InputError(e.what());
    }
    const auto text = serialize(inst);
    if (o.out.empty()) {
        std::cout << text << '\n';
    } else {
        write_file(o.out, text + "\n");
    }
    note(o, "generated " + inst.name);
    return kOk;
}

void add_model_flags(CLI::App* app, Options& o) {
    app->add_option("--instance", o.instance, "Instance JSON file")->required();
    app->add_option("--formulation", o.formulation, "node or edge")->check(CLI::IsMember({"node", "edge"}));
    app->add_flag("--capacity", o.capacity, "Add capacity slack constraints");
    app->add_flag("--no-presolve", o.no_presolve, "Keep structurally fixed variables");
    app->add_option("--causality", o.causality, "incentive or penalty")->check(CLI::IsMember({"incentive", "penalty"}));
    app->add_option("--lambda-location", o.lambda_location);
    app->add_option("--lambda-step", o.lambda_step);
    app->add_option("--lambda-incentive", o.lambda_incentive);
    app->add_option("--lambda-capacity", o.lambda_capacity);
    app->add_option("--limit", o.limit, "Largest model solved exhaustively");
    app->add_option("--seed", o.seed, "Random seed");
    app->add_flag("--quiet", o.quiet, "No summary on stderr");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QUBO models for ride pooling"};
    app.require_subcommand(1);
    Options o;

    auto* build = app.add_subcommand("build", "Build a QUBO and write it with its sidecar");
    add_model_flags(build, o);
    build->add_option("--out", o.out, "QUBO text file; the sidecar goes to <out>.json");

    auto* solve = app.add_subcommand("solve", "Build, solve, decode and validate");
    add_model_flags(solve, o);
    solve->add_option("--solver", o.solver, "exhaustive, sa or oracle")->check(CLI::IsMember({"exhaustive", "sa", "oracle"}));
    solve->add_option("--sweeps", o.sweeps);
    solve->add_option("--restarts", o.restarts);
    solve->add_option("--threads", o.threads, "SA worker threads (0: all cores)");

    auto* compare = app.add_subcommand("compare", "Node vs edge formulation and causality modes");
    add_model_flags(compare, o);
    compare->add_option("--sweeps", o.sweeps);
    compare->add_option("--restarts", o.restarts);

    auto* gen = app.add_subcommand("gen", "Generate a random instance");
    gen->add_option("--seed", o.seed);
    gen->add_option("--vehicles", o.vehicles);
    gen->add_option("--requests", o.requests);
    gen->add_option("--capacity-min", o.capacity_min);
    gen->add_option("--capacity-max", o.capacity_max);
    gen->add_option("--max-passengers", o.max_passengers);
    gen->add_option("--box", o.box);
    gen->add_option("--out", o.out);
    gen->add_flag("--quiet", o.quiet);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*build) return cmd_build(o);
        if (*solve) return cmd_solve(o);
        if (*compare) return cmd_compare(o);
        if (*gen) return cmd_gen(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const SizeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const InstanceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kInternal;
}
