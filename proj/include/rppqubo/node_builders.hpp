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

#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rppqubo/errors.hpp"
#include "rppqubo/instance.hpp"
#include "rppqubo/qubo.hpp"

namespace rppqubo {

// ---------------------------------------------------------------------------
// Traveling salesperson

/// Weighted directed graph for a single tour. `adjacent[v][k]` marks arc v -> k as usable.
struct TspGraph {
    DistanceMatrix weights;
    std::vector<std::vector<bool>> adjacent;

    int size() const { return weights.size(); }

    static TspGraph complete(DistanceMatrix w) {
        const int n = w.size();
        TspGraph g{std::move(w), std::vector<std::vector<bool>>(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), true))};
        for (int v = 0; v < n; ++v) g.adjacent[static_cast<std::size_t>(v)][static_cast<std::size_t>(v)] = false;
        return g;
    }

    bool is_complete() const {
        for (int v = 0; v < size(); ++v) {
            for (int k = 0; k < size(); ++k) {
                if (v != k && !adjacent[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)]) return false;
            }
        }
        return true;
    }
};

/// Cyclic tour model over n^2 variables TspVar(v, i), i in 0..n-1, step n wraps to 0.
inline QuboModel build_tsp(const TspGraph& graph, std::optional<PenaltyConfig> penalty = std::nullopt) {
    const int n = graph.size();
    if (n < 3) throw InstanceError("a tour needs at least 3 nodes");
    if (static_cast<int>(graph.adjacent.size()) != n) throw InstanceError("adjacency matrix size mismatch");
    const PenaltyConfig pen = penalty.value_or(PenaltyConfig::defaults_for(n));
    pen.validate();

    double max_w = 0.0;
    for (int v = 0; v < n; ++v) {
        for (int k = 0; k < n; ++k) {
            if (v != k && graph.adjacent[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)]) max_w = std::max(max_w, graph.weights(v, k));
        }
    }
    const double W = max_w + (max_w > 0.0 ? 1e-6 * max_w : 1e-6);

    QuboModel m;
    for (int i = 0; i < n; ++i) {
        for (int v = 0; v < n; ++v) m.add_variable(TspVar{v, i});
    }
    auto x = [&](int v, int i) { return m.index_of(TspVar{v, i % n}); };

    for (int v = 0; v < n; ++v) {
        for (int k = 0; k < n; ++k) {
            if (v == k) continue;
            const bool edge = graph.adjacent[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)];
            for (int i = 0; i < n; ++i) {
                if (edge) {
                    m.add_quadratic(x(v, i), x(k, i + 1), graph.weights(v, k) / W, Family::objective);
                } else {
                    m.add_quadratic(x(v, i), x(k, i + 1), pen.lambda_nonedge, Family::nonedge);
                }
            }
        }
    }
    for (int v = 0; v < n; ++v) {
        std::vector<int> vars;
        for (int i = 0; i < n; ++i) vars.push_back(x(v, i));
        add_one_hot(m, vars, pen.lambda_location, Family::location_onehot);
    }
    for (int i = 0; i < n; ++i) {
        std::vector<int> vars;
        for (int v = 0; v < n; ++v) vars.push_back(x(v, i));
        add_one_hot(m, vars, pen.lambda_step, Family::step_onehot);
    }
    m.compact();
    return m;
}

// ---------------------------------------------------------------------------
// Vehicle routing with one shared depot

/// Depot first, then every request endpoint in request order.
inline std::vector<int> vrp_nodes(const RoutingInstance& inst) {
    if (inst.vehicles.empty()) throw InstanceError("routing instance has no vehicles");
    const int depot = inst.vehicles.front().start;
    for (const auto& v : inst.vehicles) {
        if (v.start != depot) throw InstanceError("vehicles start at different locations; use build_rpp instead");
    }
    std::vector<int> nodes{depot};
    for (int l : inst.shared_locations()) nodes.push_back(l);
    return nodes;
}

/// Per-vehicle cyclic tours over steps 0..n (n = non-depot locations) with
/// variables NodeVar(a, location, step).
inline QuboModel build_vrp(const RoutingInstance& inst, std::optional<PenaltyConfig> penalty = std::nullopt) {
    const auto nodes = vrp_nodes(inst);
    const int steps = static_cast<int>(nodes.size());  // n + 1
    const PenaltyConfig pen = penalty.value_or(PenaltyConfig::defaults_for(steps));
    pen.validate();
    const double W = normalization_factor(inst.distances);

    QuboModel m;
    for (int a = 0; a < inst.num_vehicles(); ++a) {
        for (int s = 0; s < steps; ++s) {
            for (int v : nodes) m.add_variable(NodeVar{a, v, s});
        }
    }
    auto x = [&](int a, int v, int s) { return m.index_of(NodeVar{a, v, s % steps}); };

    for (int a = 0; a < inst.num_vehicles(); ++a) {
        for (int v : nodes) {
            for (int k : nodes) {
                if (v == k) continue;
                for (int s = 0; s < steps; ++s) {
                    m.add_quadratic(x(a, v, s), x(a, k, s + 1), inst.distances(v, k) / W, Family::objective);
                }
            }
        }
    }
    for (std::size_t p = 1; p < nodes.size(); ++p) {
        std::vector<int> vars;
        for (int a = 0; a < inst.num_vehicles(); ++a) {
            for (int s = 0; s < steps; ++s) vars.push_back(x(a, nodes[p], s));
        }
        add_one_hot(m, vars, pen.lambda_location, Family::location_onehot);
    }
    for (int a = 0; a < inst.num_vehicles(); ++a) {
        for (int s = 0; s < steps; ++s) {
            std::vector<int> vars;
            for (int v : nodes) vars.push_back(x(a, v, s));
            add_one_hot(m, vars, pen.lambda_step, Family::step_onehot);
        }
    }
    m.compact();
    return m;
}

// ---------------------------------------------------------------------------
// Ride pooling, node-based

enum class CausalityMode : std::uint8_t { incentive, penalty };

inline std::string_view to_string(CausalityMode m) { return m == CausalityMode::incentive ? "incentive" : "penalty"; }

struct BuildOptions {
    bool with_capacity = false;
    bool with_presolve = false;
    CausalityMode causality = CausalityMode::incentive;
    // Defaults to PenaltyConfig::defaults_for(2C + 1).
    std::optional<PenaltyConfig> penalty;
    // Penalize lambda_step * (1 - x[a, d_a, 1])^2. Without it the first stop of
    // a path is free, since no distance term leads into step 1.
    bool anchor_start = true;
};

inline PenaltyConfig resolve_penalty(const RoutingInstance& inst, const BuildOptions& opts) {
    const PenaltyConfig pen = opts.penalty.value_or(PenaltyConfig::defaults_for(inst.path_length()));
    pen.validate();
    if (opts.causality == CausalityMode::incentive && !(pen.lambda_location > 1.5 * pen.lambda_incentive)) {
        // Visiting a pickup and its drop-off twice earns 3 incentives for 2 location penalties.
        throw DomainError("incentive mode needs lambda_location > 1.5 * lambda_incentive");
    }
    return pen;
}

/// Locations a vehicle may occupy: its own start, then every request endpoint.
inline std::vector<int> vehicle_locations(const RoutingInstance& inst, int vehicle) {
    std::vector<int> out{inst.vehicles[static_cast<std::size_t>(vehicle)].start};
    for (int l : inst.shared_locations()) out.push_back(l);
    return out;
}

namespace detail {

inline void add_rpp_causality(QuboModel& m, const RoutingInstance& inst, const PenaltyConfig& pen, CausalityMode mode) {
    const int A = inst.num_vehicles();
    const int S = inst.path_length();
    for (const auto& r : inst.requests) {
        for (int a1 = 0; a1 < A; ++a1) {
            for (int a2 = 0; a2 < A; ++a2) {
                for (int b1 = 1; b1 <= S; ++b1) {
                    for (int b2 = 1; b2 <= S; ++b2) {
                        const int xs = m.index_of(NodeVar{a1, r.pickup, b1});
                        const int xf = m.index_of(NodeVar{a2, r.dropoff, b2});
                        const bool ordered = a1 == a2 && b1 < b2;
                        if (mode == CausalityMode::incentive) {
                            if (ordered) m.add_quadratic(xs, xf, -pen.lambda_incentive, Family::incentive);
                        } else if (!ordered) {
                            m.add_quadratic(xs, xf, pen.lambda_incentive, Family::causality_penalty);
                        }
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Adds, per vehicle and step, lambda * (load after step - sum of that step's
/// unary slacks)^2 where the load is the prefix sum of signed passenger counts.
/// Registers SlackVar(a, step, c) for c in 1..capacity.
inline void add_capacity_constraints(QuboModel& m, const RoutingInstance& inst, double lambda_capacity) {
    if (!(lambda_capacity > 0.0)) throw DomainError("lambda_capacity must be positive");
    const int S = inst.path_length();
    const auto shared = inst.shared_locations();
    for (int a = 0; a < inst.num_vehicles(); ++a) {
        const int cap = inst.vehicles[static_cast<std::size_t>(a)].capacity;
        for (int b = 1; b <= S; ++b) {
            for (int c = 1; c <= cap; ++c) m.add_variable(SlackVar{a, b, c});
        }
    }
    for (int a = 0; a < inst.num_vehicles(); ++a) {
        const int cap = inst.vehicles[static_cast<std::size_t>(a)].capacity;
        for (int b = 1; b <= S; ++b) {
            std::vector<std::pair<int, double>> expr;
            for (int j = 1; j <= b; ++j) {
                for (int l : shared) {
                    expr.emplace_back(m.index_of(NodeVar{a, l, j}), static_cast<double>(inst.passenger_delta(l)));
                }
            }
            for (int c = 1; c <= cap; ++c) expr.emplace_back(m.index_of(SlackVar{a, b, c}), -1.0);
            add_squared_linear(m, expr, 0.0, lambda_capacity, Family::capacity);
        }
    }
}

/// Structural fixings: every path begins at its start, cannot reach a drop-off
/// at step 2 and cannot end at a pickup. Keys absent from the model are skipped.
inline std::vector<std::pair<VariableKey, std::uint8_t>> presolve_fixings(const QuboModel& m, const RoutingInstance& inst) {
    const int S = inst.path_length();
    std::vector<std::pair<VariableKey, std::uint8_t>> out;
    auto fix = [&](NodeVar k, std::uint8_t v) {
        if (m.contains(k)) out.emplace_back(k, v);
    };
    for (int a = 0; a < inst.num_vehicles(); ++a) {
        fix({a, inst.vehicles[static_cast<std::size_t>(a)].start, 1}, 1);
        for (int l : inst.shared_locations()) fix({a, l, 1}, 0);
        for (const auto& r : inst.requests) {
            if (S >= 2) fix({a, r.dropoff, 2}, 0);
            fix({a, r.pickup, S}, 0);
        }
    }
    return out;
}

inline QuboModel apply_presolve_fixings(const QuboModel& m, const RoutingInstance& inst) {
    return fix_variables(m, presolve_fixings(m, inst));
}

/// Node-based ride-pooling model: location one-hots, step one-hots with a
/// half-hot last step, causality (incentive or complementary penalty),
/// normalized distance, and optionally capacity slacks and presolve fixings.
inline QuboModel build_rpp(const RoutingInstance& inst, const BuildOptions& opts = {}) {
    const PenaltyConfig pen = resolve_penalty(inst, opts);
    const int A = inst.num_vehicles();
    const int S = inst.path_length();
    const auto shared = inst.shared_locations();

    QuboModel m;
    for (int a = 0; a < A; ++a) {
        const int start = inst.vehicles[static_cast<std::size_t>(a)].start;
        for (int b = 1; b <= S; ++b) {
            for (int l : vehicle_locations(inst, a)) {
                if (l == start && b == S) continue;
                m.add_variable(NodeVar{a, l, b});
            }
        }
    }
    if (inst.num_requests() == 0) {
        if (opts.with_capacity) add_capacity_constraints(m, inst, pen.lambda_capacity);
        return m;
    }
    const double W = normalization_factor(inst.distances);
    auto x = [&](int a, int l, int b) { return m.index_of(NodeVar{a, l, b}); };

    for (int l : shared) {
        std::vector<int> vars;
        for (int a = 0; a < A; ++a) {
            for (int b = 1; b <= S; ++b) vars.push_back(x(a, l, b));
        }
        add_one_hot(m, vars, pen.lambda_location, Family::location_onehot);
    }

    for (int a = 0; a < A; ++a) {
        for (int b = 1; b < S; ++b) {
            std::vector<int> vars;
            for (int l : vehicle_locations(inst, a)) vars.push_back(x(a, l, b));
            add_one_hot(m, vars, pen.lambda_step, Family::step_onehot);
        }
        std::vector<int> last;
        for (int l : shared) last.push_back(x(a, l, S));
        add_half_hot(m, last, pen.lambda_step, Family::half_hot);

        if (opts.anchor_start) {
            const int start = inst.vehicles[static_cast<std::size_t>(a)].start;
            add_squared_linear(m, {{x(a, start, 1), -1.0}}, 1.0, pen.lambda_step, Family::start_anchor);
        }
    }

    detail::add_rpp_causality(m, inst, pen, opts.causality);

    for (int a = 0; a < A; ++a) {
        const int start = inst.vehicles[static_cast<std::size_t>(a)].start;
        for (int b = 1; b < S; ++b) {
            for (int from : vehicle_locations(inst, a)) {
                for (int to : shared) {
                    if (from == to) continue;
                    m.add_quadratic(x(a, from, b), x(a, to, b + 1), inst.distances(from, to) / W, Family::objective);
                }
            }
        }
        // Returning to the start; there is no start variable at the last step.
        for (int b = 1; b + 1 < S; ++b) {
            for (int l : shared) {
                m.add_quadratic(x(a, l, b), x(a, start, b + 1), inst.distances(l, start) / W, Family::objective);
            }
        }
    }

    if (opts.with_capacity) add_capacity_constraints(m, inst, pen.lambda_capacity);
    m.compact();
    if (opts.with_presolve) return apply_presolve_fixings(m, inst);
    return m;
}

// ---------------------------------------------------------------------------
// Variable counts

enum class Formulation : std::uint8_t { node, node_capacity, edge };

/// Exact registry sizes before any fixing.
///   node:          A ((2C+1)^2 - 1)
///   node+capacity: node + sum_a capacity_a (2C+1)
///   edge:          A (2C+1) (2C) (2C)
inline long long count_variables(int vehicles, int requests, const std::vector<int>& capacities, Formulation f) {
    if (vehicles < 0 || requests < 0) throw DomainError("counts must be non-negative");
    const long long A = vehicles;
    const long long S = 2LL * requests + 1;
    switch (f) {
        case Formulation::node:
            return A * (S * S - 1);
        case Formulation::node_capacity: {
            if (static_cast<long long>(capacities.size()) != A) throw DimensionError("one capacity per vehicle expected");
            const long long total = std::accumulate(capacities.begin(), capacities.end(), 0LL);
            return A * (S * S - 1) + total * S;
        }
        case Formulation::edge:
            return A * S * (S - 1) * (S - 1);
    }
    return 0;
}

inline long long count_variables(const RoutingInstance& inst, Formulation f) {
    std::vector<int> caps;
    for (const auto& v : inst.vehicles) caps.push_back(v.capacity);
    return count_variables(inst.num_vehicles(), inst.num_requests(), caps, f);
}

}  // namespace rppqubo
