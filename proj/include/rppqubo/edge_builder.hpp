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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "rppqubo/decode.hpp"
#include "rppqubo/instance.hpp"
#include "rppqubo/node_builders.hpp"
#include "rppqubo/qubo.hpp"

namespace rppqubo {

/// Arcs entering (`source`) and leaving (`target`) each location for one
/// vehicle on the complete instance graph: arcs start at the vehicle's own
/// start or a request endpoint and always end at a request endpoint.
struct ArcIndex {
    std::vector<std::vector<int>> source;
    std::vector<std::vector<int>> target;
};

inline ArcIndex arc_index(const RoutingInstance& inst, int vehicle) {
    const auto from = vehicle_locations(inst, vehicle);
    const auto to = inst.shared_locations();
    ArcIndex idx;
    idx.source.resize(inst.locations.size());
    idx.target.resize(inst.locations.size());
    for (int i : from) {
        for (int j : to) {
            if (i == j) continue;
            idx.target[static_cast<std::size_t>(i)].push_back(j);
            idx.source[static_cast<std::size_t>(j)].push_back(i);
        }
    }
    return idx;
}

struct EdgeOptions {
    // Defaults to PenaltyConfig::defaults_for(2C + 1).
    std::optional<PenaltyConfig> penalty;
    // Fix self-loops and first-step arcs not leaving the start to 0.
    bool prune = true;
};

/// Fixings that remove inert or unreachable arc variables: self-loops (they
/// appear in no constraint) and step-1 arcs that do not leave the vehicle's start.
inline std::vector<std::pair<VariableKey, std::uint8_t>> edge_pruning(const QuboModel& m, const RoutingInstance& inst) {
    std::vector<std::pair<VariableKey, std::uint8_t>> out;
    for (const auto& key : m.keys()) {
        const auto* e = std::get_if<EdgeVar>(&key);
        if (!e) continue;
        const int start = inst.vehicles[static_cast<std::size_t>(e->vehicle)].start;
        if (e->from == e->to || (e->step == 1 && e->from != start)) out.emplace_back(key, 0);
    }
    return out;
}

/// Edge-based ride-pooling model over EdgeVar(a, i, j, step) for i in the
/// vehicle's locations, j a request endpoint, step in 1..S-1.
///
/// Terms: linear normalized distances; one-hot entering and leaving each
/// pickup, entering each drop-off and leaving each start; and the causality
/// binomials
///     sum_{b1 < b2 <= b3} [ sum_{i in src(s)} sum_{j in tgt(s)} (x[i,s,b1] + x[s,j,b2])
///                           - 2 sum_{i in src(f)} x[i,f,b3] ]^2
/// with the double sum fully expanded, so the pickup terms are weighted
/// by |tgt(s)| and |src(s)|.
inline QuboModel build_rpp_edge(const RoutingInstance& inst, const EdgeOptions& opts = {}) {
    const PenaltyConfig pen = opts.penalty.value_or(PenaltyConfig::defaults_for(inst.path_length()));
    pen.validate();
    const int A = inst.num_vehicles();
    const int S = inst.path_length();
    const auto shared = inst.shared_locations();

    QuboModel m;
    for (int a = 0; a < A; ++a) {
        for (int b = 1; b < S; ++b) {
            for (int i : vehicle_locations(inst, a)) {
                for (int j : shared) m.add_variable(EdgeVar{a, i, j, b});
            }
        }
    }
    if (inst.num_requests() == 0) return m;
    const double W = normalization_factor(inst.distances);
    auto x = [&](int a, int i, int j, int b) { return m.index_of(EdgeVar{a, i, j, b}); };

    for (int a = 0; a < A; ++a) {
        for (int b = 1; b < S; ++b) {
            for (int i : vehicle_locations(inst, a)) {
                for (int j : shared) {
                    if (i != j) m.add_linear(x(a, i, j, b), inst.distances(i, j) / W, Family::objective);
                }
            }
        }
    }

    std::vector<ArcIndex> arcs;
    for (int a = 0; a < A; ++a) arcs.push_back(arc_index(inst, a));

    auto entering = [&](int l) {
        std::vector<int> vars;
        for (int a = 0; a < A; ++a) {
            for (int b = 1; b < S; ++b) {
                for (int i : arcs[static_cast<std::size_t>(a)].source[static_cast<std::size_t>(l)]) vars.push_back(x(a, i, l, b));
            }
        }
        return vars;
    };
    auto leaving = [&](int l, int first_vehicle, int last_vehicle) {
        std::vector<int> vars;
        for (int a = first_vehicle; a < last_vehicle; ++a) {
            for (int b = 1; b < S; ++b) {
                for (int j : arcs[static_cast<std::size_t>(a)].target[static_cast<std::size_t>(l)]) vars.push_back(x(a, l, j, b));
            }
        }
        return vars;
    };

    for (const auto& r : inst.requests) {
        add_one_hot(m, entering(r.pickup), pen.lambda_location, Family::edge_pickup_enter);
        add_one_hot(m, leaving(r.pickup, 0, A), pen.lambda_location, Family::edge_pickup_leave);
    }
    for (const auto& r : inst.requests) add_one_hot(m, entering(r.dropoff), pen.lambda_location, Family::edge_dropoff);
    for (int a = 0; a < A; ++a) {
        add_one_hot(m, leaving(inst.vehicles[static_cast<std::size_t>(a)].start, a, a + 1), pen.lambda_step, Family::edge_start);
    }

    for (int a = 0; a < A; ++a) {
        const auto& arc = arcs[static_cast<std::size_t>(a)];
        for (const auto& r : inst.requests) {
            const auto& src_s = arc.source[static_cast<std::size_t>(r.pickup)];
            const auto& tgt_s = arc.target[static_cast<std::size_t>(r.pickup)];
            const auto& src_f = arc.source[static_cast<std::size_t>(r.dropoff)];
            for (int b1 = 1; b1 < S; ++b1) {
                for (int b2 = b1 + 1; b2 < S; ++b2) {
                    for (int b3 = b2; b3 < S; ++b3) {
                        std::vector<std::pair<int, double>> expr;
                        for (int i : src_s) {
                            for (int j : tgt_s) {
                                expr.emplace_back(x(a, i, r.pickup, b1), 1.0);
                                expr.emplace_back(x(a, r.pickup, j, b2), 1.0);
                            }
                        }
                        for (int i : src_f) expr.emplace_back(x(a, i, r.dropoff, b3), -2.0);
                        add_squared_linear(m, expr, 0.0, pen.lambda_incentive, Family::edge_causality);
                    }
                }
            }
        }
    }
    m.compact();
    if (opts.prune) return fix_variables(m, edge_pruning(m, inst));
    return m;
}

/// Chains each vehicle's arcs in step order into a path from its start.
inline DecodedSolution decode_edge(std::span<const std::uint8_t> bits, const QuboModel& model, const RoutingInstance& inst) {
    const auto full = full_assignment(model, bits);
    const int A = inst.num_vehicles();
    DecodedSolution sol;
    sol.routes.resize(static_cast<std::size_t>(A));

    std::vector<std::vector<EdgeVar>> used(static_cast<std::size_t>(A));
    for (const auto& [key, v] : full) {
        const auto* e = std::get_if<EdgeVar>(&key);
        if (e && v) used[static_cast<std::size_t>(e->vehicle)].push_back(*e);
    }
    std::vector<Violation> chain;
    for (int a = 0; a < A; ++a) {
        const auto& veh = inst.vehicles[static_cast<std::size_t>(a)];
        auto& arcs = used[static_cast<std::size_t>(a)];
        std::sort(arcs.begin(), arcs.end(), [](const EdgeVar& l, const EdgeVar& r) {
            return std::tie(l.step, l.from, l.to) < std::tie(r.step, r.from, r.to);
        });
        int leaves_start = 0;
        for (const auto& e : arcs) {
            leaves_start += e.from == veh.start;
            sol.total_distance += inst.distances(e.from, e.to);
        }
        if (leaves_start == 0) {
            chain.push_back({ViolationKind::chain_break, "vehicle " + veh.id + ": start never left"});
        } else if (leaves_start > 1) {
            chain.push_back({ViolationKind::chain_break, "vehicle " + veh.id + ": start left more than once"});
        }
        for (std::size_t k = 1; k < arcs.size(); ++k) {
            if (arcs[k].step == arcs[k - 1].step) {
                chain.push_back({ViolationKind::step_multiplicity,
                                 "vehicle " + veh.id + ": multiple arcs per step (step " + std::to_string(arcs[k].step) + ")"});
            }
        }
        auto& route = sol.routes[static_cast<std::size_t>(a)];
        route.push_back(veh.start);
        for (const auto& e : arcs) {
            if (e.from == e.to) {
                chain.push_back({ViolationKind::chain_break, "vehicle " + veh.id + ": self loop at step " + std::to_string(e.step)});
                continue;
            }
            if (e.from != route.back()) {
                chain.push_back({ViolationKind::chain_break, "vehicle " + veh.id + ": arc at step " + std::to_string(e.step) +
                                                                 " leaves " + inst.locations[static_cast<std::size_t>(e.from)].id +
                                                                 " instead of " + inst.locations[static_cast<std::size_t>(route.back())].id});
            }
            route.push_back(e.to);
        }
    }
    sol.violations = chain;
    for (auto& v : check_feasibility(sol, inst, {.capacity = false})) sol.violations.push_back(std::move(v));
    sol.feasible = sol.violations.empty();
    return sol;
}

}  // namespace rppqubo
