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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rppqubo/errors.hpp"
#include "rppqubo/instance.hpp"
#include "rppqubo/node_builders.hpp"
#include "rppqubo/qubo.hpp"

namespace rppqubo {

enum class ViolationKind : std::uint8_t { location_multiplicity, step_multiplicity, causality, capacity, chain_break };

inline std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::location_multiplicity: return "location-multiplicity";
        case ViolationKind::step_multiplicity: return "step-multiplicity";
        case ViolationKind::causality: return "causality";
        case ViolationKind::capacity: return "capacity";
        case ViolationKind::chain_break: return "chain-break";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    std::string detail;
};

/// Routes of a decoded assignment (or of a directly computed solution).
struct DecodedSolution {
    // Per vehicle: location indices in visiting order, beginning at the start;
    // consecutive stays at the start are collapsed.
    std::vector<std::vector<int>> routes;
    // Node-based decodes only: per vehicle, per step, every location whose bit is set.
    std::vector<std::vector<std::vector<int>>> trace;
    // Raw (unnormalized) distance.
    double total_distance = 0.0;
    bool feasible = false;
    std::vector<Violation> violations;
    // Capacity models: every step's slack units add up to the vehicle's load.
    bool slack_consistent = true;

    bool has(ViolationKind k) const {
        return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
    }
};

struct ValidationOptions {
    bool capacity = true;
};

inline double route_distance(const RoutingInstance& inst, const std::vector<std::vector<int>>& routes) {
    double d = 0.0;
    for (const auto& r : routes) {
        for (std::size_t k = 1; k < r.size(); ++k) d += inst.distances(r[k - 1], r[k]);
    }
    return d;
}

/// Re-derives every violation from the routes (and the step trace, when the
/// solution carries one). Works on any solution, decoded or not.
inline std::vector<Violation> check_feasibility(const DecodedSolution& sol, const RoutingInstance& inst,
                                                const ValidationOptions& opts = {}) {
    const int A = inst.num_vehicles();
    const int n = static_cast<int>(inst.locations.size());
    if (static_cast<int>(sol.routes.size()) != A) throw DimensionError("solution must have one route per vehicle");
    const bool use_trace = !sol.trace.empty();
    if (use_trace && static_cast<int>(sol.trace.size()) != A) throw DimensionError("trace must cover every vehicle");

    // (position, location) stops per vehicle.
    std::vector<std::vector<std::pair<int, int>>> stops(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
        auto check_loc = [n](int l) {
            if (l < 0 || l >= n) throw InstanceError("solution refers to unknown location " + std::to_string(l));
        };
        for (int l : sol.routes[static_cast<std::size_t>(a)]) check_loc(l);
        if (use_trace) {
            const auto& tr = sol.trace[static_cast<std::size_t>(a)];
            for (std::size_t b = 0; b < tr.size(); ++b) {
                for (int l : tr[b]) {
                    check_loc(l);
                    stops[static_cast<std::size_t>(a)].emplace_back(static_cast<int>(b) + 1, l);
                }
            }
        } else {
            const auto& r = sol.routes[static_cast<std::size_t>(a)];
            for (std::size_t k = 0; k < r.size(); ++k) stops[static_cast<std::size_t>(a)].emplace_back(static_cast<int>(k) + 1, r[k]);
        }
    }

    std::vector<Violation> out;
    const int S = inst.path_length();
    for (int a = 0; a < A; ++a) {
        const auto& veh = inst.vehicles[static_cast<std::size_t>(a)];
        const auto& r = sol.routes[static_cast<std::size_t>(a)];
        if (r.empty() || r.front() != veh.start) {
            out.push_back({ViolationKind::chain_break, "vehicle " + veh.id + " does not begin at its start location"});
        }
        for (int l : r) {
            if (inst.locations[static_cast<std::size_t>(l)].role == LocationRole::vehicle_start && l != veh.start) {
                out.push_back({ViolationKind::chain_break, "vehicle " + veh.id + " visits another vehicle's start"});
            }
        }
        if (use_trace) {
            const auto& tr = sol.trace[static_cast<std::size_t>(a)];
            for (std::size_t b = 0; b < tr.size(); ++b) {
                const int step = static_cast<int>(b) + 1;
                const auto count = tr[b].size();
                if ((step < S && count != 1) || count > 1) {
                    out.push_back({ViolationKind::step_multiplicity, "vehicle " + veh.id + " has " + std::to_string(count) +
                                                                         " locations at step " + std::to_string(step)});
                }
            }
        }
    }

    std::vector<int> visits(static_cast<std::size_t>(n), 0);
    for (const auto& st : stops) {
        for (const auto& [pos, l] : st) ++visits[static_cast<std::size_t>(l)];
    }
    for (int l : inst.shared_locations()) {
        if (visits[static_cast<std::size_t>(l)] != 1) {
            out.push_back({ViolationKind::location_multiplicity, "location " + inst.locations[static_cast<std::size_t>(l)].id +
                                                                     " visited " + std::to_string(visits[static_cast<std::size_t>(l)]) + " times"});
        }
    }

    for (std::size_t i = 0; i < inst.requests.size(); ++i) {
        const auto& req = inst.requests[i];
        bool served = false;
        bool on_pickup_vehicle = false;
        for (const auto& st : stops) {
            bool has_s = false;
            bool has_f = false;
            for (const auto& [p1, l1] : st) {
                has_s |= l1 == req.pickup;
                has_f |= l1 == req.dropoff;
                if (l1 != req.pickup) continue;
                for (const auto& [p2, l2] : st) served |= l2 == req.dropoff && p1 < p2;
            }
            on_pickup_vehicle |= has_s && has_f;
        }
        if (!served) {
            const std::string name = inst.locations[static_cast<std::size_t>(req.pickup)].id + "->" +
                                     inst.locations[static_cast<std::size_t>(req.dropoff)].id;
            out.push_back({ViolationKind::causality,
                           on_pickup_vehicle ? "request " + name + " drops off before picking up" : "split request " + name});
        }
    }

    if (opts.capacity) {
        for (int a = 0; a < A; ++a) {
            const auto& veh = inst.vehicles[static_cast<std::size_t>(a)];
            std::map<int, int> delta;
            for (const auto& [pos, l] : stops[static_cast<std::size_t>(a)]) delta[pos] += inst.passenger_delta(l);
            int load = 0;
            for (const auto& [pos, d] : delta) {
                load += d;
                if (load > veh.capacity) {
                    out.push_back({ViolationKind::capacity, "vehicle " + veh.id + " carries " + std::to_string(load) + " > " +
                                                                std::to_string(veh.capacity) + " at step " + std::to_string(pos)});
                } else if (load < 0) {
                    out.push_back({ViolationKind::capacity, "vehicle " + veh.id + " has negative load at step " + std::to_string(pos)});
                }
            }
        }
    }
    return out;
}

inline bool has_slack_variables(const QuboModel& m) {
    auto is_slack = [](const VariableKey& k) { return std::holds_alternative<SlackVar>(k); };
    return std::any_of(m.keys().begin(), m.keys().end(), is_slack) ||
           std::any_of(m.fixed().begin(), m.fixed().end(), [&](const auto& kv) { return is_slack(kv.first); });
}

/// Reads a node-based assignment back into per-vehicle paths and reports every
/// violated routing rule. Capacity is checked when the model has slack
/// variables unless `opts` says otherwise.
inline DecodedSolution decode_node(std::span<const std::uint8_t> bits, const QuboModel& model, const RoutingInstance& inst,
                                   std::optional<ValidationOptions> opts = std::nullopt) {
    const auto full = full_assignment(model, bits);
    auto value = [&](const VariableKey& k) -> int {
        auto it = full.find(k);
        return it == full.end() ? 0 : it->second;
    };
    const bool slacks = has_slack_variables(model);
    const bool check_capacity = opts ? opts->capacity : slacks;
    const int A = inst.num_vehicles();
    const int S = inst.path_length();
    const auto shared = inst.shared_locations();

    DecodedSolution sol;
    sol.routes.resize(static_cast<std::size_t>(A));
    sol.trace.resize(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
        const auto& veh = inst.vehicles[static_cast<std::size_t>(a)];
        auto& trace = sol.trace[static_cast<std::size_t>(a)];
        auto& route = sol.routes[static_cast<std::size_t>(a)];
        trace.resize(static_cast<std::size_t>(S));
        for (int b = 1; b <= S; ++b) {
            for (int l : vehicle_locations(inst, a)) {
                if (value(NodeVar{a, l, b})) trace[static_cast<std::size_t>(b - 1)].push_back(l);
            }
            for (int l : trace[static_cast<std::size_t>(b - 1)]) {
                if (l == veh.start && !route.empty() && route.back() == veh.start) continue;
                route.push_back(l);
            }
        }

        // Step counts straight from the bits.
        bool first_found = false;
        for (int b = 1; b <= S; ++b) {
            int count = 0;
            for (int l : vehicle_locations(inst, a)) {
                if (value(NodeVar{a, l, b})) {
                    if (!first_found && l != veh.start) {
                        sol.violations.push_back({ViolationKind::chain_break, "vehicle " + veh.id + " does not begin at its start location"});
                    }
                    first_found = true;
                    ++count;
                }
            }
            if ((b < S && count != 1) || count > 1) {
                sol.violations.push_back({ViolationKind::step_multiplicity,
                                          "vehicle " + veh.id + " has " + std::to_string(count) + " locations at step " + std::to_string(b)});
            }
        }
        if (!first_found) sol.violations.push_back({ViolationKind::chain_break, "vehicle " + veh.id + " has an empty path"});
    }

    for (int l : shared) {
        int count = 0;
        for (int a = 0; a < A; ++a) {
            for (int b = 1; b <= S; ++b) count += value(NodeVar{a, l, b});
        }
        if (count != 1) {
            sol.violations.push_back({ViolationKind::location_multiplicity,
                                      "location " + inst.locations[static_cast<std::size_t>(l)].id + " visited " + std::to_string(count) + " times"});
        }
    }

    for (const auto& req : inst.requests) {
        bool served = false;
        bool same_vehicle = false;
        for (int a = 0; a < A && !served; ++a) {
            bool any_s = false;
            bool any_f = false;
            for (int b1 = 1; b1 <= S; ++b1) {
                any_s |= value(NodeVar{a, req.pickup, b1}) != 0;
                any_f |= value(NodeVar{a, req.dropoff, b1}) != 0;
                if (!value(NodeVar{a, req.pickup, b1})) continue;
                for (int b2 = b1 + 1; b2 <= S; ++b2) served |= value(NodeVar{a, req.dropoff, b2}) != 0;
            }
            same_vehicle |= any_s && any_f;
        }
        if (!served) {
            const std::string name = inst.locations[static_cast<std::size_t>(req.pickup)].id + "->" +
                                     inst.locations[static_cast<std::size_t>(req.dropoff)].id;
            sol.violations.push_back({ViolationKind::causality,
                                      same_vehicle ? "request " + name + " drops off before picking up" : "split request " + name});
        }
    }

    for (int a = 0; a < A; ++a) {
        const auto& veh = inst.vehicles[static_cast<std::size_t>(a)];
        int load = 0;
        for (int b = 1; b <= S; ++b) {
            for (int l : shared) load += inst.passenger_delta(l) * value(NodeVar{a, l, b});
            if (check_capacity && load > veh.capacity) {
                sol.violations.push_back({ViolationKind::capacity, "vehicle " + veh.id + " carries " + std::to_string(load) + " > " +
                                                                       std::to_string(veh.capacity) + " at step " + std::to_string(b)});
            } else if (check_capacity && load < 0) {
                sol.violations.push_back({ViolationKind::capacity, "vehicle " + veh.id + " has negative load at step " + std::to_string(b)});
            }
            if (slacks) {
                int units = 0;
                for (int c = 1; c <= veh.capacity; ++c) units += value(SlackVar{a, b, c});
                if (units != load) sol.slack_consistent = false;
            }
        }
    }

    sol.total_distance = route_distance(inst, sol.routes);
    sol.feasible = sol.violations.empty();
    return sol;
}

/// Inverse of decode_node for feasible routes: each route is right-aligned so
/// it ends at the last step (or the one before, when it ends at the start),
/// with the vehicle waiting at its start beforehand. Slack units are filled
/// to match the load.
inline Assignment encode_node(const std::vector<std::vector<int>>& routes, const QuboModel& model, const RoutingInstance& inst) {
    const int A = inst.num_vehicles();
    const int S = inst.path_length();
    if (static_cast<int>(routes.size()) != A) throw DimensionError("one route per vehicle expected");
    std::map<VariableKey, std::uint8_t> want;
    for (int a = 0; a < A; ++a) {
        const auto& veh = inst.vehicles[static_cast<std::size_t>(a)];
        const auto& r = routes[static_cast<std::size_t>(a)];
        if (r.empty() || r.front() != veh.start) throw DomainError("route must begin at the vehicle's start");
        const int k = static_cast<int>(r.size());
        const int last = (r.back() == veh.start) ? S - 1 : S;
        const int pad = last - k;
        if (pad < 0) throw DomainError("route of vehicle " + veh.id + " does not fit in " + std::to_string(S) + " steps");
        std::vector<int> at(static_cast<std::size_t>(S), -1);
        for (int b = 1; b <= pad; ++b) at[static_cast<std::size_t>(b - 1)] = veh.start;
        for (int i = 0; i < k; ++i) at[static_cast<std::size_t>(pad + i)] = r[static_cast<std::size_t>(i)];
        int load = 0;
        for (int b = 1; b <= S; ++b) {
            const int l = at[static_cast<std::size_t>(b - 1)];
            if (l >= 0) {
                want[NodeVar{a, l, b}] = 1;
                load += inst.passenger_delta(l);
            }
            for (int c = 1; c <= veh.capacity; ++c) want[SlackVar{a, b, c}] = c <= load ? 1 : 0;
        }
    }
    auto desired = [&](const VariableKey& k) -> std::uint8_t {
        auto it = want.find(k);
        return it == want.end() ? 0 : it->second;
    };
    for (const auto& [k, v] : model.fixed()) {
        if (desired(k) != v) throw DomainError("routes conflict with fixed variable " + describe(k));
    }
    Assignment bits(static_cast<std::size_t>(model.num_variables()), 0);
    for (int i = 0; i < model.num_variables(); ++i) bits[static_cast<std::size_t>(i)] = desired(model.key(i));
    return bits;
}

// ---------------------------------------------------------------------------
// Energy decomposition

struct EnergyBreakdown {
    std::map<Family, double> families;
    double total = 0.0;

    double operator[](Family f) const {
        auto it = families.find(f);
        return it == families.end() ? 0.0 : it->second;
    }
};

inline EnergyBreakdown energy_decomposition(const QuboModel& model, std::span<const std::uint8_t> bits) {
    check_assignment(model, bits);
    EnergyBreakdown out;
    for (const auto& [family, t] : model.families()) out.families[family] = energy(t, bits);
    out.total = energy(model, bits);
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const DecodedSolution& sol, const RoutingInstance& inst) {
    using nlohmann::json;
    json routes = json::object();
    for (std::size_t a = 0; a < sol.routes.size(); ++a) {
        json r = json::array();
        for (int l : sol.routes[a]) r.push_back(inst.locations[static_cast<std::size_t>(l)].id);
        routes[inst.vehicles[a].id] = r;
    }
    json violations = json::array();
    for (const auto& v : sol.violations) violations.push_back({{"kind", to_string(v.kind)}, {"detail", v.detail}});
    return {{"feasible", sol.feasible},
            {"total_distance", sol.total_distance},
            {"routes", routes},
            {"violations", violations},
            {"slack_consistent", sol.slack_consistent}};
}

inline nlohmann::json to_json(const EnergyBreakdown& b) {
    nlohmann::json fam = nlohmann::json::object();
    for (const auto& [f, e] : b.families) fam[std::string(to_string(f))] = e;
    return {{"families", fam}, {"total", b.total}};
}

}  // namespace rppqubo
