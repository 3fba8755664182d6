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

#include <catch_amalgamated.hpp>

#include <random>

#include "properties.hpp"

using namespace rppqubo;
using namespace testing_support;
using Catch::Approx;

namespace {

Assignment node_bits(const QuboModel& m, const std::vector<NodeVar>& ones) {
    Assignment a(static_cast<std::size_t>(m.num_variables()), 0);
    for (const auto& k : ones) a[static_cast<std::size_t>(m.index_of(k))] = 1;
    return a;
}

DecodedSolution from_routes(std::vector<std::vector<int>> routes) {
    DecodedSolution s;
    s.routes = std::move(routes);
    return s;
}

}  // namespace

TEST_CASE("TINY-1 optimum decodes to d, s, f", "[decode]") {
    const auto inst = tiny_instance();
    const auto m = build_rpp(inst, {.with_presolve = true});
    const auto sol = decode_node(solve_exhaustive(m).best_assignment, m, inst);
    CHECK(sol.feasible);
    CHECK(sol.total_distance == 2.0);
    CHECK(sol.routes == std::vector<std::vector<int>>{{0, 1, 2}});
    const auto j = to_json(sol, inst);
    CHECK(j["routes"]["v1"] == nlohmann::json::array({"d", "s", "f"}));
}

TEST_CASE("split request", "[decode]") {
    const auto inst = desk_instance(2, 2, 1);
    const auto m = build_rpp(inst);
    const int d1 = inst.vehicles[0].start, d2 = inst.vehicles[1].start;
    const int s = inst.requests[0].pickup, f = inst.requests[0].dropoff;
    const auto a = node_bits(m, {{0, d1, 1}, {0, d1, 2}, {0, s, 3}, {1, d2, 1}, {1, d2, 2}, {1, f, 3}});
    const auto sol = decode_node(a, m, inst);
    CHECK_FALSE(sol.feasible);
    REQUIRE(sol.has(ViolationKind::causality));
    bool split = false;
    for (const auto& v : sol.violations) split |= v.detail.find("split request") != std::string::npos;
    CHECK(split);
}

TEST_CASE("all-zero assignment", "[decode]") {
    const auto inst = desk_instance(3, 1, 2);
    const auto m = build_rpp(inst);
    const auto sol = decode_node(Assignment(static_cast<std::size_t>(m.num_variables()), 0), m, inst);
    CHECK(sol.total_distance == 0.0);
    int loc = 0;
    for (const auto& v : sol.violations) loc += v.kind == ViolationKind::location_multiplicity;
    CHECK(loc == 4);
}

TEST_CASE("check_feasibility on routes", "[validate]") {
    const auto inst = tiny_instance();
    CHECK(check_feasibility(from_routes({{0, 1, 2}}), inst).empty());
    const auto back = check_feasibility(from_routes({{0, 2, 1}}), inst);
    // Dropping off first also drives the load negative.
    REQUIRE(back.size() == 2);
    CHECK(back[0].kind == ViolationKind::causality);
    CHECK(back[1].kind == ViolationKind::capacity);
    CHECK(check_feasibility(from_routes({{0, 2, 1}}), inst, {.capacity = false}).size() == 1);

    auto tight = desk_instance(4, 1, 2, 1, 1);
    const auto s1 = tight.requests[0].pickup, f1 = tight.requests[0].dropoff;
    const auto s2 = tight.requests[1].pickup, f2 = tight.requests[1].dropoff;
    const auto v = check_feasibility(from_routes({{tight.vehicles[0].start, s1, s2, f1, f2}}), tight);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::capacity);
    CHECK(v[0].detail.find("2 > 1") != std::string::npos);
    CHECK(v[0].detail.find("at step 3") != std::string::npos);
    CHECK(check_feasibility(from_routes({{tight.vehicles[0].start, s1, s2, f1, f2}}), tight, {.capacity = false}).empty());
    CHECK(check_feasibility(from_routes({{1, 0, 2}}), inst).front().kind == ViolationKind::chain_break);
}

TEST_CASE("oracle output validates", "[validate][property]") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = generate_instance(seed, {.vehicles = 1 + static_cast<int>(seed % 3), .requests = 1 + static_cast<int>(seed % 3),
                                                   .capacity_min = 1, .capacity_max = 3});
        const auto o = routing_oracle(inst);
        CHECK(o.feasible);
        CHECK(check_feasibility(o, inst).empty());
        CHECK(route_distance(inst, o.routes) == Approx(o.total_distance));
    }
}

TEST_CASE("energy decomposition", "[decode]") {
    const auto inst = tiny_instance();
    const auto m = build_rpp(inst);
    const auto pen = PenaltyConfig::defaults_for(3);
    const auto best = solve_exhaustive(m).best_assignment;
    const auto br = energy_decomposition(m, best);
    CHECK(br[Family::incentive] == -pen.lambda_incentive);
    CHECK(br[Family::half_hot] == pen.lambda_step);
    std::mt19937_64 rng(41);
    const auto big = build_rpp(desk_instance(5, 2, 2, 2, 2), {.with_capacity = true});
    for (int t = 0; t < 200; ++t) {
        const auto a = random_bits(rng, big.num_variables());
        const auto b = energy_decomposition(big, a);
        double sum = 0.0;
        for (const auto& [f, e] : b.families) sum += e;
        CHECK(sum == Approx(b.total).margin(1e-9));
    }
    CHECK(to_json(br)["families"].contains("half-hot"));
}

TEST_CASE("encode and decode round trip on oracle routes", "[decode][property]") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = generate_instance(seed, {.vehicles = 1 + static_cast<int>(seed % 3), .requests = 1 + static_cast<int>(seed % 2),
                                                   .capacity_min = 1, .capacity_max = 3});
        const auto m = build_rpp(inst, {.with_capacity = true, .with_presolve = seed % 2 == 0});
        const auto o = routing_oracle(inst);
        const auto sol = decode_node(encode_node(o.routes, m, inst), m, inst);
        CHECK(sol.feasible);
        CHECK(sol.slack_consistent);
        CHECK(sol.routes == o.routes);
        CHECK(sol.total_distance == Approx(o.total_distance));
    }
}

TEST_CASE("inconsistent slacks are flagged", "[decode]") {
    const auto inst = tiny_instance();
    const auto m = build_rpp(inst, {.with_capacity = true});
    auto a = encode_node({{0, 1, 2}}, m, inst);
    CHECK(decode_node(a, m, inst).slack_consistent);
    a[static_cast<std::size_t>(m.index_of(SlackVar{0, 1, 3}))] = 1;
    const auto sol = decode_node(a, m, inst);
    CHECK(sol.feasible);
    CHECK_FALSE(sol.slack_consistent);
    CHECK(energy_decomposition(m, a)[Family::capacity] > 0.0);
}
