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
#include <sstream>

#include "properties.hpp"

using namespace rppqubo;
using namespace testing_support;

TEST_CASE("text export layout", "[io]") {
    QuboModel m(3);
    m.add_linear(0, 1.5);
    m.add_quadratic(0, 2, -2.0);
    m.add_offset(0.25);
    const auto text = export_qubo(m);
    CHECK(text == "# offset 0.25\n3\n0 0 1.5\n0 2 -2\n");
}

TEST_CASE("export and import round trip", "[io][property]") {
    std::mt19937_64 rng(51);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const auto m = random_model(rng, n, 0.5);
        const auto back = import_qubo(export_qubo(m));
        REQUIRE(back.num_variables() == n);
        const auto a = random_bits(rng, n);
        CHECK(energy(back, a) == energy(m, a));
    }
}

TEST_CASE("import errors carry line numbers", "[io]") {
    CHECK_THROWS_WITH(import_qubo("# c\n2\n0 1\n"), Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(import_qubo("2\n1 0 1.0\n"), Catch::Matchers::ContainsSubstring("i <= j"));
    CHECK_THROWS_AS(import_qubo("2\n0 2 1.0\n"), InstanceError);
    CHECK_THROWS_AS(import_qubo("# nothing\n"), InstanceError);
}

TEST_CASE("sidecar contents", "[io]") {
    const auto inst = tiny_instance();
    const auto node = build_rpp(inst, {.with_presolve = true});
    const auto j = sidecar(node, "node", &inst);
    CHECK(j["num_free"] == 3);
    CHECK(j["variables"].size() == 3);
    CHECK(j["fixed"].size() == 5);
    CHECK(j["families"].contains("incentive"));
    CHECK(j["locations"] == nlohmann::json::array({"d", "s", "f"}));

    const auto edge = build_rpp_edge(inst);
    const auto e = sidecar(edge, "edge", &inst);
    CHECK(e["num_registered"] == 12);
    CHECK(e["formulation"] == "edge");
    CHECK(e["variables"][0]["key"].get<std::string>().rfind("edge[", 0) == 0);
}
