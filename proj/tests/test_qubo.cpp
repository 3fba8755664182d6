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

#include <cmath>
#include <random>

#include "support.hpp"

using namespace rppqubo;
using namespace testing_support;
using Catch::Approx;

TEST_CASE("energy of small models", "[qubo]") {
    QuboModel zero(3);
    zero.add_linear(0, 4.0);
    zero.add_quadratic(1, 2, -3.0);
    CHECK(energy(zero, Assignment{0, 0, 0}) == 0.0);

    QuboModel lin(1);
    lin.add_linear(0, 2.0);
    CHECK(energy(lin, Assignment{1}) == 2.0);

    QuboModel quad(2);
    quad.add_quadratic(0, 1, 1.0);
    quad.add_offset(0.25);
    CHECK(energy(quad, Assignment{1, 1}) == 1.25);

    CHECK_THROWS_AS(energy(quad, Assignment{1}), DimensionError);
}

TEST_CASE("registry is a bijection in registration order", "[qubo]") {
    QuboModel m;
    CHECK(m.add_variable(NodeVar{0, 1, 1}) == 0);
    CHECK(m.add_variable(SlackVar{0, 1, 1}) == 1);
    CHECK(m.add_variable(EdgeVar{0, 1, 2, 1}) == 2);
    CHECK(m.index_of(SlackVar{0, 1, 1}) == 1);
    CHECK(std::get<EdgeVar>(m.key(2)).to == 2);
    CHECK_THROWS_AS(m.add_variable(NodeVar{0, 1, 1}), RegistryError);
    CHECK_THROWS_AS(m.index_of(NodeVar{0, 9, 1}), RegistryError);
    CHECK_FALSE(m.find(TspVar{0, 0}).has_value());
    CHECK_THROWS_AS(m.add_linear(3, 1.0), RegistryError);
    CHECK(describe(NodeVar{1, 2, 3}) == "node[a=1,l=2,b=3]");
}

TEST_CASE("diagonal quadratic folds into linear and storage stays upper triangular", "[qubo]") {
    QuboModel m(3);
    m.add_quadratic(1, 1, 2.0);
    m.add_quadratic(2, 0, 1.5);
    CHECK(m.linear(1) == 2.0);
    CHECK(m.terms().quadratic.count({0, 2}) == 1);
    CHECK(m.quadratic(2, 0) == 1.5);
    m.add_quadratic(0, 2, -1.5);
    m.compact();
    CHECK(m.num_interactions() == 0);
    for (const auto& [ij, b] : m.terms().quadratic) CHECK(ij.first < ij.second);
}

TEST_CASE("family tags partition the energy", "[qubo]") {
    std::mt19937_64 rng(11);
    QuboModel m(6);
    std::uniform_real_distribution<double> c(-2, 2);
    for (int k = 0; k < 30; ++k) {
        const auto f = static_cast<Family>(k % 5);
        m.add_quadratic(static_cast<int>(rng() % 6), static_cast<int>(rng() % 6), c(rng), f);
        m.add_offset(c(rng), f);
    }
    for (int t = 0; t < 200; ++t) {
        const auto a = random_bits(rng, 6);
        const auto br = energy_decomposition(m, a);
        double sum = 0.0;
        for (const auto& [f, e] : br.families) sum += e;
        CHECK(sum == Approx(br.total).margin(1e-9));
    }
    CHECK(family_from_string("half-hot") == Family::half_hot);
    CHECK_THROWS(family_from_string("nope"));
}

TEST_CASE("energy is linear in the model", "[qubo][property]") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 10);
        auto a = random_model(rng, n);
        const auto b = random_model(rng, n);
        const auto bits = random_bits(rng, n);
        const double ea = energy(a, bits);
        const double eb = energy(b, bits);
        a.add_model(b);
        CHECK(energy(a, bits) == Approx(ea + eb).margin(1e-9));
    }
    QuboModel two(2);
    CHECK_THROWS_AS(two.add_model(QuboModel(3)), DimensionError);
}

TEST_CASE("one-hot contributions", "[qubo]") {
    QuboModel m(3);
    add_one_hot(m, {0, 1, 2}, 1.0, Family::location_onehot);
    CHECK(energy(m, Assignment{0, 1, 0}) == 0.0);
    CHECK(energy(m, Assignment{1, 1, 1}) == 4.0);
    CHECK(energy(m, Assignment{0, 0, 0}) == 1.0);
    CHECK_THROWS_AS(add_one_hot(m, {}, 1.0, Family::other), RegistryError);
}

TEST_CASE("half-hot contributions", "[qubo]") {
    QuboModel m(3);
    add_half_hot(m, {0, 1, 2}, 1.0, Family::half_hot);
    CHECK(energy(m, Assignment{0, 0, 0}) == 1.0);
    CHECK(energy(m, Assignment{0, 0, 1}) == 1.0);
    CHECK(energy(m, Assignment{1, 0, 1}) == 9.0);
}

TEST_CASE("one-hot and half-hot floors over all assignments", "[qubo][property]") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> lam(0.1, 10.0);
    int trials = 0;
    for (int t = 0; t < 40; ++t) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const double lambda = lam(rng);
        std::vector<int> vars(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) vars[static_cast<std::size_t>(i)] = i;
        QuboModel oh(n);
        add_one_hot(oh, vars, lambda, Family::location_onehot);
        QuboModel hh(n);
        add_half_hot(hh, vars, lambda, Family::half_hot);
        for_each_assignment(n, [&](const Assignment& a) {
            int ones = 0;
            for (auto b : a) ones += b;
            const double e1 = energy(oh, a);
            const double e2 = energy(hh, a);
            if (ones == 1) {
                CHECK(std::abs(e1) < 1e-12);
            } else {
                CHECK(e1 >= lambda - 1e-12);
            }
            if (ones <= 1) {
                CHECK(e2 == Approx(lambda).epsilon(1e-12));
            } else {
                CHECK(e2 >= 9.0 * lambda - 1e-9);
            }
            ++trials;
        });
    }
    CHECK(trials >= 200);
}

TEST_CASE("Ising conversion examples", "[qubo][ising]") {
    QuboModel q(2);
    q.add_quadratic(0, 1, 1.0);
    auto is = to_ising(q);
    CHECK(is.J.at({0, 1}) == 0.25);
    CHECK(is.h.at(0) == 0.25);
    CHECK(is.h.at(1) == 0.25);
    CHECK(is.offset == 0.25);

    QuboModel l(1);
    l.add_linear(0, 1.0);
    auto il = to_ising(l);
    CHECK(il.h.at(0) == 0.5);
    CHECK(il.offset == 0.5);

    IsingModel m{2, {{0, 1.0}}, {{{0, 1}, 1.0}}, 0.5};
    CHECK(ising_energy(m, Spins{1, 1}) == 2.5);
    CHECK(ising_energy(m, Spins{-1, -1}) == 0.5);
    CHECK_THROWS_AS(ising_energy(m, Spins{1, 0}), DomainError);
    CHECK_THROWS_AS(ising_energy(m, Spins{1}), DimensionError);
}

TEST_CASE("Ising round trip over all assignments", "[qubo][ising][property]") {
    std::mt19937_64 rng(3);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const auto q = random_model(rng, n, 0.6);
        const auto is = to_ising(q);
        const int limit = t < 20 ? (1 << n) : 16;
        for (int k = 0; k < limit; ++k) {
            const auto a = (t < 20) ? bits_of(static_cast<std::uint64_t>(k), n) : random_bits(rng, n);
            CHECK(std::abs(energy(q, a) - ising_energy(is, to_spins(a))) <= 1e-12);
            ++checked;
        }
    }
    CHECK(checked >= 200);
}

TEST_CASE("Ising round trip on a random 10-variable model, all 1024 assignments", "[qubo][ising]") {
    std::mt19937_64 rng(4);
    const auto q = random_model(rng, 10, 0.7);
    const auto is = to_ising(q);
    for_each_assignment(10, [&](const Assignment& a) {
        CHECK(std::abs(energy(q, a) - ising_energy(is, to_spins(a))) <= 1e-12);
    });
}

TEST_CASE("fix_variable examples", "[qubo][fix]") {
    QuboModel m(2);
    m.add_quadratic(0, 1, 5.0);
    const auto z = fix_variable(m, IndexVar{0}, 0);
    CHECK(z.num_variables() == 1);
    CHECK(z.terms().empty());
    CHECK(z.num_registered() == 2);

    const auto o = fix_variable(m, IndexVar{0}, 1);
    CHECK(o.num_variables() == 1);
    CHECK(o.linear(0) == 5.0);
    CHECK(o.key(0) == VariableKey{IndexVar{1}});
    CHECK(o.fixed_value(IndexVar{0}) == std::uint8_t{1});

    CHECK_THROWS_AS(fix_variable(m, IndexVar{7}, 1), RegistryError);
    CHECK_THROWS_AS(fix_variable(m, IndexVar{0}, 2), DomainError);
}

TEST_CASE("fix_variables is sound for random models", "[qubo][fix][property]") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + static_cast<int>(rng() % 11);
        const auto q = random_model(rng, n, 0.5);
        std::vector<std::pair<VariableKey, std::uint8_t>> fixings;
        for (int i = 0; i < n; ++i) {
            if (rng() % 3 == 0) fixings.emplace_back(IndexVar{i}, static_cast<std::uint8_t>(rng() & 1U));
        }
        const auto r = fix_variables(q, fixings);
        REQUIRE(r.num_variables() + static_cast<int>(fixings.size()) == n);
        for (int k = 0; k < 8; ++k) {
            const auto sub = random_bits(rng, r.num_variables());
            const auto full = full_assignment(r, sub);
            Assignment orig(static_cast<std::size_t>(n));
            for (const auto& [key, v] : full) orig[static_cast<std::size_t>(std::get<IndexVar>(key).id)] = v;
            CHECK(energy(r, sub) == Approx(energy(q, orig)).margin(1e-9));
            // Per-family terms stay consistent with the merged terms.
            CHECK(energy_decomposition(r, sub).total == Approx(energy(r, sub)).margin(1e-9));
        }
    }
}

TEST_CASE("penalty defaults and validation", "[qubo]") {
    const auto p = PenaltyConfig::defaults_for(3);
    CHECK(p.lambda_location == 12.0);
    CHECK(p.lambda_step == 6.0);
    CHECK(p.lambda_incentive == 6.0);
    PenaltyConfig bad = p;
    bad.lambda_capacity = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad.lambda_capacity = std::nan("");
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
