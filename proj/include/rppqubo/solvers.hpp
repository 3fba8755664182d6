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
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "rppqubo/decode.hpp"
#include "rppqubo/errors.hpp"
#include "rppqubo/instance.hpp"
#include "rppqubo/qubo.hpp"

namespace rppqubo {

/// Adjacency-list form of a QuboModel for repeated single-bit-flip evaluation.
class CompiledQubo {
 public:
    explicit CompiledQubo(const QuboModel& model)
            : n_(model.num_variables()), offset_(model.offset()), linear_(static_cast<std::size_t>(n_), 0.0) {
        for (const auto& [i, b] : model.terms().linear) linear_[static_cast<std::size_t>(i)] = b;
        std::vector<int> degree(static_cast<std::size_t>(n_), 0);
        for (const auto& [ij, b] : model.terms().quadratic) {
            ++degree[static_cast<std::size_t>(ij.first)];
            ++degree[static_cast<std::size_t>(ij.second)];
        }
        start_.assign(static_cast<std::size_t>(n_) + 1, 0);
        for (int i = 0; i < n_; ++i) start_[static_cast<std::size_t>(i) + 1] = start_[static_cast<std::size_t>(i)] + degree[static_cast<std::size_t>(i)];
        neighbor_.resize(static_cast<std::size_t>(start_.back()));
        coupling_.resize(static_cast<std::size_t>(start_.back()));
        std::vector<int> fill(start_.begin(), start_.end() - 1);
        for (const auto& [ij, b] : model.terms().quadratic) {
            auto put = [&](int from, int to) {
                const auto k = static_cast<std::size_t>(fill[static_cast<std::size_t>(from)]++);
                neighbor_[k] = to;
                coupling_[k] = b;
            };
            put(ij.first, ij.second);
            put(ij.second, ij.first);
        }
    }

    int size() const { return n_; }

    /// Energy change from flipping bit i of x.
    double flip_delta(int i, std::span<const std::uint8_t> x) const {
        double field = linear_[static_cast<std::size_t>(i)];
        for (int k = start_[static_cast<std::size_t>(i)]; k < start_[static_cast<std::size_t>(i) + 1]; ++k) {
            if (x[static_cast<std::size_t>(neighbor_[static_cast<std::size_t>(k)])]) field += coupling_[static_cast<std::size_t>(k)];
        }
        return x[static_cast<std::size_t>(i)] ? -field : field;
    }

    double energy(std::span<const std::uint8_t> x) const {
        double e = offset_;
        for (int i = 0; i < n_; ++i) {
            if (!x[static_cast<std::size_t>(i)]) continue;
            e += linear_[static_cast<std::size_t>(i)];
            for (int k = start_[static_cast<std::size_t>(i)]; k < start_[static_cast<std::size_t>(i) + 1]; ++k) {
                const int j = neighbor_[static_cast<std::size_t>(k)];
                if (j > i && x[static_cast<std::size_t>(j)]) e += coupling_[static_cast<std::size_t>(k)];
            }
        }
        return e;
    }

 private:
    int n_;
    double offset_;
    std::vector<double> linear_;
    std::vector<int> start_;
    std::vector<int> neighbor_;
    std::vector<double> coupling_;
};

struct SolveResult {
    Assignment best_assignment;
    double best_energy = 0.0;
    // Exhaustive search only: every minimizing assignment, in lexicographic order.
    std::optional<std::vector<Assignment>> all_minimizers;
    long long evaluations = 0;
    double wall_ms = 0.0;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline Assignment unpack(std::uint64_t mask, int n) {
    Assignment a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
    return a;
}

}  // namespace detail

inline constexpr int kDefaultExhaustiveLimit = 24;

/// Enumerates all 2^N assignments in Gray-code order with incremental energy
/// updates, then re-evaluates the candidate minimizers exactly. Minimizers are
/// the assignments within 1e-9 (relative) of the minimum energy; ties are
/// broken by lexicographic bitstring order.
inline SolveResult solve_exhaustive(const QuboModel& model, int limit = kDefaultExhaustiveLimit) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = model.num_variables();
    if (n > limit || n > 40) {
        throw SizeError("model has " + std::to_string(n) + " free variables, above the exhaustive limit of " +
                        std::to_string(std::min(limit, 40)) + "; use simulated annealing (--solver sa) instead");
    }
    const CompiledQubo q(model);
    Assignment x(static_cast<std::size_t>(n), 0);
    double e = q.energy(x);
    double best = e;
    std::vector<std::uint64_t> candidates{0};
    auto tol = [](double v) { return 1e-7 * (1.0 + std::abs(v)); };

    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t mask = 0;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int i = std::countr_zero(k);
        e += q.flip_delta(i, x);
        x[static_cast<std::size_t>(i)] ^= 1U;
        mask ^= std::uint64_t{1} << i;
        if ((k & 0xFFFF) == 0) e = q.energy(x);  // bound drift
        if (e < best - tol(best)) {
            best = e;
            candidates.clear();
            candidates.push_back(mask);
        } else if (e <= best + tol(best)) {
            best = std::min(best, e);
            candidates.push_back(mask);
        }
    }

    std::vector<std::pair<double, Assignment>> exact;
    exact.reserve(candidates.size());
    double emin = std::numeric_limits<double>::infinity();
    for (auto c : candidates) {
        auto a = detail::unpack(c, n);
        const double ea = energy(model, a);
        emin = std::min(emin, ea);
        exact.emplace_back(ea, std::move(a));
    }
    const double final_tol = 1e-9 * std::max(1.0, std::abs(emin));
    std::vector<Assignment> minimizers;
    for (auto& [ea, a] : exact) {
        if (ea <= emin + final_tol) minimizers.push_back(std::move(a));
    }
    std::sort(minimizers.begin(), minimizers.end());

    SolveResult r;
    r.best_assignment = minimizers.front();
    r.best_energy = energy(model, r.best_assignment);
    r.all_minimizers = std::move(minimizers);
    r.evaluations = static_cast<long long>(total);
    r.wall_ms = detail::elapsed_ms(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Simulated annealing

struct SaSchedule {
    int sweeps = 20000;
    // Hot enough to cross penalty barriers of order S at the start.
    double beta_initial = 0.01;
    double beta_final = 10.0;
    int restarts = 50;
    std::uint64_t seed = 0;
    // 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;

    /// Inverse temperature ramps geometrically from 0.01 to 10 S.
    static SaSchedule defaults_for(int path_length, std::uint64_t seed = 0) {
        SaSchedule s;
        s.beta_final = 10.0 * std::max(1, path_length);
        s.seed = seed;
        return s;
    }

    void validate() const {
        if (sweeps < 0 || restarts < 1) throw DomainError("schedule needs sweeps >= 0 and restarts >= 1");
        if (!(beta_initial > 0.0) || !(beta_final >= beta_initial)) {
            throw DomainError("schedule needs beta_final >= beta_initial > 0");
        }
    }
};

namespace detail {

struct ChainResult {
    Assignment best;
    long long flips = 0;
};

inline ChainResult run_chain(const CompiledQubo& q, const SaSchedule& sched, int chain) {
    std::seed_seq seq{static_cast<std::uint32_t>(sched.seed), static_cast<std::uint32_t>(sched.seed >> 32),
                      static_cast<std::uint32_t>(chain)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = q.size();

    Assignment x(static_cast<std::size_t>(n));
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);
    double e = q.energy(x);
    ChainResult out{x, 0};
    double best = e;

    const double ratio = sched.beta_final / sched.beta_initial;
    for (int s = 0; s < sched.sweeps; ++s) {
        const double t = sched.sweeps > 1 ? static_cast<double>(s) / (sched.sweeps - 1) : 0.0;
        const double beta = sched.beta_initial * std::pow(ratio, t);
        for (int i = 0; i < n; ++i) {
            const double d = q.flip_delta(i, x);
            ++out.flips;
            if (d <= 0.0 || unit(rng) < std::exp(-beta * d)) {
                x[static_cast<std::size_t>(i)] ^= 1U;
                e += d;
                if (e < best) {
                    best = e;
                    out.best = x;
                }
            }
        }
    }
    return out;
}

}  // namespace detail

/// Independent single-flip Metropolis chains; chain r draws from a generator
/// seeded by (seed, r), so results do not depend on the thread count. The best
/// state over all chains is selected by (exact energy, bitstring).
inline SolveResult solve_sa(const QuboModel& model, const SaSchedule& sched) {
    sched.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const CompiledQubo q(model);
    std::vector<detail::ChainResult> chains(static_cast<std::size_t>(sched.restarts));

    unsigned workers = sched.threads ? sched.threads : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(sched.restarts));
    auto work = [&](unsigned w) {
        for (int r = static_cast<int>(w); r < sched.restarts; r += static_cast<int>(workers)) {
            chains[static_cast<std::size_t>(r)] = detail::run_chain(q, sched, r);
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    SolveResult r;
    bool first = true;
    for (const auto& c : chains) {
        const double e = energy(model, c.best);
        if (first || e < r.best_energy || (e == r.best_energy && c.best < r.best_assignment)) {
            r.best_energy = e;
            r.best_assignment = c.best;
            first = false;
        }
        r.evaluations += c.flips;
    }
    r.wall_ms = detail::elapsed_ms(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Routing oracle

inline constexpr int kOracleMaxRequests = 5;
inline constexpr int kOracleMaxVehicles = 3;

namespace detail {

inline bool shorter(double d1, const std::vector<int>& r1, double d2, const std::vector<int>& r2) {
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(d1), std::abs(d2)));
    if (d1 < d2 - tol) return true;
    if (d2 < d1 - tol) return false;
    return r1 < r2;
}

struct BestRoute {
    bool found = false;
    double distance = 0.0;
    std::vector<int> route;
};

// Best ordering of the requests in `mask` for one vehicle: each pickup before
// its drop-off and, when `capacity` is set, the load never above capacity.
inline BestRoute best_route(const RoutingInstance& inst, int vehicle, unsigned mask, bool capacity) {
    const auto& veh = inst.vehicles[static_cast<std::size_t>(vehicle)];
    const int C = inst.num_requests();
    BestRoute best;
    std::vector<int> route{veh.start};
    auto dfs = [&](auto&& self, unsigned picked, unsigned dropped, int load, double dist) -> void {
        if (dropped == mask) {
            if (!best.found || shorter(dist, route, best.distance, best.route)) best = {true, dist, route};
            return;
        }
        for (int i = 0; i < C; ++i) {
            const unsigned bit = 1U << i;
            if (!(mask & bit)) continue;
            const auto& req = inst.requests[static_cast<std::size_t>(i)];
            int next = -1;
            int next_load = load;
            if (!(picked & bit)) {
                next = req.pickup;
                next_load += req.passengers;
                if (capacity && next_load > veh.capacity) continue;
            } else if (!(dropped & bit)) {
                next = req.dropoff;
                next_load -= req.passengers;
            } else {
                continue;
            }
            const double step = inst.distances(route.back(), next);
            route.push_back(next);
            self(self, (picked & bit) ? picked : picked | bit, (picked & bit) ? dropped | bit : dropped, next_load, dist + step);
            route.pop_back();
        }
    };
    dfs(dfs, 0U, 0U, 0, 0.0);
    return best;
}

}  // namespace detail

struct OracleOptions {
    bool capacity = true;
};

/// Minimum-distance routing by direct enumeration of request-to-vehicle
/// assignments and precedence-respecting stop orders. Distances are raw and
/// there is no return leg. Ties go to the lexicographically smallest routes.
inline DecodedSolution routing_oracle(const RoutingInstance& inst, const OracleOptions& opts = {}) {
    const int A = inst.num_vehicles();
    const int C = inst.num_requests();
    if (C > kOracleMaxRequests || A > kOracleMaxVehicles) {
        throw SizeError("routing oracle handles at most " + std::to_string(kOracleMaxVehicles) + " vehicles and " +
                        std::to_string(kOracleMaxRequests) + " requests");
    }
    if (A < 1) throw InstanceError("routing instance has no vehicles");

    const unsigned subsets = 1U << C;
    std::vector<std::vector<detail::BestRoute>> table(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
        for (unsigned m = 0; m < subsets; ++m) table[static_cast<std::size_t>(a)].push_back(detail::best_route(inst, a, m, opts.capacity));
    }

    DecodedSolution best;
    bool found = false;
    std::vector<int> owner(static_cast<std::size_t>(C), 0);
    long long combos = 1;
    for (int i = 0; i < C; ++i) combos *= A;
    for (long long code = 0; code < combos; ++code) {
        long long rest = code;
        std::vector<unsigned> masks(static_cast<std::size_t>(A), 0U);
        for (int i = 0; i < C; ++i) {
            owner[static_cast<std::size_t>(i)] = static_cast<int>(rest % A);
            rest /= A;
            masks[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])] |= 1U << i;
        }
        double total = 0.0;
        std::vector<std::vector<int>> routes;
        bool ok = true;
        for (int a = 0; a < A && ok; ++a) {
            const auto& br = table[static_cast<std::size_t>(a)][masks[static_cast<std::size_t>(a)]];
            ok = br.found;
            total += br.distance;
            routes.push_back(br.route);
        }
        if (!ok) continue;
        const double tol = 1e-12 * std::max(1.0, std::max(total, best.total_distance));
        if (!found || total < best.total_distance - tol ||
            (std::abs(total - best.total_distance) <= tol && routes < best.routes)) {
            best.routes = std::move(routes);
            best.total_distance = total;
            found = true;
        }
    }
    if (!found) {
        DecodedSolution none;
        for (const auto& v : inst.vehicles) none.routes.push_back({v.start});
        none.feasible = false;
        none.violations.push_back({ViolationKind::capacity, "no assignment of requests to vehicles respects every capacity"});
        return none;
    }
    best.violations = check_feasibility(best, inst, {.capacity = opts.capacity});
    best.feasible = best.violations.empty();
    return best;
}

}  // namespace rppqubo
