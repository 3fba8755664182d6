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
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rppqubo/errors.hpp"

namespace rppqubo {

using Assignment = std::vector<std::uint8_t>;
using Spins = std::vector<std::int8_t>;

// Constraint family of a coefficient contribution. Every coefficient added to a
// QuboModel carries one, so energies can be decomposed per family.
enum class Family : std::uint8_t {
    objective,
    location_onehot,
    step_onehot,
    half_hot,
    incentive,
    causality_penalty,
    capacity,
    start_anchor,
    nonedge,
    edge_pickup_enter,
    edge_pickup_leave,
    edge_dropoff,
    edge_start,
    edge_causality,
    other,
};

inline constexpr std::array<std::string_view, 15> kFamilyNames = {
        "objective",         "location-onehot",   "step-onehot",  "half-hot",
        "incentive",         "causality-penalty", "capacity",     "start-anchor",
        "nonedge",           "edge-pickup-enter", "edge-pickup-leave",
        "edge-dropoff",      "edge-start",        "edge-causality", "other"};

inline std::string_view to_string(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

inline Family family_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
        if (kFamilyNames[i] == name) return static_cast<Family>(i);
    }
    throw DomainError("unknown constraint family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Variable keys

/// Plain numbered variable, for models that are not built from a routing problem.
struct IndexVar {
    int id = 0;
    auto operator<=>(const IndexVar&) const = default;
};

/// Vehicle `vehicle` is at location `location` at step `step` (node-based RPP and VRP).
struct NodeVar {
    int vehicle = 0;
    int location = 0;
    int step = 0;
    auto operator<=>(const NodeVar&) const = default;
};

/// Unary slack unit `unit` of vehicle `vehicle` at step `step` (capacity constraints).
struct SlackVar {
    int vehicle = 0;
    int step = 0;
    int unit = 0;
    auto operator<=>(const SlackVar&) const = default;
};

/// Location `location` is the `step`-th stop of a single TSP tour.
struct TspVar {
    int location = 0;
    int step = 0;
    auto operator<=>(const TspVar&) const = default;
};

/// Vehicle `vehicle` travels from `from` to `to` at step `step` (edge-based RPP).
struct EdgeVar {
    int vehicle = 0;
    int from = 0;
    int to = 0;
    int step = 0;
    auto operator<=>(const EdgeVar&) const = default;
};

using VariableKey = std::variant<IndexVar, NodeVar, SlackVar, TspVar, EdgeVar>;

inline std::string describe(const VariableKey& key) {
    struct Visitor {
        std::string operator()(const IndexVar& k) const { return "x[" + std::to_string(k.id) + "]"; }
        std::string operator()(const NodeVar& k) const {
            return "node[a=" + std::to_string(k.vehicle) + ",l=" + std::to_string(k.location) +
                   ",b=" + std::to_string(k.step) + "]";
        }
        std::string operator()(const SlackVar& k) const {
            return "slack[a=" + std::to_string(k.vehicle) + ",b=" + std::to_string(k.step) +
                   ",c=" + std::to_string(k.unit) + "]";
        }
        std::string operator()(const TspVar& k) const {
            return "tsp[v=" + std::to_string(k.location) + ",i=" + std::to_string(k.step) + "]";
        }
        std::string operator()(const EdgeVar& k) const {
            return "edge[a=" + std::to_string(k.vehicle) + ",i=" + std::to_string(k.from) +
                   ",j=" + std::to_string(k.to) + ",b=" + std::to_string(k.step) + "]";
        }
    };
    return std::visit(Visitor{}, key);
}

// ---------------------------------------------------------------------------
// Penalty weights

struct PenaltyConfig {
    double lambda_location = 1.0;
    double lambda_step = 1.0;
    double lambda_incentive = 1.0;
    double lambda_capacity = 1.0;
    double lambda_nonedge = 1.0;

    /// Defaults for a model whose longest vehicle path has `path_length` steps.
    ///
    /// Any single violated constraint must cost more than the largest objective
    /// saving it can buy. The normalized objective of a path is below 2(S-1), so
    /// every family gets 2S, except the location one-hot which also has to outbid
    /// the incentive gained by visiting a pickup and its drop-off twice
    /// (3 lambda_incentive for 2 lambda_location), hence 4S.
    static PenaltyConfig defaults_for(int path_length) {
        const double s = std::max(1, path_length);
        return {4.0 * s, 2.0 * s, 2.0 * s, 2.0 * s, 2.0 * s};
    }

    void validate() const {
        for (double v : {lambda_location, lambda_step, lambda_incentive, lambda_capacity, lambda_nonedge}) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError("penalty weights must be finite and strictly positive");
            }
        }
    }

    bool operator==(const PenaltyConfig&) const = default;
};

// ---------------------------------------------------------------------------
// QUBO model

/// Sparse upper-triangular coefficient storage.
struct QuboTerms {
    std::map<int, double> linear;
    std::map<std::pair<int, int>, double> quadratic;
    double offset = 0.0;

    bool empty() const { return linear.empty() && quadratic.empty() && offset == 0.0; }
};

class QuboModel {
 public:
    QuboModel() = default;

    /// A model over `n` anonymous variables keyed IndexVar{0..n-1}.
    explicit QuboModel(int n) {
        for (int i = 0; i < n; ++i) add_variable(IndexVar{i});
    }

    int add_variable(const VariableKey& key) {
        auto [it, inserted] = index_.emplace(key, static_cast<int>(keys_.size()));
        if (!inserted) throw RegistryError("duplicate variable " + describe(key));
        keys_.push_back(key);
        return it->second;
    }

    int num_variables() const { return static_cast<int>(keys_.size()); }

    bool contains(const VariableKey& key) const { return index_.count(key) != 0; }

    int index_of(const VariableKey& key) const {
        auto it = index_.find(key);
        if (it == index_.end()) throw RegistryError("unknown variable " + describe(key));
        return it->second;
    }

    std::optional<int> find(const VariableKey& key) const {
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const VariableKey& key(int index) const {
        check_index(index);
        return keys_[static_cast<std::size_t>(index)];
    }

    const std::vector<VariableKey>& keys() const { return keys_; }

    void add_linear(int i, double bias, Family family = Family::other) {
        check_index(i);
        merged_.linear[i] += bias;
        families_[family].linear[i] += bias;
    }

    /// Adds bias * x_i * x_j. A diagonal pair is folded into the linear term (x^2 = x).
    void add_quadratic(int i, int j, double bias, Family family = Family::other) {
        check_index(i);
        check_index(j);
        if (i == j) {
            add_linear(i, bias, family);
            return;
        }
        if (i > j) std::swap(i, j);
        merged_.quadratic[{i, j}] += bias;
        families_[family].quadratic[{i, j}] += bias;
    }

    void add_offset(double bias, Family family = Family::other) {
        merged_.offset += bias;
        families_[family].offset += bias;
    }

    double linear(int i) const {
        auto it = merged_.linear.find(i);
        return it == merged_.linear.end() ? 0.0 : it->second;
    }

    double quadratic(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto it = merged_.quadratic.find({i, j});
        return it == merged_.quadratic.end() ? 0.0 : it->second;
    }

    double offset() const { return merged_.offset; }

    const QuboTerms& terms() const { return merged_; }
    const std::map<Family, QuboTerms>& families() const { return families_; }

    /// Coefficient-wise sum with a model over the same number of variables.
    void add_model(const QuboModel& other) {
        if (other.num_variables() != num_variables()) {
            throw DimensionError("cannot add models over different variable counts");
        }
        for (const auto& [family, t] : other.families_) {
            for (const auto& [i, b] : t.linear) add_linear(i, b, family);
            for (const auto& [ij, b] : t.quadratic) add_quadratic(ij.first, ij.second, b, family);
            add_offset(t.offset, family);
        }
    }

    /// Drop coefficients that cancelled to exactly zero.
    void compact() {
        compact_terms(merged_);
        for (auto it = families_.begin(); it != families_.end();) {
            compact_terms(it->second);
            it = it->second.empty() ? families_.erase(it) : std::next(it);
        }
    }

    std::size_t num_interactions() const { return merged_.quadratic.size(); }

    /// Variables removed by fix_variable, with their values, in fixing order.
    const std::vector<std::pair<VariableKey, std::uint8_t>>& fixed() const { return fixed_; }

    std::optional<std::uint8_t> fixed_value(const VariableKey& key) const {
        for (const auto& [k, v] : fixed_) {
            if (k == key) return v;
        }
        return std::nullopt;
    }

    /// Free plus fixed variables: the size of the registry before any fixing.
    int num_registered() const { return num_variables() + static_cast<int>(fixed_.size()); }

 private:
    friend QuboModel fix_variables(const QuboModel&, const std::vector<std::pair<VariableKey, std::uint8_t>>&);

    void check_index(int i) const {
        if (i < 0 || i >= num_variables()) {
            throw RegistryError("variable index " + std::to_string(i) + " out of range");
        }
    }

    static void compact_terms(QuboTerms& t) {
        std::erase_if(t.linear, [](const auto& kv) { return kv.second == 0.0; });
        std::erase_if(t.quadratic, [](const auto& kv) { return kv.second == 0.0; });
    }

    std::vector<VariableKey> keys_;
    std::map<VariableKey, int> index_;
    QuboTerms merged_;
    std::map<Family, QuboTerms> families_;
    std::vector<std::pair<VariableKey, std::uint8_t>> fixed_;
};

// ---------------------------------------------------------------------------
// Evaluation

inline double energy(const QuboTerms& t, std::span<const std::uint8_t> bits) {
    double e = t.offset;
    for (const auto& [i, b] : t.linear) {
        if (bits[static_cast<std::size_t>(i)]) e += b;
    }
    for (const auto& [ij, b] : t.quadratic) {
        if (bits[static_cast<std::size_t>(ij.first)] && bits[static_cast<std::size_t>(ij.second)]) e += b;
    }
    return e;
}

inline void check_assignment(const QuboModel& model, std::span<const std::uint8_t> bits) {
    if (static_cast<int>(bits.size()) != model.num_variables()) {
        throw DimensionError("assignment has " + std::to_string(bits.size()) + " bits, model has " +
                             std::to_string(model.num_variables()) + " variables");
    }
}

inline double energy(const QuboModel& model, std::span<const std::uint8_t> bits) {
    check_assignment(model, bits);
    return energy(model.terms(), bits);
}

// ---------------------------------------------------------------------------
// Constraint gadgets

/// Adds lambda * (constant + sum_k coeff_k x_k)^2, expanded with x^2 = x.
/// Repeated indices are merged before squaring.
inline void add_squared_linear(QuboModel& model, const std::vector<std::pair<int, double>>& expr,
                               double constant, double lambda, Family family) {
    std::map<int, double> coeff;
    for (const auto& [i, c] : expr) {
        if (i < 0 || i >= model.num_variables()) {
            throw RegistryError("variable index " + std::to_string(i) + " out of range");
        }
        coeff[i] += c;
    }
    std::erase_if(coeff, [](const auto& kv) { return kv.second == 0.0; });

    model.add_offset(lambda * constant * constant, family);
    for (const auto& [i, c] : coeff) {
        model.add_linear(i, lambda * (2.0 * constant * c + c * c), family);
    }
    for (auto a = coeff.begin(); a != coeff.end(); ++a) {
        for (auto b = std::next(a); b != coeff.end(); ++b) {
            model.add_quadratic(a->first, b->first, lambda * 2.0 * a->second * b->second, family);
        }
    }
}

/// lambda * (1 - sum x)^2: zero iff exactly one variable is set.
inline void add_one_hot(QuboModel& model, const std::vector<int>& vars, double lambda, Family family) {
    if (vars.empty()) throw RegistryError("one-hot constraint over an empty variable set");
    std::vector<std::pair<int, double>> expr;
    expr.reserve(vars.size());
    for (int v : vars) expr.emplace_back(v, -1.0);
    add_squared_linear(model, expr, 1.0, lambda, family);
}

/// lambda * (1 - 2 sum x)^2: equals lambda iff at most one variable is set, >= 9 lambda otherwise.
inline void add_half_hot(QuboModel& model, const std::vector<int>& vars, double lambda, Family family) {
    if (vars.empty()) throw RegistryError("half-hot constraint over an empty variable set");
    std::vector<std::pair<int, double>> expr;
    expr.reserve(vars.size());
    for (int v : vars) expr.emplace_back(v, -2.0);
    add_squared_linear(model, expr, 1.0, lambda, family);
}

// ---------------------------------------------------------------------------
// Ising form

struct IsingModel {
    int num_vars = 0;
    std::map<int, double> h;
    std::map<std::pair<int, int>, double> J;
    double offset = 0.0;
};

/// Substitutes x = (1 + s) / 2. Energies agree under s_i = 2 x_i - 1.
inline IsingModel to_ising(const QuboModel& model) {
    IsingModel m;
    m.num_vars = model.num_variables();
    m.offset = model.offset();
    for (const auto& [i, b] : model.terms().linear) {
        m.h[i] += b / 2.0;
        m.offset += b / 2.0;
    }
    for (const auto& [ij, b] : model.terms().quadratic) {
        const double q = b / 4.0;
        m.J[ij] += q;
        m.h[ij.first] += q;
        m.h[ij.second] += q;
        m.offset += q;
    }
    return m;
}

inline double ising_energy(const IsingModel& m, std::span<const std::int8_t> spins) {
    if (static_cast<int>(spins.size()) != m.num_vars) {
        throw DimensionError("spin vector has " + std::to_string(spins.size()) + " entries, model has " +
                             std::to_string(m.num_vars) + " variables");
    }
    for (auto s : spins) {
        if (s != 1 && s != -1) throw DomainError("spin values must be -1 or +1");
    }
    double e = m.offset;
    for (const auto& [i, b] : m.h) e += b * spins[static_cast<std::size_t>(i)];
    for (const auto& [ij, b] : m.J) {
        e += b * spins[static_cast<std::size_t>(ij.first)] * spins[static_cast<std::size_t>(ij.second)];
    }
    return e;
}

inline Spins to_spins(std::span<const std::uint8_t> bits) {
    Spins s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? 1 : -1;
    return s;
}

// ---------------------------------------------------------------------------
// Variable fixing

/// Removes the given variables, folding their values into the remaining terms.
/// Surviving variables keep their relative order. The fixed values are recorded
/// on the returned model so full assignments can be reconstructed.
inline QuboModel fix_variables(const QuboModel& model,
                               const std::vector<std::pair<VariableKey, std::uint8_t>>& fixings) {
    std::vector<int> value(static_cast<std::size_t>(model.num_variables()), -1);
    for (const auto& [key, v] : fixings) {
        if (v > 1) throw DomainError("fixed value must be 0 or 1");
        const int i = model.index_of(key);
        if (value[static_cast<std::size_t>(i)] != -1 && value[static_cast<std::size_t>(i)] != v) {
            throw RegistryError("conflicting fixings for " + describe(key));
        }
        value[static_cast<std::size_t>(i)] = v;
    }

    QuboModel out;
    std::vector<int> remap(value.size(), -1);
    for (int i = 0; i < model.num_variables(); ++i) {
        if (value[static_cast<std::size_t>(i)] == -1) remap[static_cast<std::size_t>(i)] = out.add_variable(model.key(i));
    }
    out.fixed_ = model.fixed_;
    for (int i = 0; i < model.num_variables(); ++i) {
        if (value[static_cast<std::size_t>(i)] != -1) {
            out.fixed_.emplace_back(model.key(i), static_cast<std::uint8_t>(value[static_cast<std::size_t>(i)]));
        }
    }

    for (const auto& [family, t] : model.families()) {
        out.add_offset(t.offset, family);
        for (const auto& [i, b] : t.linear) {
            const int v = value[static_cast<std::size_t>(i)];
            if (v == -1) {
                out.add_linear(remap[static_cast<std::size_t>(i)], b, family);
            } else if (v == 1) {
                out.add_offset(b, family);
            }
        }
        for (const auto& [ij, b] : t.quadratic) {
            const int vi = value[static_cast<std::size_t>(ij.first)];
            const int vj = value[static_cast<std::size_t>(ij.second)];
            if (vi == 0 || vj == 0) continue;
            if (vi == -1 && vj == -1) {
                out.add_quadratic(remap[static_cast<std::size_t>(ij.first)], remap[static_cast<std::size_t>(ij.second)], b,
                                  family);
            } else if (vi == -1) {
                out.add_linear(remap[static_cast<std::size_t>(ij.first)], b, family);
            } else if (vj == -1) {
                out.add_linear(remap[static_cast<std::size_t>(ij.second)], b, family);
            } else {
                out.add_offset(b, family);
            }
        }
    }
    out.compact();
    return out;
}

inline QuboModel fix_variable(const QuboModel& model, const VariableKey& key, std::uint8_t value) {
    return fix_variables(model, {{key, value}});
}

/// Rebuilds the assignment of every registered variable (free and fixed), keyed.
inline std::map<VariableKey, std::uint8_t> full_assignment(const QuboModel& model,
                                                           std::span<const std::uint8_t> bits) {
    check_assignment(model, bits);
    std::map<VariableKey, std::uint8_t> out;
    for (int i = 0; i < model.num_variables(); ++i) out.emplace(model.key(i), bits[static_cast<std::size_t>(i)]);
    for (const auto& [k, v] : model.fixed()) out.emplace(k, v);
    return out;
}

}  // namespace rppqubo
