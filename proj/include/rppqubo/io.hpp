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

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "json.hpp"

#include "rppqubo/errors.hpp"
#include "rppqubo/instance.hpp"
#include "rppqubo/qubo.hpp"

namespace rppqubo {

namespace detail {

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Line-oriented text form. Comments start with '#'; the offset travels in a
/// "# offset <value>" comment; the first other line is the variable count and
/// each later line is "i j coeff" with i <= j (i == j is a linear term).
inline std::string export_qubo(const QuboModel& model) {
    std::ostringstream out;
    out << "# offset " << detail::format_real(model.offset()) << '\n';
    out << model.num_variables() << '\n';
    for (const auto& [i, b] : model.terms().linear) out << i << ' ' << i << ' ' << detail::format_real(b) << '\n';
    for (const auto& [ij, b] : model.terms().quadratic) {
        out << ij.first << ' ' << ij.second << ' ' << detail::format_real(b) << '\n';
    }
    return out.str();
}

/// Parses export_qubo output into a model over anonymous variables.
inline QuboModel import_qubo(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    double offset = 0.0;
    std::optional<QuboModel> model;
    auto fail = [&](const std::string& what) {
        throw InstanceError("QUBO text line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            std::istringstream c(line.substr(first + 1));
            std::string word;
            if (c >> word && word == "offset" && !(c >> offset)) fail("malformed offset comment");
            continue;
        }
        std::istringstream fields(line);
        if (!model) {
            int n = -1;
            if (!(fields >> n) || n < 0) fail("expected a variable count");
            model.emplace(n);
            continue;
        }
        int i = 0;
        int j = 0;
        double b = 0.0;
        if (!(fields >> i >> j >> b)) fail("expected '<i> <j> <coeff>'");
        if (i > j) fail("index pair must satisfy i <= j");
        if (i < 0 || j >= model->num_variables()) fail("index out of range");
        model->add_quadratic(i, j, b);
    }
    if (!model) throw InstanceError("QUBO text has no variable count line");
    model->add_offset(offset);
    return *model;
}

/// JSON companion to the text export: variable keys, fixings, and the terms
/// split by constraint family.
inline nlohmann::json sidecar(const QuboModel& model, const std::string& formulation,
                              const RoutingInstance* inst = nullptr) {
    using nlohmann::json;
    json vars = json::array();
    for (int i = 0; i < model.num_variables(); ++i) vars.push_back({{"index", i}, {"key", describe(model.key(i))}});
    json fixed = json::array();
    for (const auto& [k, v] : model.fixed()) fixed.push_back({{"key", describe(k)}, {"value", v}});
    json families = json::object();
    for (const auto& [f, t] : model.families()) {
        json lin = json::array();
        for (const auto& [i, b] : t.linear) lin.push_back({i, b});
        json quad = json::array();
        for (const auto& [ij, b] : t.quadratic) quad.push_back({ij.first, ij.second, b});
        families[std::string(to_string(f))] = {{"linear", lin}, {"quadratic", quad}, {"offset", t.offset}};
    }
    json out = {{"formulation", formulation},
                {"num_free", model.num_variables()},
                {"num_fixed", model.fixed().size()},
                {"num_registered", model.num_registered()},
                {"variables", vars},
                {"fixed", fixed},
                {"families", families}};
    if (inst) {
        json locs = json::array();
        for (const auto& l : inst->locations) locs.push_back(l.id);
        json vehs = json::array();
        for (const auto& v : inst->vehicles) vehs.push_back(v.id);
        out["instance"] = inst->name;
        out["locations"] = locs;
        out["vehicles"] = vehs;
    }
    return out;
}

}  // namespace rppqubo
