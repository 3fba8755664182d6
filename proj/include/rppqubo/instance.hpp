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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rppqubo/errors.hpp"

namespace rppqubo {

enum class LocationRole : std::uint8_t { vehicle_start, pickup, dropoff };

struct Location {
    std::string id;
    std::optional<std::pair<double, double>> coords;
    LocationRole role = LocationRole::pickup;

    bool operator==(const Location&) const = default;
};

/// A ride request between two location indices. `passengers` boards at the
/// pickup and leaves at the drop-off.
struct Request {
    int pickup = 0;
    int dropoff = 0;
    int passengers = 1;

    bool operator==(const Request&) const = default;
};

struct Vehicle {
    std::string id;
    int start = 0;
    int capacity = 1;

    bool operator==(const Vehicle&) const = default;
};

/// Dense non-negative matrix of travel costs; need not be symmetric.
class DistanceMatrix {
 public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(int n) : n_(n), w_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

    int size() const { return n_; }

    double operator()(int from, int to) const { return w_[at(from, to)]; }

    void set(int from, int to, double value) {
        if (!std::isfinite(value) || value < 0.0) {
            throw InstanceError("distances must be finite and non-negative");
        }
        if (from == to && value != 0.0) throw InstanceError("distance from a location to itself must be 0");
        w_[at(from, to)] = value;
    }

    double max_off_diagonal() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                if (i != j) m = std::max(m, (*this)(i, j));
            }
        }
        return m;
    }

    bool operator==(const DistanceMatrix&) const = default;

 private:
    std::size_t at(int from, int to) const {
        if (from < 0 || to < 0 || from >= n_ || to >= n_) throw InstanceError("distance index out of range");
        return static_cast<std::size_t>(from) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(to);
    }

    int n_ = 0;
    std::vector<double> w_;
};

/// Default normalization slack: 1e-6 of the largest distance, or 1e-6 when all
/// distances vanish.
inline double default_epsilon(const DistanceMatrix& d) {
    const double m = d.max_off_diagonal();
    return m > 0.0 ? 1e-6 * m : 1e-6;
}

/// W = epsilon + max off-diagonal distance, so every w / W lies in [0, 1).
inline double normalization_factor(const DistanceMatrix& d, double epsilon) {
    if (d.size() == 0) throw InstanceError("normalization factor of an empty distance matrix");
    if (!(epsilon > 0.0)) throw DomainError("normalization epsilon must be strictly positive");
    return epsilon + d.max_off_diagonal();
}

inline double normalization_factor(const DistanceMatrix& d) { return normalization_factor(d, default_epsilon(d)); }

struct RoutingInstance {
    std::string name;
    std::vector<Location> locations;
    std::vector<Vehicle> vehicles;
    std::vector<Request> requests;
    DistanceMatrix distances;
    // Distances came from an explicit matrix rather than coordinates.
    bool explicit_distances = false;

    int num_vehicles() const { return static_cast<int>(vehicles.size()); }
    int num_requests() const { return static_cast<int>(requests.size()); }

    /// Longest path of a vehicle, counting its start: 2C + 1.
    int path_length() const { return 2 * num_requests() + 1; }

    /// Pickups and drop-offs in request order: s_1, f_1, s_2, f_2, ...
    std::vector<int> shared_locations() const {
        std::vector<int> out;
        out.reserve(requests.size() * 2);
        for (const auto& r : requests) {
            out.push_back(r.pickup);
            out.push_back(r.dropoff);
        }
        return out;
    }

    /// Signed passenger change at a location: +p at a pickup, -p at its drop-off, 0 at starts.
    int passenger_delta(int location) const {
        for (const auto& r : requests) {
            if (r.pickup == location) return r.passengers;
            if (r.dropoff == location) return -r.passengers;
        }
        return 0;
    }

    int location_index(const std::string& id) const {
        for (std::size_t i = 0; i < locations.size(); ++i) {
            if (locations[i].id == id) return static_cast<int>(i);
        }
        throw InstanceError("unknown location id '" + id + "'");
    }

    bool operator==(const RoutingInstance&) const = default;
};

namespace detail {

inline double euclidean(const std::pair<double, double>& a, const std::pair<double, double>& b) {
    return std::hypot(a.first - b.first, a.second - b.second);
}

inline void fill_euclidean(RoutingInstance& inst) {
    const int n = static_cast<int>(inst.locations.size());
    inst.distances = DistanceMatrix(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) inst.distances.set(i, j, euclidean(*inst.locations[i].coords, *inst.locations[j].coords));
        }
    }
}

}  // namespace detail

/// Checks referential integrity and assigns location roles. Throws InstanceError.
inline void validate(RoutingInstance& inst) {
    std::set<std::string> ids;
    for (const auto& l : inst.locations) {
        if (l.id.empty()) throw InstanceError("location with empty id");
        if (!ids.insert(l.id).second) throw InstanceError("duplicate location id '" + l.id + "'");
    }
    std::set<std::string> vids;
    for (const auto& v : inst.vehicles) {
        if (!vids.insert(v.id).second) throw InstanceError("duplicate vehicle id '" + v.id + "'");
    }
    const int n = static_cast<int>(inst.locations.size());
    auto in_range = [n](int i) { return i >= 0 && i < n; };

    std::vector<int> use(static_cast<std::size_t>(n), 0);
    std::vector<std::optional<LocationRole>> role(static_cast<std::size_t>(n));
    auto claim = [&](int loc, LocationRole r, bool shareable) {
        auto& slot = role[static_cast<std::size_t>(loc)];
        if (slot && (*slot != r || !shareable)) {
            throw InstanceError("location '" + inst.locations[static_cast<std::size_t>(loc)].id +
                                "' is used in more than one role; give each stop its own id");
        }
        slot = r;
    };
    for (const auto& v : inst.vehicles) {
        if (!in_range(v.start)) throw InstanceError("vehicle '" + v.id + "' starts at an unknown location");
        if (v.capacity < 1) throw InstanceError("vehicle '" + v.id + "' must have capacity >= 1");
        claim(v.start, LocationRole::vehicle_start, true);
    }
    for (const auto& r : inst.requests) {
        if (!in_range(r.pickup) || !in_range(r.dropoff)) throw InstanceError("request endpoint is not a known location");
        if (r.pickup == r.dropoff) throw InstanceError("request pickup and drop-off must differ");
        if (r.passengers < 1) throw InstanceError("request must carry at least one passenger");
        claim(r.pickup, LocationRole::pickup, false);
        claim(r.dropoff, LocationRole::dropoff, false);
    }
    for (int i = 0; i < n; ++i) {
        if (!role[static_cast<std::size_t>(i)]) {
            throw InstanceError("location '" + inst.locations[static_cast<std::size_t>(i)].id +
                                "' is neither a vehicle start nor a request endpoint");
        }
        inst.locations[static_cast<std::size_t>(i)].role = *role[static_cast<std::size_t>(i)];
    }
    if (inst.distances.size() != n) throw InstanceError("distance matrix size does not match the location count");
}

inline RoutingInstance instance_from_json(const nlohmann::json& doc) {
    using nlohmann::json;
    try {
        RoutingInstance inst;
        inst.name = doc.value("name", std::string{});
        bool all_coords = true;
        for (const auto& jl : doc.at("locations")) {
            Location l;
            l.id = jl.at("id").get<std::string>();
            if (jl.contains("x") && jl.contains("y")) {
                l.coords = std::make_pair(jl.at("x").get<double>(), jl.at("y").get<double>());
            } else {
                all_coords = false;
            }
            inst.locations.push_back(std::move(l));
        }
        std::map<std::string, int> index;
        for (std::size_t i = 0; i < inst.locations.size(); ++i) index.emplace(inst.locations[i].id, static_cast<int>(i));
        auto lookup = [&](const json& j, const char* what) {
            const auto id = j.get<std::string>();
            auto it = index.find(id);
            if (it == index.end()) throw InstanceError(std::string(what) + " refers to unknown location '" + id + "'");
            return it->second;
        };
        for (const auto& jv : doc.at("vehicles")) {
            Vehicle v;
            v.id = jv.at("id").get<std::string>();
            v.start = lookup(jv.at("start"), "vehicle start");
            v.capacity = jv.at("capacity").get<int>();
            inst.vehicles.push_back(std::move(v));
        }
        for (const auto& jr : doc.at("requests")) {
            Request r;
            r.pickup = lookup(jr.at("pickup"), "request pickup");
            r.dropoff = lookup(jr.at("dropoff"), "request dropoff");
            r.passengers = jr.value("passengers", 1);
            inst.requests.push_back(r);
        }

        const int n = static_cast<int>(inst.locations.size());
        if (doc.contains("distances") && !doc.at("distances").is_null()) {
            inst.explicit_distances = true;
            inst.distances = DistanceMatrix(n);
            const auto& jd = doc.at("distances");
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const auto& from = inst.locations[static_cast<std::size_t>(i)].id;
                    const auto& to = inst.locations[static_cast<std::size_t>(j)].id;
                    if (jd.contains(from) && jd.at(from).contains(to)) {
                        const double w = jd.at(from).at(to).get<double>();
                        if (w < 0.0) throw InstanceError("negative distance from '" + from + "' to '" + to + "'");
                        inst.distances.set(i, j, w);
                    } else if (i != j) {
                        throw InstanceError("distance matrix has no entry from '" + from + "' to '" + to + "'");
                    }
                }
            }
            for (const auto& [from, row] : jd.items()) {
                if (!index.count(from)) throw InstanceError("distance matrix refers to unknown location '" + from + "'");
                for (const auto& [to, _] : row.items()) {
                    if (!index.count(to)) throw InstanceError("distance matrix refers to unknown location '" + to + "'");
                }
            }
        } else if (all_coords) {
            detail::fill_euclidean(inst);
        } else {
            throw InstanceError("instance needs either a distance matrix or x/y coordinates for every location");
        }
        validate(inst);
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("malformed instance document: ") + e.what());
    }
}

inline RoutingInstance parse_instance(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Report a line number rather than a byte offset.
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw InstanceError("JSON syntax error at line " + std::to_string(line) + ": " + e.what());
    }
    return instance_from_json(doc);
}

inline nlohmann::json to_json(const RoutingInstance& inst) {
    using nlohmann::json;
    json doc;
    doc["name"] = inst.name;
    json locs = json::array();
    for (const auto& l : inst.locations) {
        json jl{{"id", l.id}};
        if (l.coords) {
            jl["x"] = l.coords->first;
            jl["y"] = l.coords->second;
        }
        locs.push_back(jl);
    }
    doc["locations"] = locs;
    json vs = json::array();
    for (const auto& v : inst.vehicles) {
        vs.push_back({{"id", v.id}, {"start", inst.locations[static_cast<std::size_t>(v.start)].id}, {"capacity", v.capacity}});
    }
    doc["vehicles"] = vs;
    json rs = json::array();
    for (const auto& r : inst.requests) {
        rs.push_back({{"pickup", inst.locations[static_cast<std::size_t>(r.pickup)].id},
                      {"dropoff", inst.locations[static_cast<std::size_t>(r.dropoff)].id},
                      {"passengers", r.passengers}});
    }
    doc["requests"] = rs;
    if (inst.explicit_distances) {
        json d = json::object();
        for (std::size_t i = 0; i < inst.locations.size(); ++i) {
            json row = json::object();
            for (std::size_t j = 0; j < inst.locations.size(); ++j) {
                row[inst.locations[j].id] = inst.distances(static_cast<int>(i), static_cast<int>(j));
            }
            d[inst.locations[i].id] = row;
        }
        doc["distances"] = d;
    }
    return doc;
}

inline std::string serialize(const RoutingInstance& inst) { return to_json(inst).dump(2); }

struct GeneratorOptions {
    int vehicles = 1;
    int requests = 1;
    int capacity_min = 1;
    int capacity_max = 4;
    double box = 10.0;
    // Upper bound on passengers per request; 0 means the largest capacity.
    int max_passengers = 0;
};

/// Random instance with uniform coordinates in [0, box]^2. Every request fits
/// alone in at least one vehicle, so a feasible routing always exists.
inline RoutingInstance generate_instance(std::uint64_t seed, const GeneratorOptions& opt) {
    if (opt.vehicles < 1 || opt.requests < 0) throw InstanceError("generator needs at least one vehicle");
    if (opt.capacity_min < 1 || opt.capacity_max < opt.capacity_min) throw InstanceError("invalid capacity range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, opt.box);
    std::uniform_int_distribution<int> cap(opt.capacity_min, opt.capacity_max);

    RoutingInstance inst;
    inst.name = "gen-s" + std::to_string(seed) + "-a" + std::to_string(opt.vehicles) + "-c" + std::to_string(opt.requests);
    auto add_location = [&](std::string id, LocationRole role) {
        const double x = coord(rng);
        const double y = coord(rng);
        inst.locations.push_back({std::move(id), std::make_pair(x, y), role});
        return static_cast<int>(inst.locations.size()) - 1;
    };
    int largest = 0;
    for (int a = 0; a < opt.vehicles; ++a) {
        const int start = add_location("d" + std::to_string(a + 1), LocationRole::vehicle_start);
        const int c = cap(rng);
        largest = std::max(largest, c);
        inst.vehicles.push_back({"v" + std::to_string(a + 1), start, c});
    }
    const int pmax = opt.max_passengers > 0 ? std::min(opt.max_passengers, largest) : largest;
    std::uniform_int_distribution<int> pax(1, pmax);
    for (int i = 0; i < opt.requests; ++i) {
        const int s = add_location("s" + std::to_string(i + 1), LocationRole::pickup);
        const int f = add_location("f" + std::to_string(i + 1), LocationRole::dropoff);
        inst.requests.push_back({s, f, pax(rng)});
    }
    detail::fill_euclidean(inst);
    validate(inst);
    return inst;
}

/// The canonical one-vehicle, one-request fixture: d=(0,0), s=(1,0), f=(2,0), capacity 4.
inline RoutingInstance tiny_instance() {
    return parse_instance(std::string(R"({
        "name": "TINY-1",
        "locations": [{"id": "d", "x": 0, "y": 0}, {"id": "s", "x": 1, "y": 0}, {"id": "f", "x": 2, "y": 0}],
        "vehicles": [{"id": "v1", "start": "d", "capacity": 4}],
        "requests": [{"pickup": "s", "dropoff": "f", "passengers": 1}]
    })"));
}

}  // namespace rppqubo
