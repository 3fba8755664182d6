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
#include <random>
#include <vector>

#include "rppqubo/rppqubo.hpp"

namespace testing_support {

using rppqubo::Assignment;
using rppqubo::QuboModel;

/// Random model over n anonymous variables with coefficients in [-5, 5].
inline QuboModel random_model(std::mt19937_64& rng, int n, double density = 0.5) {
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    std::bernoulli_distribution keep(density);
    QuboModel m(n);
    for (int i = 0; i < n; ++i) {
        if (keep(rng)) m.add_linear(i, coef(rng));
        for (int j = i + 1; j < n; ++j) {
            if (keep(rng)) m.add_quadratic(i, j, coef(rng));
        }
    }
    m.add_offset(coef(rng));
    return m;
}

inline Assignment bits_of(std::uint64_t mask, int n) {
    Assignment a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
    return a;
}

template <class F>
void for_each_assignment(int n, F&& f) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) f(bits_of(m, n));
}

inline Assignment random_bits(std::mt19937_64& rng, int n) {
    Assignment a(static_cast<std::size_t>(n));
    for (auto& b : a) b = static_cast<std::uint8_t>(rng() & 1U);
    return a;
}

}  // namespace testing_support
