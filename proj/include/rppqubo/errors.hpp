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

#include <stdexcept>
#include <string>

namespace rppqubo {

/// Assignment or spin vector length does not match the model.
class DimensionError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// Unknown or duplicate variable key, or an index outside the registry.
class RegistryError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// Value outside its mathematical domain (spin not in {-1,+1}, bit not in {0,1}, ...).
class DomainError : public std::domain_error {
 public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent routing instance.
class InstanceError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// A problem is too large for an enumerative method.
class SizeError : public std::length_error {
 public:
    using std::length_error::length_error;
};

}  // namespace rppqubo
