/*
 Copyright 2026 pend3d contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef PEND3D_ERRORS_HPP
#define PEND3D_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pend3d {

struct NonSkewInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotRotation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoConvergence : std::runtime_error {
    int step_index = -1;
    explicit NoConvergence(const std::string& what, int step = -1)
        : std::runtime_error(what), step_index(step) {}
};

struct SingularVariation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllConditioned : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleProblem : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OpenLoop : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotVerticalRelation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pend3d

#endif  // PEND3D_ERRORS_HPP
