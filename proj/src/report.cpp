/*
 *  Copyright 2026 The uclab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include "uclab/report.hpp"

#include <stdexcept>

namespace uclab {

void TrialReport::set_extra(const std::string& name, double value)
{
    for (auto& [key, v] : extras) {
        if (key == name) {
            v = value;
            return;
        }
    }
    extras.emplace_back(name, value);
}

double TrialReport::extra(const std::string& name) const
{
    for (const auto& [key, v] : extras) {
        if (key == name) {
            return v;
        }
    }
    throw std::out_of_range("TrialReport: no extra named '" + name + "'");
}

} // namespace uclab
