/*
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

#ifndef STFILTER_STFILTER_HPP
#define STFILTER_STFILTER_HPP

#include "stfilter/error.hpp"
#include "stfilter/filtering.hpp"
#include "stfilter/manifest.hpp"
#include "stfilter/report.hpp"
#include "stfilter/scoring.hpp"
#include "stfilter/subset_spec.hpp"
#include "stfilter/synthbench.hpp"
#include "stfilter/tokenizer.hpp"
#include "stfilter/version.hpp"

#endif  // STFILTER_STFILTER_HPP
