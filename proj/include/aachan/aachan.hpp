// SPDX-License-Identifier: Apache-2.0
//
// aachan - air-to-air propagation channel toolkit for built-up areas
// Copyright (C) 2026 aachan contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef AACHAN_AACHAN_HPP
#define AACHAN_AACHAN_HPP

#include "aachan/city.hpp"
#include "aachan/environment.hpp"
#include "aachan/geometry.hpp"
#include "aachan/io.hpp"
#include "aachan/propagation.hpp"
#include "aachan/raycheck.hpp"
#include "aachan/rng.hpp"
#include "aachan/stats.hpp"

#endif // AACHAN_AACHAN_HPP
