// Copyright 2026 The sepcard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEPCARD_SEPCARD_HPP
#define SEPCARD_SEPCARD_HPP

#include "sepcard/hilbert_core.hpp"
#include "sepcard/product_bases.hpp"
#include "sepcard/states.hpp"
#include "sepcard/ensembles.hpp"
#include "sepcard/report.hpp"
#include "sepcard/runners.hpp"

#endif  // SEPCARD_SEPCARD_HPP
