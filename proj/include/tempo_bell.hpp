// Copyright 2026 The tempo-bell Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "tempo_bell/correlators.hpp"
#include "tempo_bell/errors.hpp"
#include "tempo_bell/inequality.hpp"
#include "tempo_bell/lhv.hpp"
#include "tempo_bell/montecarlo.hpp"
#include "tempo_bell/optimizer.hpp"
#include "tempo_bell/qubit.hpp"
#include "tempo_bell/rng.hpp"
#include "tempo_bell/version.hpp"
