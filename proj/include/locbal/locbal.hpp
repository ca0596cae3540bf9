// Copyright 2026 The locbal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCBAL_LOCBAL_HPP_
#define LOCBAL_LOCBAL_HPP_

#include "locbal/baselines.hpp"
#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/fractional.hpp"
#include "locbal/general_discrete.hpp"
#include "locbal/graph.hpp"
#include "locbal/io.hpp"
#include "locbal/path_balancer.hpp"
#include "locbal/runtime.hpp"
#include "locbal/verifier.hpp"

#endif  // LOCBAL_LOCBAL_HPP_
