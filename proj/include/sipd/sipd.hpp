// Copyright 2026 The sipd Authors
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


#ifndef SIPD_SIPD_HPP
#define SIPD_SIPD_HPP

#include "sipd/box.hpp"
#include "sipd/bundle.hpp"
#include "sipd/contract.hpp"
#include "sipd/discretize.hpp"
#include "sipd/dual.hpp"
#include "sipd/expr.hpp"
#include "sipd/gdiscretize.hpp"
#include "sipd/global.hpp"
#include "sipd/instance.hpp"
#include "sipd/interval.hpp"
#include "sipd/nlp.hpp"
#include "sipd/parse.hpp"
#include "sipd/qp.hpp"
#include "sipd/report.hpp"
#include "sipd/scan.hpp"
#include "sipd/sensitivity.hpp"
#include "sipd/subproblems.hpp"

#endif  // SIPD_SIPD_HPP
