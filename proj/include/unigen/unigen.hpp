// Copyright 2026 The Unigen Authors.
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

// Umbrella header.

#ifndef UNIGEN_UNIGEN_HPP_
#define UNIGEN_UNIGEN_HPP_

#include "unigen/common.hpp"
#include "unigen/config.hpp"
#include "unigen/corpus.hpp"
#include "unigen/decoder.hpp"
#include "unigen/eval.hpp"
#include "unigen/fm_index.hpp"
#include "unigen/identifiers.hpp"
#include "unigen/model.hpp"
#include "unigen/pipeline.hpp"
#include "unigen/prompts.hpp"
#include "unigen/scorer.hpp"

#endif  // UNIGEN_UNIGEN_HPP_
