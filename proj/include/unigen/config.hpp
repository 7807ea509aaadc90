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

#ifndef UNIGEN_CONFIG_HPP_
#define UNIGEN_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "unigen/common.hpp"

namespace unigen {

struct Hyperparameters {
  std::size_t n = 10;
  std::size_t v = 10;
  double rho = 0.01;
  double alpha = 2.0;
  double beta = 0.8;
  std::size_t g = 5;
  std::size_t beams = 15;
  std::size_t steps = 10;
  double lambda = 0.5;
  double mu = 0.1;
  std::uint64_t seed = 0;
};

// Identifier count per context: 10 for documents and passages, 5 for
// sentences, and the single title for entities.
inline std::size_t default_identifier_count(Task task) {
  switch (task) {
    case Task::kDR:
    case Task::kPR: return 10;
    case Task::kSR: return 5;
    case Task::kER: return 1;
  }
  return 10;
}

struct PipelineConfig {
  std::string corpus_path;
  std::string index_path;
  std::string identifiers_path;
  std::string mixture_path;
  std::string model_path;
  std::string run_path;
  std::string provenance_path;
  Hyperparameters hp;
  Task task = Task::kDR;

  static PipelineConfig defaults(Task task) {
    PipelineConfig c;
    c.task = task;
    c.hp.v = default_identifier_count(task);
    return c;
  }
};

}  // namespace unigen

#endif  // UNIGEN_CONFIG_HPP_
