// Copyright 2026 The SAda Authors.
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

#pragma once

#include <cstddef>
#include <functional>

namespace sada {

/// Number of worker threads used by the library. Reads SADA_THREADS on first
/// call (0 or unset means hardware concurrency) unless overridden.
std::size_t worker_count();

/// Overrides the worker count for the rest of the process. 0 restores auto.
void set_worker_count(std::size_t n);

/// Runs fn(i) for i in [0, n). Work items are handed out in index order; fn
/// must only write to state owned by item i, so results never depend on the
/// number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sada
