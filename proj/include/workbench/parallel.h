/*
 * Copyright 2026 The Workbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WORKBENCH_PARALLEL_H_
#define WORKBENCH_PARALLEL_H_

#include <functional>

namespace workbench {

// Maximum worker threads used by the engine. Initialized from the
// WORKBENCH_THREADS environment variable (default: hardware concurrency).
int MaxThreads();
void SetMaxThreads(int num_threads);

// Runs body(i) for i in [0, n). Work units must only write to slots they own;
// the result is then independent of the schedule.
void ParallelFor(int n, const std::function<void(int)>& body);

}  // namespace workbench

#endif  // WORKBENCH_PARALLEL_H_
