// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: uplink spectral-efficiency simulator for cell-free massive MIMO
// Copyright (C) 2026 The cfmimo authors
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

#ifndef CFMIMO_PARALLEL_HPP
#define CFMIMO_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace cfmimo
{

// Worker count: CFMIMO_WORKERS if set to a positive integer, otherwise the hardware concurrency.
int worker_count();

// Calls task(i) for every i in [0, count) on up to worker_count() threads. Tasks must write to
// disjoint outputs; callers reduce the per-index results in index order afterwards, which keeps
// every result independent of the worker count. The first exception thrown by a task is rethrown.
// A call made from inside a task runs inline on the calling worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &task);

} // namespace cfmimo

#endif
