#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace thinlayer {

/// Number of worker threads used by node and cell loops. Defaults to the
/// number of logical cores.
int worker_count();
void set_worker_count(int workers);

/// Runs body(i) for i in [0, count). Iterations must write disjoint outputs;
/// results then do not depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// One task per index, handed out dynamically to at most worker_count()
/// threads. Loops nested inside a task run serially.
void parallel_tasks(std::size_t count, const std::function<void(std::size_t)>& body);

/// Sum with a fixed pairwise tree, independent of how the data was produced.
double pairwise_sum(std::span<const double> values);

}  // namespace thinlayer
