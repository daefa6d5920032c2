#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace weaklim {

// Worker count used by parallel_for; set from the CLI --threads flag.
void set_thread_count(int k);
int thread_count();

// Splits [0, count) into a fixed number of chunks independent of the worker
// count and reduces per-chunk partials in chunk order, so floating-point
// results are identical for any --threads value.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

double parallel_sum(std::size_t count, const std::function<double(std::size_t)>& term);

}  // namespace weaklim
