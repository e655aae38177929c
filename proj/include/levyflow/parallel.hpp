#pragma once

#include <cstddef>
#include <functional>

namespace levyflow {

// Worker cap used by batch APIs. Defaults to LEVYFLOW_THREADS when set, else hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n). Tasks write into slots owned by their index, so results never
// depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace levyflow
