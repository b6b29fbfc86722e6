#ifndef HDC_PARALLEL_HPP_
#define HDC_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace hdc {

/**
 * Runs fn(task) for every task in [0, tasks) on up to `workers` threads.
 * Tasks must write to disjoint outputs; callers reduce results in task
 * order afterwards, which keeps sums independent of the worker count.
 * workers <= 1 runs inline. The first exception thrown by a task is
 * rethrown after all threads join.
 */
void parallel_for(std::size_t tasks, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace hdc

#endif  // HDC_PARALLEL_HPP_
