#ifndef HERGM_PARALLEL_HPP
#define HERGM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace hergm {

/// Worker count used by parallel_for. Defaults to the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(0..count-1), distributing indices over thread_count() workers.
/// Tasks must write only to their own output slot; any exception is rethrown
/// on the calling thread after all workers stop (lowest failing index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hergm

#endif
