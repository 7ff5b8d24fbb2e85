#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mulreg {

enum class Backend { Serial, OpenMP };

std::string to_string(Backend b);
Backend parse_backend(const std::string& s);

//! requested > 0 wins; otherwise MULREG_WORKERS, otherwise the OpenMP default.
int resolve_workers(int requested);

//! Reference loop: out[i] = fn(i) in index order.
template <class T, class Fn>
std::vector<T> replicate_serial(std::size_t count, Fn&& fn)
{
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(fn(i));
  return out;
}

//! Same contract as replicate_serial. Each slot is written by exactly one
//! iteration and nothing is reduced inside the region, so the result does not
//! depend on the worker count or the schedule.
template <class T, class Fn>
std::vector<T> replicate_parallel(std::size_t count, int workers, Fn&& fn)
{
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  const long long n = static_cast<long long>(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_workers(workers))
#endif
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  (void)workers;
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);
  return out;
}

template <class T, class Fn>
std::vector<T> replicate(Backend backend, std::size_t count, int workers, Fn&& fn)
{
  if (backend == Backend::Serial)
    return replicate_serial<T>(count, fn);
  return replicate_parallel<T>(count, workers, fn);
}

} // namespace mulreg
