#include "mulreg/parallel.hpp"

#include "mulreg/error.hpp"

#include <cstdlib>

namespace mulreg {

std::string to_string(Backend b)
{
  return b == Backend::Serial ? "serial" : "openmp";
}

Backend parse_backend(const std::string& s)
{
  if (s == "serial")
    return Backend::Serial;
  if (s == "openmp")
    return Backend::OpenMP;
  throw Error(ErrorKind::InvalidArgument, "backend must be serial or openmp, got '" + s + "'");
}

int resolve_workers(int requested)
{
  if (requested > 0)
    return requested;
  if (const char* env = std::getenv("MULREG_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0)
      return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace mulreg
