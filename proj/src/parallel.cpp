#include "visgeom/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace visgeom {

int thread_count() {
  int hw = omp_get_max_threads();
  if (hw < 1) hw = 1;
  const char* env = std::getenv("GEOM_THREADS");
  if (env == nullptr) return hw;
  try {
    int n = std::stoi(env);
    if (n >= 1 && n < hw) return n;
  } catch (...) {
    // fall through to the default
  }
  return hw;
}

}  // namespace visgeom
