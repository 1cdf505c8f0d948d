#pragma once

namespace visgeom {

// Worker count for OpenMP kernels: min(GEOM_THREADS, logical cores), or the
// logical core count when the variable is unset or unparsable. Re-read on
// every call so tests can vary the environment.
int thread_count();

}  // namespace visgeom
