#pragma once

namespace pvml {

/// Which kernel variant runs. Both produce bitwise-identical results; the
/// serial one is the reference the parallel one is tested against.
enum class Execution { Serial, Parallel };

/// Worker count for Parallel kernels (0 = OpenMP default).
void set_parallel_threads(int threads);
int parallel_threads();

}  // namespace pvml
