#pragma once

namespace affreg {

// Process-wide cap on worker threads used by the OpenMP kernels and the
// suite runner. 1 (the default) selects the serial reference paths.
// All parallel kernels reduce in fixed order, so results are identical
// for any setting; this only controls scheduling.
void set_max_threads(int n);
int max_threads();

}  // namespace affreg
