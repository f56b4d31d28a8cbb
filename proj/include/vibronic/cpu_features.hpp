#pragma once

namespace vibronic {

// True when the executing CPU supports AVX2 and FMA.
bool cpu_has_avx2_fma();

}  // namespace vibronic
