#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cass {

inline bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform. a.size() must be a power of two.
// The inverse includes the 1/N scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

} // namespace cass
