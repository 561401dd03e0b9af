#pragma once

#include "qstomo/types.hpp"

namespace qstomo::fft {

// Unnormalized in-place transforms. forward uses e^{-ikx}; inverse divides by the size.
void forward_2d(int n, cplx* data);
void inverse_2d(int n, cplx* data);
void forward_1d(int n, cplx* data);
void inverse_1d(int n, cplx* data);

}  // namespace qstomo::fft
