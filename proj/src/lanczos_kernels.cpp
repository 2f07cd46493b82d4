// Gram-Schmidt projection kernels. This translation unit is compiled with
// -ffp-contract=off (see CMakeLists) so that multiply-add pairs are never
// fused: the loop and fused variants then execute the exact same rounding
// sequence per coefficient / per element and their results are bit-identical.

#include "psvd/lanczos.hpp"

namespace psvd::detail {

namespace {
// Rows handled per tile in the fused kernels. Keeps the residual slice hot
// in L1 while streaming the basis once.
constexpr Index kTile = 2048;
}  // namespace

void reorth_coefficients_loop(const double* basis, Index rows, Index ncols, const double* r,
                              double* coeff) {
    for (Index j = 0; j < ncols; ++j) {
        const double* b = basis + j * rows;
        double acc = 0.0;
        for (Index i = 0; i < rows; ++i) acc += b[i] * r[i];
        coeff[j] = acc;
    }
}

void reorth_coefficients_fused(const double* basis, Index rows, Index ncols, const double* r,
                               double* coeff) {
    for (Index j = 0; j < ncols; ++j) coeff[j] = 0.0;
    for (Index i0 = 0; i0 < rows; i0 += kTile) {
        const Index i1 = std::min(rows, i0 + kTile);
        Index j = 0;
        // Four independent accumulator chains; each column still sums in
        // ascending row order, so the per-coefficient rounding sequence
        // matches the loop kernel exactly.
        for (; j + 4 <= ncols; j += 4) {
            const double* b0 = basis + j * rows;
            const double* b1 = basis + (j + 1) * rows;
            const double* b2 = basis + (j + 2) * rows;
            const double* b3 = basis + (j + 3) * rows;
            double a0 = coeff[j];
            double a1 = coeff[j + 1];
            double a2 = coeff[j + 2];
            double a3 = coeff[j + 3];
            for (Index i = i0; i < i1; ++i) {
                const double ri = r[i];
                a0 += b0[i] * ri;
                a1 += b1[i] * ri;
                a2 += b2[i] * ri;
                a3 += b3[i] * ri;
            }
            coeff[j] = a0;
            coeff[j + 1] = a1;
            coeff[j + 2] = a2;
            coeff[j + 3] = a3;
        }
        for (; j < ncols; ++j) {
            const double* b = basis + j * rows;
            double acc = coeff[j];
            for (Index i = i0; i < i1; ++i) acc += b[i] * r[i];
            coeff[j] = acc;
        }
    }
}

void reorth_subtract_loop(const double* basis, Index rows, Index ncols, const double* coeff,
                          double* r) {
    for (Index j = 0; j < ncols; ++j) {
        const double* b = basis + j * rows;
        const double c = coeff[j];
        for (Index i = 0; i < rows; ++i) r[i] -= c * b[i];
    }
}

void reorth_subtract_fused(const double* basis, Index rows, Index ncols, const double* coeff,
                           double* r) {
    // Row-tiled, but each element of r still receives its updates in
    // ascending column order — identical arithmetic to the loop kernel.
    for (Index i0 = 0; i0 < rows; i0 += kTile) {
        const Index i1 = std::min(rows, i0 + kTile);
        for (Index j = 0; j < ncols; ++j) {
            const double* b = basis + j * rows;
            const double c = coeff[j];
            for (Index i = i0; i < i1; ++i) r[i] -= c * b[i];
        }
    }
}

}  // namespace psvd::detail
