#pragma once

#include <array>
#include <vector>

#include "ctlab/grid.hpp"

namespace ctlab {

// Undecimated piecewise-linear B-spline tight frame. Level l applies the
// 9 tensor-product filters with a-trous dilation 2^(l-1) directly to the
// image, so every level is an individually tight transform:
// W_l^T W_l == I exactly (periodic boundary).
struct FrameletSystem {
    int levels = 1;

    FrameletSystem() = default;
    explicit FrameletSystem(int num_levels) : levels(num_levels) { validate(); }
    void validate() const {
        if (levels < 1 || levels > 8) throw DomainError("FrameletSystem: levels must be in [1,8]");
    }
    int min_image_size() const { return 1 << levels; }
};

// Per-level, per-subband coefficient planes; subband 0 is the low pass,
// subbands 1..8 the high passes. Each plane has the source image shape.
struct FrameletCoeffs {
    int size = 0;    // image side length
    int levels = 0;
    std::vector<std::vector<double>> planes;  // levels*9 planes, row-major

    FrameletCoeffs() = default;
    FrameletCoeffs(int image_size, int num_levels);

    std::vector<double>& plane(int level, int subband) {
        return planes[static_cast<size_t>(level) * 9 + subband];
    }
    const std::vector<double>& plane(int level, int subband) const {
        return planes[static_cast<size_t>(level) * 9 + subband];
    }
    bool same_shape(const FrameletCoeffs& other) const {
        return size == other.size && levels == other.levels;
    }
};

// Single-level transform at the given dilation; exact adjoint pair.
void analysis_level(const ImageGrid& image, int dilation,
                    std::array<std::vector<double>, 9>& out);
void synthesis_level(const std::array<std::vector<double>, 9>& coeffs, int size, int dilation,
                     ImageGrid& out_accum);

FrameletCoeffs analysis(const ImageGrid& image, const FrameletSystem& system);

// Left inverse of analysis: averages the per-level adjoints, so
// synthesis(analysis(u)) == u. Per level the adjoint is exact.
ImageGrid synthesis(const FrameletCoeffs& coeffs, const FrameletSystem& system);

// Elementwise T_b(x) = sign(x) * max(|x|-b, 0) on high-pass subbands;
// low pass untouched when skip_lowpass.
FrameletCoeffs soft_threshold(const FrameletCoeffs& coeffs,
                              const std::vector<double>& threshold_per_level,
                              bool skip_lowpass = true);

double coeffs_sq_norm(const FrameletCoeffs& coeffs);

}  // namespace ctlab
