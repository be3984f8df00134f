#include "ctlab/framelet.hpp"

#include <cmath>

namespace ctlab {
namespace {

// 1-D bank: h0 = 1/4 [1,2,1], h1 = sqrt(2)/4 [1,0,-1], h2 = 1/4 [-1,2,-1].
// Sum of squared magnitude responses is identically 1 (unitary extension).
const double kRoot2Over4 = std::sqrt(2.0) / 4.0;
const double kFilters[3][3] = {
    {0.25, 0.5, 0.25},
    {kRoot2Over4, 0.0, -kRoot2Over4},
    {-0.25, 0.5, -0.25},
};

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

// Correlation along rows with the dilated 3-tap filter, periodic boundary.
void filter_rows(const std::vector<double>& in, int n, const double* h, int dilation,
                 std::vector<double>& out) {
    for (int r = 0; r < n; ++r) {
        const double* src = in.data() + static_cast<size_t>(r) * n;
        double* dst = out.data() + static_cast<size_t>(r) * n;
        for (int c = 0; c < n; ++c) {
            dst[c] = h[0] * src[wrap(c - dilation, n)] + h[1] * src[c] +
                     h[2] * src[wrap(c + dilation, n)];
        }
    }
}

void filter_cols(const std::vector<double>& in, int n, const double* h, int dilation,
                 std::vector<double>& out) {
    for (int r = 0; r < n; ++r) {
        const double* up = in.data() + static_cast<size_t>(wrap(r - dilation, n)) * n;
        const double* mid = in.data() + static_cast<size_t>(r) * n;
        const double* down = in.data() + static_cast<size_t>(wrap(r + dilation, n)) * n;
        double* dst = out.data() + static_cast<size_t>(r) * n;
        for (int c = 0; c < n; ++c) dst[c] = h[0] * up[c] + h[1] * mid[c] + h[2] * down[c];
    }
}

// Adjoint of the correlation above: convolution with the same taps.
void filter_rows_adj(const std::vector<double>& in, int n, const double* h, int dilation,
                     std::vector<double>& out) {
    const double flipped[3] = {h[2], h[1], h[0]};
    filter_rows(in, n, flipped, dilation, out);
}

void filter_cols_adj(const std::vector<double>& in, int n, const double* h, int dilation,
                     std::vector<double>& out) {
    const double flipped[3] = {h[2], h[1], h[0]};
    filter_cols(in, n, flipped, dilation, out);
}

}  // namespace

FrameletCoeffs::FrameletCoeffs(int image_size, int num_levels)
    : size(image_size), levels(num_levels),
      planes(static_cast<size_t>(num_levels) * 9,
             std::vector<double>(static_cast<size_t>(image_size) * image_size, 0.0)) {}

void analysis_level(const ImageGrid& image, int dilation,
                    std::array<std::vector<double>, 9>& out) {
    const int n = image.width;
    std::vector<double> tmp(static_cast<size_t>(n) * n);
    for (int i = 0; i < 3; ++i) {
        filter_cols(image.data, n, kFilters[i], dilation, tmp);
        for (int j = 0; j < 3; ++j) {
            auto& plane = out[static_cast<size_t>(3 * i + j)];
            plane.resize(static_cast<size_t>(n) * n);
            filter_rows(tmp, n, kFilters[j], dilation, plane);
        }
    }
}

void synthesis_level(const std::array<std::vector<double>, 9>& coeffs, int size, int dilation,
                     ImageGrid& out_accum) {
    const int n = size;
    std::vector<double> tmp(static_cast<size_t>(n) * n);
    std::vector<double> tmp2(static_cast<size_t>(n) * n);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const auto& plane = coeffs[static_cast<size_t>(3 * i + j)];
            if (plane.size() != static_cast<size_t>(n) * n)
                throw ShapeError("synthesis_level: plane size mismatch");
            filter_rows_adj(plane, n, kFilters[j], dilation, tmp);
            filter_cols_adj(tmp, n, kFilters[i], dilation, tmp2);
            for (size_t k = 0; k < out_accum.data.size(); ++k) out_accum.data[k] += tmp2[k];
        }
    }
}

FrameletCoeffs analysis(const ImageGrid& image, const FrameletSystem& system) {
    system.validate();
    if (image.width < system.min_image_size())
        throw DomainError("analysis: image smaller than 2^levels");
    FrameletCoeffs coeffs(image.width, system.levels);
    std::array<std::vector<double>, 9> level_out;
    for (int l = 0; l < system.levels; ++l) {
        analysis_level(image, 1 << l, level_out);
        for (int s = 0; s < 9; ++s) coeffs.plane(l, s) = std::move(level_out[s]);
    }
    return coeffs;
}

ImageGrid synthesis(const FrameletCoeffs& coeffs, const FrameletSystem& system) {
    system.validate();
    if (coeffs.levels != system.levels)
        throw ShapeError("synthesis: coefficient level count does not match system");
    ImageGrid out(coeffs.size, coeffs.size, 0.0);
    std::array<std::vector<double>, 9> level_in;
    for (int l = 0; l < system.levels; ++l) {
        for (int s = 0; s < 9; ++s) level_in[static_cast<size_t>(s)] = coeffs.plane(l, s);
        synthesis_level(level_in, coeffs.size, 1 << l, out);
    }
    const double inv = 1.0 / system.levels;
    for (double& v : out.data) v *= inv;
    return out;
}

FrameletCoeffs soft_threshold(const FrameletCoeffs& coeffs,
                              const std::vector<double>& threshold_per_level,
                              bool skip_lowpass) {
    if (static_cast<int>(threshold_per_level.size()) != coeffs.levels)
        throw ShapeError("soft_threshold: need one threshold per level");
    for (double b : threshold_per_level)
        if (!(b >= 0.0)) throw DomainError("soft_threshold: threshold must be >= 0");
    FrameletCoeffs out = coeffs;
    for (int l = 0; l < coeffs.levels; ++l) {
        const double b = threshold_per_level[static_cast<size_t>(l)];
        for (int s = skip_lowpass ? 1 : 0; s < 9; ++s) {
            for (double& x : out.plane(l, s)) {
                const double mag = std::abs(x) - b;
                x = mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
            }
        }
    }
    return out;
}

double coeffs_sq_norm(const FrameletCoeffs& coeffs) {
    double acc = 0.0;
    for (const auto& plane : coeffs.planes)
        for (double v : plane) acc += v * v;
    return acc;
}

}  // namespace ctlab
