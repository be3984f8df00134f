#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctlab/errors.hpp"

namespace ctlab {

// Square pixel field, row-major. Holds both reconstructions and ground truth.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ImageGrid() = default;
    ImageGrid(int w, int h, double fill = 0.0);

    double& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
    size_t size() const { return data.size(); }

    bool same_shape(const ImageGrid& other) const {
        return width == other.width && height == other.height;
    }
    void validate() const;
};

// Line-integral measurements, one row per projection angle.
// Angle indices are integers on the geometry's angle grid, strictly increasing.
struct Sinogram {
    std::vector<int> angles;
    int detectors = 0;
    std::vector<double> data;                  // angle-major, |angles| * detectors
    std::vector<double> noise_sigma_per_row;   // one sigma per angle row

    Sinogram() = default;
    Sinogram(std::vector<int> angle_list, int num_detectors);

    int num_rows() const { return static_cast<int>(angles.size()); }
    double* row(int r) { return data.data() + static_cast<size_t>(r) * detectors; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * detectors; }
    void validate() const;
};

struct QualityReport {
    double mse = 0.0;
    double psnr = 0.0;
    double runtime_ms = 0.0;
};

// Zero-MSE PSNR is capped here so rewards built from PSNR deltas stay finite.
inline constexpr double kPsnrCap = 99.0;

double mse(const ImageGrid& reference, const ImageGrid& candidate);

// 10*log10(MAX^2/MSE) with MAX fixed at 1.0; inputs are not clipped.
double psnr(const ImageGrid& reference, const ImageGrid& candidate);

}  // namespace ctlab
