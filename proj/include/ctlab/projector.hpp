#pragma once

#include <vector>

#include "ctlab/grid.hpp"

namespace ctlab {

// Parallel-beam geometry on an integer angle grid: index k maps to
// k*180/N degrees, rotation about the image center.
struct ProjectionGeometry {
    int image_size = 0;
    int num_angles_total = 0;
    int detectors = 0;          // 0 means image_size
    double detector_spacing = 1.0;
    double pixel_spacing = 1.0;

    ProjectionGeometry() = default;
    ProjectionGeometry(int size, int num_angles, int dets = 0)
        : image_size(size), num_angles_total(num_angles),
          detectors(dets == 0 ? size : dets) {
        validate();
    }

    double angle_radians(int index) const;
    std::vector<int> all_angles() const;
    void validate() const;
};

// Discrete Radon transform by Joseph's method: pixel-driven linear
// interpolation along the dominant axis, step one pixel.
Sinogram forward_project(const ImageGrid& image, const ProjectionGeometry& geom,
                         const std::vector<int>& angles);

// Exact adjoint of forward_project (same interpolation weights, transposed).
ImageGrid back_project(const Sinogram& sino, const ProjectionGeometry& geom);

// Matrix-free SART normalization sums over the rays of the given angles.
std::vector<double> row_sums(const ProjectionGeometry& geom, const std::vector<int>& angles);
std::vector<double> col_sums(const ProjectionGeometry& geom, const std::vector<int>& angles);

}  // namespace ctlab
