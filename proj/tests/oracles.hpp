// Test-only dense oracles. Everything here rebuilds operators explicitly
// (unit-vector probing, dense factorizations) and must stay independent of
// the matrix-free implementation paths it checks.
#pragma once

#include <Eigen/Dense>
#include <random>

#include "ctlab/projector.hpp"

namespace ctlab::testing {

// Dense system matrix of forward_project, built column by column by
// projecting unit-pixel images.
inline Eigen::MatrixXd dense_forward_matrix(const ProjectionGeometry& geom,
                                            const std::vector<int>& angles) {
    const int n = geom.image_size;
    const int rows = static_cast<int>(angles.size()) * geom.detectors;
    Eigen::MatrixXd A(rows, n * n);
    ImageGrid unit(n, n, 0.0);
    for (int j = 0; j < n * n; ++j) {
        unit.data.assign(unit.data.size(), 0.0);
        unit.data[static_cast<size_t>(j)] = 1.0;
        Sinogram col = forward_project(unit, geom, angles);
        for (int r = 0; r < rows; ++r) A(r, j) = col.data[static_cast<size_t>(r)];
    }
    return A;
}

inline ImageGrid random_image(int n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    ImageGrid img(n, n, 0.0);
    for (double& v : img.data) v = dist(rng);
    return img;
}

inline ImageGrid disk_image(int n, double radius_fraction = 0.4, double value = 1.0) {
    ImageGrid img(n, n, 0.0);
    const double c = 0.5 * (n - 1);
    const double r2 = radius_fraction * n * radius_fraction * n;
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col) {
            const double dx = col - c, dy = row - c;
            if (dx * dx + dy * dy <= r2) img.at(row, col) = value;
        }
    return img;
}

}  // namespace ctlab::testing
