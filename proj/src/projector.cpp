#include "ctlab/projector.hpp"

#include <cmath>
#include <numbers>

namespace ctlab {
namespace {

// Walks one ray and reports each (pixel pair, weights, path step) to the
// visitor. Forward projection gathers through these weights, back projection
// scatters through the same ones, so the pair is adjoint by construction.
template <typename Visit>
void trace_ray(int n, double theta, double offset, Visit&& visit) {
    const double c = 0.5 * (n - 1);
    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    // Ray: (x,y) = center + offset*(-dy,dx) + t*(dx,dy)
    const double x0 = c - offset * dy;
    const double y0 = c + offset * dx;

    if (std::abs(dx) >= std::abs(dy)) {
        const double step = 1.0 / std::abs(dx);
        const double slope = dy / dx;
        for (int i = 0; i < n; ++i) {
            const double y = y0 + (i - x0) * slope;
            const int j0 = static_cast<int>(std::floor(y));
            const double f = y - j0;
            visit(i, j0, j0 + 1, 1.0 - f, f, step, /*x_dominant=*/true);
        }
    } else {
        const double step = 1.0 / std::abs(dy);
        const double slope = dx / dy;
        for (int j = 0; j < n; ++j) {
            const double x = x0 + (j - y0) * slope;
            const int i0 = static_cast<int>(std::floor(x));
            const double f = x - i0;
            visit(j, i0, i0 + 1, 1.0 - f, f, step, /*x_dominant=*/false);
        }
    }
}

}  // namespace

void ProjectionGeometry::validate() const {
    if (image_size < 8) throw DomainError("geometry: image_size must be >= 8");
    if (num_angles_total < 2) throw DomainError("geometry: need at least 2 angles");
    if (detectors < image_size)
        throw DomainError("geometry: detectors must cover the image (detectors >= size)");
    if (detector_spacing <= 0.0 || pixel_spacing <= 0.0)
        throw DomainError("geometry: spacings must be positive");
}

double ProjectionGeometry::angle_radians(int index) const {
    if (index < 0 || index >= num_angles_total)
        throw DomainError("angle index out of range [0,N)");
    return index * std::numbers::pi / num_angles_total;
}

std::vector<int> ProjectionGeometry::all_angles() const {
    std::vector<int> out(num_angles_total);
    for (int k = 0; k < num_angles_total; ++k) out[k] = k;
    return out;
}

Sinogram forward_project(const ImageGrid& image, const ProjectionGeometry& geom,
                         const std::vector<int>& angles) {
    geom.validate();
    if (image.width != geom.image_size || image.height != geom.image_size)
        throw ShapeError("forward_project: image does not match geometry");
    const int n = geom.image_size;
    const int D = geom.detectors;
    Sinogram sino(angles, D);
    sino.angles = angles;
    for (int r = 0; r < sino.num_rows(); ++r) {
        const double theta = geom.angle_radians(angles[r]);
        double* out = sino.row(r);
        for (int m = 0; m < D; ++m) {
            const double offset = (m - 0.5 * (D - 1)) * geom.detector_spacing;
            double acc = 0.0;
            trace_ray(n, theta, offset,
                      [&](int major, int lo, int hi, double wlo, double whi, double step,
                          bool x_dominant) {
                          double v = 0.0;
                          if (x_dominant) {
                              if (lo >= 0 && lo < n) v += wlo * image.at(lo, major);
                              if (hi >= 0 && hi < n) v += whi * image.at(hi, major);
                          } else {
                              if (lo >= 0 && lo < n) v += wlo * image.at(major, lo);
                              if (hi >= 0 && hi < n) v += whi * image.at(major, hi);
                          }
                          acc += v * step;
                      });
            out[m] = acc * geom.pixel_spacing;
        }
    }
    return sino;
}

ImageGrid back_project(const Sinogram& sino, const ProjectionGeometry& geom) {
    geom.validate();
    sino.validate();
    const int n = geom.image_size;
    const int D = geom.detectors;
    if (sino.detectors != D)
        throw ShapeError("back_project: sinogram detector count does not match geometry");
    ImageGrid image(n, n, 0.0);
    for (int r = 0; r < sino.num_rows(); ++r) {
        const double theta = geom.angle_radians(sino.angles[r]);
        const double* in = sino.row(r);
        for (int m = 0; m < D; ++m) {
            const double offset = (m - 0.5 * (D - 1)) * geom.detector_spacing;
            const double value = in[m] * geom.pixel_spacing;
            trace_ray(n, theta, offset,
                      [&](int major, int lo, int hi, double wlo, double whi, double step,
                          bool x_dominant) {
                          const double v = value * step;
                          if (x_dominant) {
                              if (lo >= 0 && lo < n) image.at(lo, major) += wlo * v;
                              if (hi >= 0 && hi < n) image.at(hi, major) += whi * v;
                          } else {
                              if (lo >= 0 && lo < n) image.at(major, lo) += wlo * v;
                              if (hi >= 0 && hi < n) image.at(major, hi) += whi * v;
                          }
                      });
        }
    }
    return image;
}

std::vector<double> row_sums(const ProjectionGeometry& geom, const std::vector<int>& angles) {
    ImageGrid ones(geom.image_size, geom.image_size, 1.0);
    return forward_project(ones, geom, angles).data;
}

std::vector<double> col_sums(const ProjectionGeometry& geom, const std::vector<int>& angles) {
    Sinogram ones(angles, geom.detectors);
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    return back_project(ones, geom).data;
}

}  // namespace ctlab
