#include "ctlab/grid.hpp"

#include <cmath>

namespace ctlab {

ImageGrid::ImageGrid(int w, int h, double fill)
    : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
    validate();
}

void ImageGrid::validate() const {
    if (width != height || width < 8)
        throw DomainError("ImageGrid must be square with side >= 8");
    if (data.size() != static_cast<size_t>(width) * height)
        throw ShapeError("ImageGrid data length does not match dimensions");
    for (double v : data)
        if (!std::isfinite(v)) throw NumericalError("ImageGrid contains non-finite value");
}

Sinogram::Sinogram(std::vector<int> angle_list, int num_detectors)
    : angles(std::move(angle_list)),
      detectors(num_detectors),
      data(angles.size() * static_cast<size_t>(num_detectors), 0.0),
      noise_sigma_per_row(angles.size(), 0.0) {}

void Sinogram::validate() const {
    if (data.size() != angles.size() * static_cast<size_t>(detectors))
        throw ShapeError("Sinogram data length does not match angles * detectors");
    for (size_t i = 1; i < angles.size(); ++i)
        if (angles[i] <= angles[i - 1])
            throw DomainError("Sinogram angle indices must be strictly increasing");
    if (noise_sigma_per_row.size() != angles.size())
        throw ShapeError("Sinogram sigma list length does not match angle count");
    for (double s : noise_sigma_per_row)
        if (s < 0.0) throw DomainError("Sinogram sigma must be >= 0");
}

double mse(const ImageGrid& reference, const ImageGrid& candidate) {
    if (!reference.same_shape(candidate))
        throw ShapeError("mse: dimension mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < reference.data.size(); ++i) {
        const double d = reference.data[i] - candidate.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(reference.data.size());
}

double psnr(const ImageGrid& reference, const ImageGrid& candidate) {
    const double m = mse(reference, candidate);
    if (m == 0.0) return kPsnrCap;
    const double value = 10.0 * std::log10(1.0 / m);
    return std::min(value, kPsnrCap);
}

}  // namespace ctlab
