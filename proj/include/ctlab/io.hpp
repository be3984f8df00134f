#pragma once

#include <filesystem>
#include <string>

#include "ctlab/grid.hpp"

namespace ctlab {

// TGRID: magic "TGRD", u32le width, u32le height, then width*height f64le
// values row-major. Binary so round trips are bit-exact.
void save_grid(const ImageGrid& grid, const std::filesystem::path& path);
ImageGrid load_grid(const std::filesystem::path& path);

// Sinograms reuse TGRID with width=detectors, height=|angles|, plus a sidecar
// text file (path + ".angles") with one "angle,sigma" line per row.
void save_sinogram(const Sinogram& sino, const std::filesystem::path& path);
Sinogram load_sinogram(const std::filesystem::path& path);

// 8-bit binary PGM, [min,max] mapped linearly to [0,255].
// A constant image maps to mid-gray 128.
void export_pgm(const ImageGrid& grid, const std::filesystem::path& path);

}  // namespace ctlab
