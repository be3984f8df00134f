#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctlab/grid.hpp"
#include "ctlab/projector.hpp"

namespace ctlab {

enum class PhantomKind { shepp_logan, random_ellipses };

struct PhantomSpec {
    int size = 64;
    PhantomKind kind = PhantomKind::random_ellipses;
    int num_ellipses_min = 1;
    int num_ellipses_max = 4;
    uint64_t seed = 0;
};

// Deterministic modified Shepp-Logan phantom, peak-normalized to [0,1],
// supported on the inscribed disk.
ImageGrid shepp_logan(int size);

// Seeded sum-of-ellipses phantom; the label is the drawn ellipse count.
// Ellipses are confined to the inscribed disk, pixel values clamped to [0,1].
std::pair<ImageGrid, int> random_ellipse_phantom(const PhantomSpec& spec);

// Additive Gaussian sinogram noise, one draw per sample stream.
struct NoiseModel {
    double sigma = 0.0;
};

struct ManifestEntry {
    int id = 0;
    std::string image_path;  // relative to the manifest's directory
    std::string sino_path;
    int label = 0;
    uint64_t seed = 0;
};

// Writes TGRID images, (noisy) sinograms and a "id,image_path,sino_path,
// label,seed" manifest; bit-reproducible from the seeds.
std::vector<ManifestEntry> generate_dataset(const std::vector<PhantomSpec>& specs,
                                            const ProjectionGeometry& geom,
                                            const NoiseModel& noise,
                                            const std::vector<int>& angle_set,
                                            const std::filesystem::path& out_dir);

void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

}  // namespace ctlab
