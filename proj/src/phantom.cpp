#include "ctlab/phantom.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ctlab/io.hpp"

namespace ctlab {
namespace {

struct Ellipse {
    double value;   // additive intensity
    double a, b;    // semi-axes in unit-disk coordinates
    double x0, y0;  // center
    double phi;     // rotation, radians
};

void render_ellipses(ImageGrid& img, const std::vector<Ellipse>& ellipses) {
    const int n = img.width;
    const double c = 0.5 * (n - 1);
    const double scale = 2.0 / n;  // pixel -> unit-disk coordinates
    for (int row = 0; row < n; ++row) {
        const double y = (c - row) * scale;
        for (int col = 0; col < n; ++col) {
            const double x = (col - c) * scale;
            if (x * x + y * y > 1.0) continue;  // keep support on the inscribed disk
            double v = img.at(row, col);
            for (const Ellipse& e : ellipses) {
                const double dx = x - e.x0;
                const double dy = y - e.y0;
                const double ct = std::cos(e.phi);
                const double st = std::sin(e.phi);
                const double u = dx * ct + dy * st;
                const double w = -dx * st + dy * ct;
                if ((u * u) / (e.a * e.a) + (w * w) / (e.b * e.b) <= 1.0) v += e.value;
            }
            img.at(row, col) = v;
        }
    }
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

ImageGrid shepp_logan(int size) {
    if (size < 16) throw DomainError("shepp_logan: size must be >= 16");
    // Modified Shepp-Logan intensities (Toft), shrunk slightly so the head
    // stays strictly inside the inscribed disk.
    const double s = 0.98;
    const std::vector<Ellipse> ellipses = {
        {1.0, .69 * s, .92 * s, 0, 0, 0},
        {-0.8, .6624 * s, .8740 * s, 0, -.0184 * s, 0},
        {-0.2, .1100 * s, .3100 * s, .22 * s, 0, deg(-18)},
        {-0.2, .1600 * s, .4100 * s, -.22 * s, 0, deg(18)},
        {0.1, .2100 * s, .2500 * s, 0, .35 * s, 0},
        {0.1, .0460 * s, .0460 * s, 0, .1 * s, 0},
        {0.1, .0460 * s, .0460 * s, 0, -.1 * s, 0},
        {0.1, .0460 * s, .0230 * s, -.08 * s, -.605 * s, 0},
        {0.1, .0230 * s, .0230 * s, 0, -.606 * s, 0},
        {0.1, .0230 * s, .0460 * s, .06 * s, -.605 * s, 0},
    };
    ImageGrid img(size, size, 0.0);
    render_ellipses(img, ellipses);
    double peak = 0.0;
    for (double& v : img.data) {
        v = std::max(v, 0.0);
        peak = std::max(peak, v);
    }
    if (peak > 0.0)
        for (double& v : img.data) v /= peak;
    return img;
}

std::pair<ImageGrid, int> random_ellipse_phantom(const PhantomSpec& spec) {
    if (spec.size < 16) throw DomainError("random_ellipse_phantom: size must be >= 16");
    if (spec.num_ellipses_min > spec.num_ellipses_max || spec.num_ellipses_min < 0)
        throw DomainError("random_ellipse_phantom: bad ellipse count range");
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> count_dist(spec.num_ellipses_min, spec.num_ellipses_max);
    const int count = count_dist(rng);

    std::uniform_real_distribution<double> axis(0.08, 0.30);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> intensity(0.2, 0.8);

    std::vector<Ellipse> ellipses;
    for (int i = 0; i < count; ++i) {
        Ellipse e;
        e.a = axis(rng);
        e.b = axis(rng);
        e.phi = angle(rng);
        const double margin = std::max(e.a, e.b) + 0.02;
        const double r = unit(rng) * std::max(0.0, 1.0 - margin);
        const double t = unit(rng) * 2.0 * std::numbers::pi;
        e.x0 = r * std::cos(t);
        e.y0 = r * std::sin(t);
        e.value = intensity(rng);
        ellipses.push_back(e);
    }
    ImageGrid img(spec.size, spec.size, 0.0);
    render_ellipses(img, ellipses);
    for (double& v : img.data) v = std::min(std::max(v, 0.0), 1.0);
    return {std::move(img), count};
}

std::vector<ManifestEntry> generate_dataset(const std::vector<PhantomSpec>& specs,
                                            const ProjectionGeometry& geom,
                                            const NoiseModel& noise,
                                            const std::vector<int>& angle_set,
                                            const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<ManifestEntry> entries;
    int id = 0;
    for (const PhantomSpec& spec : specs) {
        auto [img, label] = spec.kind == PhantomKind::shepp_logan
                                ? std::pair<ImageGrid, int>{shepp_logan(spec.size), 0}
                                : random_ellipse_phantom(spec);
        Sinogram sino = forward_project(img, geom, angle_set);
        if (noise.sigma > 0.0) {
            // Noise stream decoupled from the phantom stream so either can be
            // regenerated independently.
            std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
            std::normal_distribution<double> gauss(0.0, noise.sigma);
            for (double& v : sino.data) v += gauss(rng);
            std::fill(sino.noise_sigma_per_row.begin(), sino.noise_sigma_per_row.end(),
                      noise.sigma);
        }
        ManifestEntry entry;
        entry.id = id;
        entry.label = label;
        entry.seed = spec.seed;
        char img_name[32], sino_name[32];
        std::snprintf(img_name, sizeof img_name, "phantom_%04d.tgrd", id);
        std::snprintf(sino_name, sizeof sino_name, "sino_%04d.tgrd", id);
        entry.image_path = img_name;
        entry.sino_path = sino_name;
        save_grid(img, out_dir / entry.image_path);
        save_sinogram(sino, out_dir / entry.sino_path);
        entries.push_back(entry);
        ++id;
    }
    save_manifest(entries, out_dir / "manifest.txt");
    return entries;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    for (const ManifestEntry& e : entries)
        out << e.id << "," << e.image_path << "," << e.sino_path << "," << e.label << ","
            << e.seed << "\n";
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest: " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ManifestEntry e;
        std::string field;
        try {
            std::getline(ss, field, ',');
            e.id = std::stoi(field);
            std::getline(ss, e.image_path, ',');
            std::getline(ss, e.sino_path, ',');
            std::getline(ss, field, ',');
            e.label = std::stoi(field);
            std::getline(ss, field, ',');
            e.seed = std::stoull(field);
        } catch (const std::exception&) {
            throw FormatError("bad manifest line '" + line + "' in " + path.string());
        }
        entries.push_back(e);
    }
    return entries;
}

}  // namespace ctlab
