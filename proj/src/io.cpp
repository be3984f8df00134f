#include "ctlab/io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ctlab {
namespace {

constexpr char kMagic[4] = {'T', 'G', 'R', 'D'};

void write_u32(std::ostream& out, uint32_t v) {
    std::array<unsigned char, 4> b;
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> b;
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw FormatError("TGRID: truncated header");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_tgrid(const std::filesystem::path& path, uint32_t width, uint32_t height,
                 const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out.write(kMagic, 4);
    write_u32(out, width);
    write_u32(out, height);
    // f64 little-endian payload; this code assumes a little-endian host.
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!out) throw FormatError("TGRID: write failed: " + path.string());
}

void read_tgrid(const std::filesystem::path& path, uint32_t& width, uint32_t& height,
                std::vector<double>& values) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open for reading: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("TGRID: bad magic in " + path.string());
    width = read_u32(in);
    height = read_u32(in);
    const size_t count = static_cast<size_t>(width) * height;
    values.resize(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw FormatError("TGRID: payload shorter than header promises in " + path.string());
    char extra;
    if (in.read(&extra, 1)) throw FormatError("TGRID: trailing bytes in " + path.string());
}

}  // namespace

void save_grid(const ImageGrid& grid, const std::filesystem::path& path) {
    grid.validate();
    write_tgrid(path, static_cast<uint32_t>(grid.width), static_cast<uint32_t>(grid.height),
                grid.data);
}

ImageGrid load_grid(const std::filesystem::path& path) {
    uint32_t w = 0, h = 0;
    ImageGrid grid;
    read_tgrid(path, w, h, grid.data);
    grid.width = static_cast<int>(w);
    grid.height = static_cast<int>(h);
    grid.validate();
    return grid;
}

void save_sinogram(const Sinogram& sino, const std::filesystem::path& path) {
    sino.validate();
    write_tgrid(path, static_cast<uint32_t>(sino.detectors),
                static_cast<uint32_t>(sino.num_rows()), sino.data);
    std::filesystem::path sidecar = path;
    sidecar += ".angles";
    std::ofstream out(sidecar);
    if (!out) throw FormatError("cannot open for writing: " + sidecar.string());
    out.precision(17);
    for (int r = 0; r < sino.num_rows(); ++r)
        out << sino.angles[r] << "," << sino.noise_sigma_per_row[r] << "\n";
    if (!out) throw FormatError("sidecar write failed: " + sidecar.string());
}

Sinogram load_sinogram(const std::filesystem::path& path) {
    uint32_t detectors = 0, rows = 0;
    Sinogram sino;
    read_tgrid(path, detectors, rows, sino.data);
    sino.detectors = static_cast<int>(detectors);

    std::filesystem::path sidecar = path;
    sidecar += ".angles";
    std::ifstream in(sidecar);
    if (!in) throw FormatError("missing sinogram sidecar: " + sidecar.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int angle;
        char comma;
        double sigma;
        if (!(ss >> angle >> comma >> sigma) || comma != ',')
            throw FormatError("bad sidecar line '" + line + "' in " + sidecar.string());
        sino.angles.push_back(angle);
        sino.noise_sigma_per_row.push_back(sigma);
    }
    if (sino.angles.size() != rows)
        throw FormatError("sidecar row count does not match sinogram in " + sidecar.string());
    sino.validate();
    return sino;
}

void export_pgm(const ImageGrid& grid, const std::filesystem::path& path) {
    double lo = grid.data.empty() ? 0.0 : grid.data[0];
    double hi = lo;
    for (double v : grid.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    const double range = hi - lo;
    for (double v : grid.data) {
        int byte = range == 0.0 ? 128 : static_cast<int>(std::lround((v - lo) / range * 255.0));
        byte = std::max(0, std::min(255, byte));
        out.put(static_cast<char>(static_cast<unsigned char>(byte)));
    }
    if (!out) throw FormatError("PGM write failed: " + path.string());
}

}  // namespace ctlab
