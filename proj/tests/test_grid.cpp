#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ctlab/grid.hpp"
#include "ctlab/io.hpp"
#include "ctlab/phantom.hpp"

using namespace ctlab;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "ctlab_grid_test";
    fs::create_directories(dir);
    return dir;
}
}  // namespace

TEST_CASE("psnr identical images hits the cap") {
    ImageGrid a(8, 8, 0.3);
    CHECK(psnr(a, a) == doctest::Approx(99.0));
}

TEST_CASE("psnr matches the formula for known mse") {
    ImageGrid a(8, 8, 0.0);
    ImageGrid b(8, 8, 0.1);  // MSE = 0.01
    CHECK(mse(a, b) == doctest::Approx(0.01));
    CHECK(psnr(a, b) == doctest::Approx(20.0));
}

TEST_CASE("psnr rejects shape mismatch") {
    ImageGrid a(8, 8, 0.0);
    ImageGrid b(16, 16, 0.0);
    CHECK_THROWS_AS(psnr(a, b), ShapeError);
}

TEST_CASE("psnr is symmetric") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    ImageGrid a(16, 16, 0.0), b(16, 16, 0.0);
    for (auto& v : a.data) v = dist(rng);
    for (auto& v : b.data) v = dist(rng);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-12));
}

TEST_CASE("psnr strictly decreases with growing noise variance") {
    ImageGrid ref = shepp_logan(32);
    int ordered = 0;
    for (uint64_t seed = 0; seed < 12; ++seed) {
        std::mt19937_64 rng(seed);
        double prev = 1e9;
        bool ok = true;
        for (double sigma : {0.01, 0.05, 0.2}) {
            std::normal_distribution<double> noise(0.0, sigma);
            ImageGrid noisy = ref;
            for (auto& v : noisy.data) v += noise(rng);
            const double p = psnr(ref, noisy);
            if (p >= prev) ok = false;
            prev = p;
        }
        if (ok) ++ordered;
    }
    CHECK(ordered >= 11);  // statistical, but the variance steps are large
}

TEST_CASE("grid round trip is bit-exact") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    ImageGrid g(8, 8, 0.0);
    for (auto& v : g.data) v = dist(rng);
    const fs::path path = temp_dir() / "roundtrip.tgrd";
    save_grid(g, path);
    ImageGrid back = load_grid(path);
    CHECK(back.width == 8);
    REQUIRE(back.data.size() == g.data.size());
    for (size_t i = 0; i < g.data.size(); ++i) CHECK(back.data[i] == g.data[i]);
}

TEST_CASE("shepp-logan survives a lossless round trip") {
    ImageGrid g = shepp_logan(64);
    const fs::path path = temp_dir() / "sl.tgrd";
    save_grid(g, path);
    CHECK(psnr(g, load_grid(path)) == doctest::Approx(99.0));
}

TEST_CASE("bad magic is a format error") {
    const fs::path path = temp_dir() / "bad.tgrd";
    std::ofstream out(path, std::ios::binary);
    out << "XXXX";
    std::vector<char> zeros(8 + 64 * sizeof(double), 0);
    out.write(zeros.data(), static_cast<std::streamsize>(zeros.size()));
    out.close();
    CHECK_THROWS_AS(load_grid(path), FormatError);
}

TEST_CASE("truncated payload is a format error") {
    ImageGrid g(8, 8, 1.0);
    const fs::path path = temp_dir() / "trunc.tgrd";
    save_grid(g, path);
    fs::resize_file(path, fs::file_size(path) - 16);
    CHECK_THROWS_AS(load_grid(path), FormatError);
}

TEST_CASE("sinogram round trip keeps angles and sigmas") {
    Sinogram s({3, 7, 19}, 16);
    for (size_t i = 0; i < s.data.size(); ++i) s.data[i] = 0.01 * static_cast<double>(i);
    s.noise_sigma_per_row = {0.0, 0.5, 1.25};
    const fs::path path = temp_dir() / "sino.tgrd";
    save_sinogram(s, path);
    Sinogram back = load_sinogram(path);
    CHECK(back.angles == s.angles);
    CHECK(back.noise_sigma_per_row == s.noise_sigma_per_row);
    CHECK(back.data == s.data);
}

TEST_CASE("pgm header and endpoint mapping") {
    ImageGrid g(8, 8, 0.0);
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = (i % 2 == 0) ? 0.0 : 1.0;
    const fs::path path = temp_dir() / "img.pgm";
    export_pgm(g, path);
    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header == "P5");
    std::getline(in, header);
    CHECK(header == "8 8");
    std::getline(in, header);
    CHECK(header == "255");
    char byte0, byte1;
    in.get(byte0);
    in.get(byte1);
    CHECK(static_cast<unsigned char>(byte0) == 0);
    CHECK(static_cast<unsigned char>(byte1) == 255);
}

TEST_CASE("pgm constant image maps to mid-gray") {
    ImageGrid g(8, 8, 0.7);
    const fs::path path = temp_dir() / "const.pgm";
    export_pgm(g, path);
    std::ifstream in(path, std::ios::binary);
    std::string line;
    for (int i = 0; i < 3; ++i) std::getline(in, line);
    char byte;
    while (in.get(byte)) CHECK(static_cast<unsigned char>(byte) == 128);
}
