#pragma once

#include <cstdint>
#include <fstream>
#include <iterator>
#include <filesystem>
#include <random>
#include <string>

#include "wfd/degrade.hpp"
#include "wfd/framelet.hpp"
#include "wfd/image.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return WFD_TEST_DATA; }

inline wfd::Image cameraman() { return wfd::load_image(data_dir() / "cameraman.pgm"); }

inline wfd::Image random_image(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 255.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    wfd::Image img(w, h);
    for (auto& v : img.pixels())
        v = d(rng);
    return img;
}

inline wfd::FrameCoeffs random_coeffs(std::mt19937_64& rng, int w, int h, int levels, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    wfd::FrameCoeffs c(w, h, levels);
    for (auto& v : c.values())
        v = d(rng);
    return c;
}

inline wfd::Kernel random_kernel(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    wfd::Kernel k{rows, cols, {}};
    double s = 0.0;
    for (int i = 0; i < rows * cols; ++i) {
        k.taps.push_back(d(rng));
        s += k.taps.back();
    }
    for (auto& t : k.taps)
        t /= s;
    return k;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wfd_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
