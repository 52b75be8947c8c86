#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfd {

/// Raised for malformed inputs: dimension mismatches, bad parameters, unreadable files.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grayscale intensity grid stored row-major as doubles. Values are nominally
/// in [0, 255] but are never clamped except on file save.
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0);
    Image(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double operator()(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> pixels() noexcept { return data_; }
    std::span<const double> pixels() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool all_finite() const noexcept;

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

void require_same_shape(const Image& a, const Image& b, const char* what);

double dot(const Image& a, const Image& b);
double norm2(const Image& a);
/// ||a - b||_2
double distance2(const Image& a, const Image& b);
double max_abs_diff(const Image& a, const Image& b);

Image operator+(const Image& a, const Image& b);
Image operator-(const Image& a, const Image& b);
Image operator*(double s, const Image& a);

// ---------------------------------------------------------------------------
// Quality metrics

/// Standard PSNR with peak 255: 20*log10(255 / RMSE). Returns +inf for identical images.
double psnr(const Image& reference, const Image& candidate);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 255, averaged over the positions where the window fits.
double ssim(const Image& reference, const Image& candidate);

// ---------------------------------------------------------------------------
// Noise

/// i.i.d. N(0, sigma^2) per pixel from a generator seeded with `seed`.
Image add_gaussian_noise(const Image& clean, double sigma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// File I/O. Only binary PGM (P5, maxval 255) is supported.

Image load_image(const std::filesystem::path& path);
/// Clamps to [0, 255] and rounds half up before writing.
void save_image(const Image& image, const std::filesystem::path& path);

Image decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const Image& image);
std::uint8_t quantize(double value) noexcept;

}  // namespace wfd
