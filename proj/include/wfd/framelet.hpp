#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "wfd/image.hpp"

namespace wfd {

/// Boundary extension used by the frame filters.
enum class Boundary {
    symmetric,  ///< half-sample reflection (Neumann)
    periodic,
};

/// Undecimated linear B-spline framelet coefficients.
///
/// Each level holds the 8 high-pass tensor bands (band index 3*a + b for vertical
/// mask h_a and horizontal mask h_b, a, b in {0, 1, 2}, excluding (0, 0)). The
/// low-pass band is stored once, for the coarsest level; intermediate low-pass
/// outputs are fully determined by the coarser levels and are not part of the
/// coefficient vector. Every plane has the source image's dimensions.
///
/// Planes are laid out contiguously: level 0 bands 1..8, level 1 bands 1..8, ...,
/// then the low-pass plane.
class FrameCoeffs {
public:
    static constexpr int kHighBands = 8;

    FrameCoeffs() = default;
    FrameCoeffs(int width, int height, int levels, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int levels() const noexcept { return levels_; }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    std::size_t plane_count() const noexcept { return static_cast<std::size_t>(kHighBands) * levels_ + 1; }
    std::size_t lowpass_index() const noexcept { return plane_count() - 1; }
    bool is_lowpass(std::size_t plane) const noexcept { return plane == lowpass_index(); }

    std::span<double> plane(std::size_t i) noexcept { return {data_.data() + i * plane_size(), plane_size()}; }
    std::span<const double> plane(std::size_t i) const noexcept {
        return {data_.data() + i * plane_size(), plane_size()};
    }
    /// High-pass band `band` in 1..8 at `level` (0 = finest).
    std::span<double> band(int level, int band) noexcept { return plane(band_index(level, band)); }
    std::span<const double> band(int level, int band) const noexcept { return plane(band_index(level, band)); }
    std::span<double> lowpass() noexcept { return plane(lowpass_index()); }
    std::span<const double> lowpass() const noexcept { return plane(lowpass_index()); }

    std::size_t band_index(int level, int band) const noexcept {
        return static_cast<std::size_t>(level) * kHighBands + static_cast<std::size_t>(band - 1);
    }

    /// All coefficients, plane after plane.
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    /// Coefficients of the high-pass planes only (a prefix of values()).
    std::span<const double> highpass_values() const noexcept {
        return {data_.data(), plane_size() * (plane_count() - 1)};
    }

    bool same_shape(const FrameCoeffs& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_ && levels_ == o.levels_;
    }

    FrameCoeffs& operator+=(const FrameCoeffs& o);
    FrameCoeffs& operator-=(const FrameCoeffs& o);
    FrameCoeffs& operator*=(double s) noexcept;
    friend FrameCoeffs operator+(FrameCoeffs a, const FrameCoeffs& b) { return a += b; }
    friend FrameCoeffs operator-(FrameCoeffs a, const FrameCoeffs& b) { return a -= b; }
    friend FrameCoeffs operator*(double s, FrameCoeffs a) { return a *= s; }
    friend bool operator==(const FrameCoeffs&, const FrameCoeffs&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int levels_ = 0;
    std::vector<double> data_;
};

void require_same_shape(const FrameCoeffs& a, const FrameCoeffs& b, const char* what);
double dot(const FrameCoeffs& a, const FrameCoeffs& b);

/// Per-coefficient non-negative regularization weights. The low-pass plane is
/// always zero.
class FrameWeights {
public:
    FrameWeights() = default;
    /// Same weight on every high-pass coefficient.
    static FrameWeights uniform(int width, int height, int levels, double weight);
    static FrameWeights uniform_like(const FrameCoeffs& shape, double weight) {
        return uniform(shape.width(), shape.height(), shape.levels(), weight);
    }
    /// Takes arbitrary per-index weights; the low-pass plane is forced to zero.
    explicit FrameWeights(FrameCoeffs weights);

    const FrameCoeffs& coeffs() const noexcept { return w_; }
    std::span<const double> values() const noexcept { return w_.values(); }

private:
    FrameCoeffs w_;
};

struct FrameConfig {
    int levels = 1;
    Boundary boundary = Boundary::symmetric;
};

/// The 1-D masks h0, h1, h2 of the linear B-spline framelet.
const std::array<std::array<double, 3>, 3>& framelet_masks() noexcept;

/// W u. Requires levels in 1..4 and each image dimension >= 2^levels + 1.
FrameCoeffs analysis(const Image& u, const FrameConfig& config = {});
/// W^T c, the exact transpose of analysis for the same boundary.
Image synthesis(const FrameCoeffs& c, Boundary boundary = Boundary::symmetric);

double pyramid_max_abs(const FrameCoeffs& c, bool exclude_lowpass);

}  // namespace wfd
