#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "wfd/image.hpp"

namespace wfd {

/// 2-D blur kernel. The anchor (the tap that lands on the output pixel) sits at
/// (cols/2, rows/2) with integer division, also for even extents.
struct Kernel {
    int rows = 0;
    int cols = 0;
    std::vector<double> taps;  // row-major

    double at(int r, int c) const { return taps[static_cast<std::size_t>(r) * cols + c]; }
    int anchor_row() const noexcept { return rows / 2; }
    int anchor_col() const noexcept { return cols / 2; }
    double sum() const;
};

Kernel make_gaussian_kernel(int size, double sigma);
Kernel make_uniform_kernel(int size);
/// Linear motion of `length` pixels at `angle_deg` counter-clockwise, built the way
/// fspecial('motion') does it: a half-length line rasterized with perpendicular
/// distance weighting, completed by point symmetry and normalized.
Kernel make_motion_kernel(double length, double angle_deg);

/// Plain-text dump: one kernel row per line, taps separated by spaces.
std::string format_kernel(const Kernel& k);
Kernel parse_kernel(const std::string& text);
void save_kernel(const Kernel& k, const std::filesystem::path& path);
Kernel load_kernel(const std::filesystem::path& path);

/// Circular convolution operator A diagonalized by the 2-D DFT.
class BlurOperator {
public:
    BlurOperator() = default;
    BlurOperator(const Kernel& kernel, int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    /// Eigenvalues in half-spectrum layout: height x (width/2 + 1).
    const std::vector<std::complex<double>>& eigenvalues() const noexcept { return eig_; }

    Image apply(const Image& x) const;
    Image adjoint(const Image& x) const;
    /// (A^T A + shift I)^{-1} rhs, exact in the Fourier domain.
    Image solve_diagonal(double shift, const Image& rhs) const;

private:
    struct Plans;
    enum class Mode { forward, adjoint, inverse };
    Image filter(const Image& x, Mode mode, double shift) const;

    int width_ = 0;
    int height_ = 0;
    std::vector<std::complex<double>> eig_;
    std::shared_ptr<const Plans> plans_;
};

BlurOperator make_operator(const Kernel& kernel, int width, int height);

/// Direct spatial circular convolution with the same anchor convention as BlurOperator.
Image circular_convolve(const Kernel& kernel, const Image& x);

/// The four benchmark blurs: I motion(10,20), II gaussian(25,1.6), III uniform 9x9,
/// IV motion(15,30). Accepts "I".."IV" or "1".."4".
Kernel blur_kernel_for_type(const std::string& type);
/// Noise level conventionally paired with each blur type (first listed level).
double default_sigma_for_type(const std::string& type);

}  // namespace wfd
