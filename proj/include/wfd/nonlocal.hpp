#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wfd/degrade.hpp"
#include "wfd/framelet.hpp"
#include "wfd/image.hpp"

namespace wfd {

struct NonlocalParams {
    int patch_size = 5;
    int window_size = 11;
    int neighbors = 15;
    /// Filtering parameter of the patch weights; <= 0 selects 10 * sigma^2 * patch_size^2.
    double filtering = 0.0;
};

/// For every pixel, the `neighbors` most similar patches inside its search window
/// and their normalized similarity weights.
class NeighborTable {
public:
    NeighborTable() = default;
    NeighborTable(int width, int height, int neighbors, std::vector<std::int32_t> index,
                  std::vector<double> weight);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int neighbors() const noexcept { return m_; }

    /// Neighbour pixel indices (row-major) of pixel p; entry 0 is p itself.
    std::span<const std::int32_t> neighbors_of(std::size_t p) const noexcept {
        return {index_.data() + p * m_, static_cast<std::size_t>(m_)};
    }
    std::span<const double> weights_of(std::size_t p) const noexcept {
        return {weight_.data() + p * m_, static_cast<std::size_t>(m_)};
    }

private:
    int width_ = 0;
    int height_ = 0;
    int m_ = 0;
    std::vector<std::int32_t> index_;
    std::vector<double> weight_;
};

/// Default filtering parameter for a known noise level.
double default_filtering(double sigma, int patch_size) noexcept;

/// Candidates are the in-image pixels of the window centred at p; patches are
/// compared by unnormalized squared distance with symmetric padding. p itself is
/// always kept; the remaining m-1 are the closest candidates, ties broken by scan
/// order. Weights are exp(-d / h) normalized to sum to one.
NeighborTable build_neighbor_table(const Image& guide, int patch_size, int window_size, int m, double h);

/// beta(p) = sum_i w_i alpha(p_i), independently on every plane.
FrameCoeffs estimate_beta(const NeighborTable& table, const FrameCoeffs& alpha);

/// (A^T A + eta I)^{-1} A^T f.
Image tikhonov_initial(const Image& f, const BlurOperator& op, double eta);

}  // namespace wfd
