#include "wfd/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace wfd {

NeighborTable::NeighborTable(int width, int height, int neighbors, std::vector<std::int32_t> index,
                             std::vector<double> weight)
    : width_(width), height_(height), m_(neighbors), index_(std::move(index)), weight_(std::move(weight)) {
    const std::size_t expected = static_cast<std::size_t>(width) * height * neighbors;
    if (index_.size() != expected || weight_.size() != expected)
        throw Error("neighbor table: storage does not match dimensions");
}

double default_filtering(double sigma, int patch_size) noexcept {
    return 10.0 * sigma * sigma * patch_size * patch_size;
}

namespace {

int reflect(int i, int n) {
    const int period = 2 * n;
    const int m = ((i % period) + period) % period;
    return m < n ? m : period - 1 - m;
}

}  // namespace

NeighborTable build_neighbor_table(const Image& guide, int patch_size, int window_size, int m, double h) {
    if (patch_size < 1 || patch_size % 2 == 0)
        throw Error("patch size must be a positive odd number");
    if (window_size < 1 || window_size % 2 == 0)
        throw Error("search window size must be a positive odd number");
    if (m < 1 || m > window_size * window_size)
        throw Error("neighbor count " + std::to_string(m) + " exceeds the " + std::to_string(window_size) +
                    "x" + std::to_string(window_size) + " search window");
    if (!(h > 0.0) || !std::isfinite(h))
        throw Error("filtering parameter h must be positive");

    const int w = guide.width();
    const int ht = guide.height();
    const int pr = patch_size / 2;
    const int wr = window_size / 2;
    const int min_candidates = std::min(wr + 1, w) * std::min(wr + 1, ht);
    if (min_candidates < m)
        throw Error("image too small: a corner search window holds fewer than " + std::to_string(m) +
                    " candidates");

    // Symmetrically padded guide so every patch is complete.
    const int pw = w + 2 * pr;
    const int ph = ht + 2 * pr;
    std::vector<double> padded(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x)
            padded[static_cast<std::size_t>(y) * pw + x] = guide(reflect(x - pr, w), reflect(y - pr, ht));

    auto patch_distance = [&](int px, int py, int qx, int qy) {
        double d = 0.0;
        for (int dy = 0; dy < patch_size; ++dy) {
            const double* a = &padded[static_cast<std::size_t>(py + dy) * pw + px];
            const double* b = &padded[static_cast<std::size_t>(qy + dy) * pw + qx];
            for (int dx = 0; dx < patch_size; ++dx) {
                const double diff = a[dx] - b[dx];
                d += diff * diff;
            }
        }
        return d;
    };

    const std::size_t n = guide.size();
    std::vector<std::int32_t> index(n * m);
    std::vector<double> weight(n * m);
    std::vector<std::pair<double, std::int32_t>> cand;
    cand.reserve(static_cast<std::size_t>(window_size) * window_size);

    for (int y = 0; y < ht; ++y)
        for (int x = 0; x < w; ++x) {
            cand.clear();
            const int y0 = std::max(0, y - wr), y1 = std::min(ht - 1, y + wr);
            const int x0 = std::max(0, x - wr), x1 = std::min(w - 1, x + wr);
            for (int qy = y0; qy <= y1; ++qy)
                for (int qx = x0; qx <= x1; ++qx) {
                    if (qx == x && qy == y)
                        continue;
                    cand.emplace_back(patch_distance(x, y, qx, qy), qy * w + qx);
                }
            // Row-major pixel index equals scan order, so the pair ordering breaks ties by scan order.
            std::partial_sort(cand.begin(), cand.begin() + (m - 1), cand.end());

            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            std::int32_t* idx = &index[p * m];
            double* wt = &weight[p * m];
            idx[0] = static_cast<std::int32_t>(p);
            wt[0] = 1.0;
            double total = 1.0;
            for (int i = 1; i < m; ++i) {
                idx[i] = cand[i - 1].second;
                wt[i] = std::max(std::exp(-cand[i - 1].first / h), std::numeric_limits<double>::min());
                total += wt[i];
            }
            for (int i = 0; i < m; ++i)
                wt[i] /= total;
        }
    return NeighborTable(w, ht, m, std::move(index), std::move(weight));
}

FrameCoeffs estimate_beta(const NeighborTable& table, const FrameCoeffs& alpha) {
    if (table.width() != alpha.width() || table.height() != alpha.height())
        throw Error("estimate_beta: neighbor table and coefficients differ in size");
    FrameCoeffs beta(alpha.width(), alpha.height(), alpha.levels());
    const std::size_t n = alpha.plane_size();
    for (std::size_t k = 0; k < alpha.plane_count(); ++k) {
        const auto src = alpha.plane(k);
        auto dst = beta.plane(k);
        for (std::size_t p = 0; p < n; ++p) {
            const auto idx = table.neighbors_of(p);
            const auto wt = table.weights_of(p);
            double s = 0.0;
            for (std::size_t i = 0; i < idx.size(); ++i)
                s += wt[i] * src[static_cast<std::size_t>(idx[i])];
            dst[p] = s;
        }
    }
    return beta;
}

Image tikhonov_initial(const Image& f, const BlurOperator& op, double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw Error("tikhonov: eta must be positive");
    return op.solve_diagonal(eta, op.adjoint(f));
}

}  // namespace wfd
