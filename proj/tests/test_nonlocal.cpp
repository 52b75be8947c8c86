#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "support.hpp"
#include "wfd/nonlocal.hpp"

using namespace wfd;

namespace {

int mirror(int i, int n) {
    while (i < 0 || i >= n)
        i = i < 0 ? -1 - i : 2 * n - 1 - i;
    return i;
}

struct Entry {
    std::vector<int> index;
    std::vector<double> weight;
};

// Exhaustive search for one pixel: every in-image window position, full sort.
Entry reference_neighbors(const Image& g, int px, int py, int patch, int window, int m, double h) {
    const int pr = patch / 2, wr = window / 2;
    std::vector<std::tuple<double, int>> all;
    for (int qy = py - wr; qy <= py + wr; ++qy)
        for (int qx = px - wr; qx <= px + wr; ++qx) {
            if (qx < 0 || qy < 0 || qx >= g.width() || qy >= g.height() || (qx == px && qy == py))
                continue;
            double d = 0.0;
            for (int dy = -pr; dy <= pr; ++dy)
                for (int dx = -pr; dx <= pr; ++dx) {
                    const double diff = g(mirror(px + dx, g.width()), mirror(py + dy, g.height())) -
                                        g(mirror(qx + dx, g.width()), mirror(qy + dy, g.height()));
                    d += diff * diff;
                }
            all.emplace_back(d, qy * g.width() + qx);
        }
    std::sort(all.begin(), all.end());
    Entry e;
    e.index.push_back(py * g.width() + px);
    e.weight.push_back(1.0);
    for (int i = 0; i < m - 1; ++i) {
        e.index.push_back(std::get<1>(all[i]));
        e.weight.push_back(std::max(std::exp(-std::get<0>(all[i]) / h), std::numeric_limits<double>::min()));
    }
    double s = 0.0;
    for (double w : e.weight)
        s += w;
    for (double& w : e.weight)
        w /= s;
    return e;
}

}  // namespace

TEST_CASE("neighbor table matches exhaustive search") {
    std::mt19937_64 rng(31);
    const Image g = testing::random_image(rng, 12, 12);
    for (auto [patch, window, m, h] : {std::tuple{3, 5, 6, 5e4}, {5, 7, 10, 2e5}, {1, 3, 4, 100.0}}) {
        const NeighborTable t = build_neighbor_table(g, patch, window, m, h);
        REQUIRE(t.neighbors() == m);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x) {
                const Entry e = reference_neighbors(g, x, y, patch, window, m, h);
                const std::size_t p = static_cast<std::size_t>(y) * 12 + x;
                const auto idx = t.neighbors_of(p);
                const auto wt = t.weights_of(p);
                for (int i = 0; i < m; ++i) {
                    CHECK(idx[i] == e.index[i]);
                    CHECK(wt[i] == doctest::Approx(e.weight[i]).epsilon(1e-12));
                }
            }
    }
}

TEST_CASE("flat image: uniform weights, scan-order neighbours") {
    const NeighborTable t = build_neighbor_table(Image(10, 10, 5.0), 3, 5, 4, 1.0);
    const auto idx = t.neighbors_of(0);
    CHECK(idx[0] == 0);
    CHECK(idx[1] == 1);
    CHECK(idx[2] == 2);
    CHECK(idx[3] == 10);
    const std::size_t centre = 5 * 10 + 5;
    const auto c = t.neighbors_of(centre);
    CHECK(c[0] == 55);
    CHECK(c[1] == 33);
    CHECK(c[2] == 34);
    CHECK(c[3] == 35);
    for (double w : t.weights_of(centre))
        CHECK(w == doctest::Approx(0.25));
}

TEST_CASE("weights are a convex combination with the pixel itself first") {
    std::mt19937_64 rng(32);
    const Image g = testing::random_image(rng, 20, 17);
    const NeighborTable t = build_neighbor_table(g, 5, 11, 15, default_filtering(10.0, 5));
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto idx = t.neighbors_of(p);
        const auto wt = t.weights_of(p);
        CHECK(idx[0] == static_cast<std::int32_t>(p));
        double s = 0.0;
        for (std::size_t i = 0; i < wt.size(); ++i) {
            CHECK(wt[i] > 0.0);
            CHECK(wt[i] <= wt[0]);
            s += wt[i];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
        std::vector<std::int32_t> sorted(idx.begin(), idx.end());
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
}

TEST_CASE("tiny filtering parameter keeps weights strictly positive") {
    std::mt19937_64 rng(33);
    const Image g = testing::random_image(rng, 12, 12);
    const NeighborTable t = build_neighbor_table(g, 3, 5, 5, 1e-9);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto wt = t.weights_of(p);
        CHECK(wt[0] == doctest::Approx(1.0));
        for (double w : wt)
            CHECK(w > 0.0);
    }
}

TEST_CASE("estimate_beta matches the direct weighted sum") {
    std::mt19937_64 rng(34);
    const Image g = testing::random_image(rng, 12, 12);
    const NeighborTable t = build_neighbor_table(g, 3, 7, 8, 3e4);
    const FrameCoeffs alpha = testing::random_coeffs(rng, 12, 12, 2, 5.0);
    const FrameCoeffs beta = estimate_beta(t, alpha);
    for (std::size_t k = 0; k < alpha.plane_count(); ++k)
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x) {
                const Entry e = reference_neighbors(g, x, y, 3, 7, 8, 3e4);
                double s = 0.0;
                for (int i = 0; i < 8; ++i)
                    s += e.weight[i] * alpha.plane(k)[e.index[i]];
                CHECK(beta.plane(k)[y * 12 + x] == doctest::Approx(s).epsilon(1e-12));
            }
}

TEST_CASE("estimate_beta is a contraction in the max norm and keeps constants") {
    std::mt19937_64 rng(35);
    const Image g = testing::random_image(rng, 16, 16);
    const NeighborTable t = build_neighbor_table(g, 5, 9, 12, 1e5);
    const FrameCoeffs alpha = testing::random_coeffs(rng, 16, 16, 1, 3.0);
    const FrameCoeffs beta = estimate_beta(t, alpha);
    for (std::size_t k = 0; k < alpha.plane_count(); ++k) {
        double ma = 0.0, mb = 0.0;
        for (double v : alpha.plane(k))
            ma = std::max(ma, std::abs(v));
        for (double v : beta.plane(k))
            mb = std::max(mb, std::abs(v));
        CHECK(mb <= ma * (1.0 + 1e-15));
    }
    const FrameCoeffs flat = estimate_beta(t, FrameCoeffs(16, 16, 1, -2.0));
    for (double v : flat.values())
        CHECK(v == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK_THROWS_AS(estimate_beta(t, FrameCoeffs(15, 16, 1)), Error);
}

TEST_CASE("invalid table parameters") {
    const Image g(20, 20, 1.0);
    CHECK_THROWS_AS(build_neighbor_table(g, 4, 11, 15, 1.0), Error);
    CHECK_THROWS_AS(build_neighbor_table(g, 5, 10, 15, 1.0), Error);
    CHECK_THROWS_AS(build_neighbor_table(g, 5, 3, 10, 1.0), Error);
    CHECK_THROWS_AS(build_neighbor_table(g, 5, 11, 15, 0.0), Error);
    CHECK_THROWS_AS(build_neighbor_table(Image(3, 3, 1.0), 3, 11, 15, 1.0), Error);
}

TEST_CASE("default filtering scale") {
    CHECK(default_filtering(2.0, 5) == doctest::Approx(1000.0));
    CHECK(default_filtering(0.0, 5) == 0.0);
}

TEST_CASE("tikhonov guide solves the damped normal equations") {
    std::mt19937_64 rng(36);
    const Image f = testing::random_image(rng, 40, 32);
    const BlurOperator op(blur_kernel_for_type("III"), 40, 32);
    const double eta = 0.02;
    const Image u = tikhonov_initial(f, op, eta);
    const Image lhs = op.adjoint(op.apply(u)) + eta * u;
    CHECK(max_abs_diff(lhs, op.adjoint(f)) < 1e-9);
    CHECK_THROWS_AS(tikhonov_initial(f, op, 0.0), Error);
}
