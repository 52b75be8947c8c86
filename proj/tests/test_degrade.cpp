#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <thread>

#include "support.hpp"

using namespace wfd;

namespace {

// Independent spatial oracle: out(x, y) = sum_{r,c} k(r, c) x(x - c + ac, y - r + ar) mod size.
Image naive_convolve(const Kernel& k, const Image& img) {
    const int w = img.width(), h = img.height();
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int r = 0; r < k.rows; ++r)
                for (int c = 0; c < k.cols; ++c) {
                    int sx = (x - c + k.cols / 2) % w;
                    int sy = (y - r + k.rows / 2) % h;
                    if (sx < 0) sx += w;
                    if (sy < 0) sy += h;
                    s += k.at(r, c) * img(sx, sy);
                }
            out(x, y) = s;
        }
    return out;
}

std::vector<Kernel> kernel_fixtures() {
    std::mt19937_64 rng(11);
    return {blur_kernel_for_type("I"),   blur_kernel_for_type("II"),  blur_kernel_for_type("III"),
            blur_kernel_for_type("IV"),  make_gaussian_kernel(4, 1.0), testing::random_kernel(rng, 3, 5),
            testing::random_kernel(rng, 2, 2), Kernel{1, 1, {1.0}}};
}

}  // namespace

TEST_CASE("kernels are normalized and non-negative") {
    for (const auto& k : kernel_fixtures()) {
        CHECK(k.sum() == doctest::Approx(1.0).epsilon(1e-14));
        for (double t : k.taps)
            CHECK(t >= 0.0);
    }
}

TEST_CASE("uniform kernel taps") {
    const Kernel k = make_uniform_kernel(9);
    CHECK(k.rows == 9);
    CHECK(k.cols == 9);
    for (double t : k.taps)
        CHECK(t == doctest::Approx(1.0 / 81.0).epsilon(1e-15));
}

TEST_CASE("gaussian kernel is symmetric and peaks at the centre") {
    const Kernel k = make_gaussian_kernel(25, 1.6);
    CHECK(k.rows == 25);
    for (int r = 0; r < 25; ++r)
        for (int c = 0; c < 25; ++c) {
            CHECK(k.at(r, c) == doctest::Approx(k.at(24 - r, 24 - c)).epsilon(1e-15));
            CHECK(k.at(r, c) == doctest::Approx(k.at(c, r)).epsilon(1e-15));
            CHECK(k.at(r, c) <= k.at(12, 12));
        }
    // Ratio of neighbouring taps follows exp(-(2d+1) / (2 sigma^2)).
    CHECK(k.at(12, 13) / k.at(12, 12) == doctest::Approx(std::exp(-1.0 / (2 * 1.6 * 1.6))).epsilon(1e-12));
}

TEST_CASE("horizontal motion kernels are box filters") {
    const Kernel odd = make_motion_kernel(9, 0);
    CHECK(odd.rows == 1);
    CHECK(odd.cols == 9);
    for (double t : odd.taps)
        CHECK(t == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

    const Kernel even = make_motion_kernel(10, 0);
    CHECK(even.rows == 1);
    REQUIRE(even.cols == 11);
    CHECK(even.taps.front() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(even.taps.back() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(even.taps[5] == doctest::Approx(0.1).epsilon(1e-12));

    const Kernel vertical = make_motion_kernel(7, 90);
    CHECK(vertical.cols == 1);
    CHECK(vertical.rows == 7);
}

TEST_CASE("motion kernels are point symmetric with odd extents") {
    for (auto [len, angle] : {std::pair{10.0, 20.0}, {15.0, 30.0}, {7.0, 135.0}, {12.0, -40.0}}) {
        const Kernel k = make_motion_kernel(len, angle);
        CHECK(k.rows % 2 == 1);
        CHECK(k.cols % 2 == 1);
        for (int r = 0; r < k.rows; ++r)
            for (int c = 0; c < k.cols; ++c)
                CHECK(k.at(r, c) == doctest::Approx(k.at(k.rows - 1 - r, k.cols - 1 - c)).epsilon(1e-14));
    }
    // A positive angle tilts the streak up to the right.
    const Kernel k = make_motion_kernel(15, 30);
    double top_left = 0.0, top_right = 0.0;
    for (int r = 0; r < k.rows / 2; ++r)
        for (int c = 0; c < k.cols / 2; ++c) {
            top_left += k.at(r, c);
            top_right += k.at(r, k.cols - 1 - c);
        }
    CHECK(top_left == 0.0);
    CHECK(top_right > 0.4);
    CHECK_THROWS_AS(make_motion_kernel(0.5, 0), Error);
}

TEST_CASE("benchmark blur types") {
    CHECK(blur_kernel_for_type("III").rows == 9);
    CHECK(blur_kernel_for_type("3").taps == blur_kernel_for_type("III").taps);
    CHECK(blur_kernel_for_type("II").rows == 25);
    CHECK(default_sigma_for_type("I") == 3.0);
    CHECK(default_sigma_for_type("III") == doctest::Approx(std::sqrt(0.3)));
    CHECK_THROWS_AS(blur_kernel_for_type("V"), Error);
}

TEST_CASE("kernel text format round trips") {
    std::mt19937_64 rng(12);
    const Kernel k = testing::random_kernel(rng, 3, 4);
    const Kernel back = parse_kernel(format_kernel(k));
    CHECK(back.rows == 3);
    CHECK(back.cols == 4);
    for (std::size_t i = 0; i < k.taps.size(); ++i)
        CHECK(back.taps[i] == k.taps[i]);
    CHECK_THROWS_AS(parse_kernel("1 2\n3\n"), Error);
    CHECK_THROWS_AS(parse_kernel(""), Error);
    CHECK_THROWS_AS(parse_kernel("1 x\n"), Error);

    const auto dir = testing::scratch_dir("degrade");
    save_kernel(k, dir / "k.txt");
    CHECK(load_kernel(dir / "k.txt").taps == back.taps);
}

TEST_CASE("frequency-domain blur equals spatial circular convolution") {
    std::mt19937_64 rng(13);
    for (int n : {8, 16})
        for (const auto& k : kernel_fixtures()) {
            const Image x = testing::random_image(rng, n, n);
            const BlurOperator op(k, n, n);
            const Image expect = naive_convolve(k, x);
            CHECK(max_abs_diff(op.apply(x), expect) < 1e-10);
            CHECK(max_abs_diff(circular_convolve(k, x), expect) < 1e-10);
        }
}

TEST_CASE("blur operator handles rectangular and odd sizes") {
    std::mt19937_64 rng(14);
    for (auto [w, h] : {std::pair{9, 14}, {15, 7}, {1, 5}}) {
        const Kernel k = testing::random_kernel(rng, 3, 3);
        const Image x = testing::random_image(rng, w, h);
        CHECK(max_abs_diff(BlurOperator(k, w, h).apply(x), naive_convolve(k, x)) < 1e-10);
    }
}

TEST_CASE("adjoint identity") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto kernels = kernel_fixtures();
        const Kernel& k = kernels[trial % kernels.size()];
        const int w = 8 + trial, h = 20 - trial / 2;
        const BlurOperator op(k, w, h);
        const Image x = testing::random_image(rng, w, h, -1, 1);
        const Image y = testing::random_image(rng, w, h, -1, 1);
        const double lhs = dot(op.apply(x), y);
        const double rhs = dot(x, op.adjoint(y));
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(lhs), 1e-300) + 1e-14);
    }
}

TEST_CASE("solve_diagonal inverts the normal operator") {
    std::mt19937_64 rng(16);
    for (double shift : {1e-3, 0.05, 1.0}) {
        const Kernel k = blur_kernel_for_type("I");
        const BlurOperator op(k, 32, 24);
        const Image rhs = testing::random_image(rng, 32, 24);
        const Image x = op.solve_diagonal(shift, rhs);
        const Image back = op.adjoint(op.apply(x)) + shift * x;
        CHECK(max_abs_diff(back, rhs) < 1e-10 * 255.0);
    }
    CHECK_THROWS_AS(BlurOperator(make_uniform_kernel(3), 8, 8).solve_diagonal(0.0, Image(8, 8)), Error);
}

TEST_CASE("blur preserves constants and rejects bad shapes") {
    const BlurOperator op(blur_kernel_for_type("II"), 20, 20);
    const Image c(20, 20, 42.0);
    CHECK(max_abs_diff(op.apply(c), c) < 1e-12);
    CHECK_THROWS_AS(op.apply(Image(20, 21)), Error);
    CHECK_THROWS_AS(BlurOperator(make_uniform_kernel(3), 0, 4), Error);
}

TEST_CASE("blur operators copied across threads stay consistent") {
    std::mt19937_64 rng(17);
    const BlurOperator op(blur_kernel_for_type("IV"), 64, 48);
    const Image x = testing::random_image(rng, 64, 48);
    const Image expect = op.apply(x);
    std::vector<Image> got(4);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            const BlurOperator copy = op;
            for (int i = 0; i < 20; ++i)
                got[t] = copy.apply(x);
        });
    for (auto& th : pool)
        th.join();
    for (const auto& g : got)
        CHECK(g == expect);
}
