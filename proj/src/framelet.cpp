#include "wfd/framelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace wfd {

FrameCoeffs::FrameCoeffs(int width, int height, int levels, double fill)
    : width_(width), height_(height), levels_(levels) {
    if (width < 1 || height < 1)
        throw Error("frame coefficients: dimensions must be positive");
    if (levels < 1)
        throw Error("frame coefficients: levels must be >= 1");
    data_.assign(plane_size() * plane_count(), fill);
}

void require_same_shape(const FrameCoeffs& a, const FrameCoeffs& b, const char* what) {
    if (!a.same_shape(b))
        throw Error(std::string(what) + ": frame coefficient shape mismatch");
}

FrameCoeffs& FrameCoeffs::operator+=(const FrameCoeffs& o) {
    require_same_shape(*this, o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += o.data_[i];
    return *this;
}

FrameCoeffs& FrameCoeffs::operator-=(const FrameCoeffs& o) {
    require_same_shape(*this, o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] -= o.data_[i];
    return *this;
}

FrameCoeffs& FrameCoeffs::operator*=(double s) noexcept {
    for (double& v : data_)
        v *= s;
    return *this;
}

double dot(const FrameCoeffs& a, const FrameCoeffs& b) {
    require_same_shape(a, b, "dot");
    const auto av = a.values();
    const auto bv = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i)
        s += av[i] * bv[i];
    return s;
}

FrameWeights FrameWeights::uniform(int width, int height, int levels, double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight))
        throw Error("frame weights must be finite and non-negative");
    FrameCoeffs w(width, height, levels, weight);
    std::ranges::fill(w.lowpass(), 0.0);
    FrameWeights out;
    out.w_ = std::move(w);
    return out;
}

FrameWeights::FrameWeights(FrameCoeffs weights) : w_(std::move(weights)) {
    for (double v : w_.values())
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error("frame weights must be finite and non-negative");
    std::ranges::fill(w_.lowpass(), 0.0);
}

const std::array<std::array<double, 3>, 3>& framelet_masks() noexcept {
    static const std::array<std::array<double, 3>, 3> masks = {{
        {0.25, 0.5, 0.25},
        {std::numbers::sqrt2 / 4.0, 0.0, -std::numbers::sqrt2 / 4.0},
        {-0.25, 0.5, -0.25},
    }};
    return masks;
}

namespace {

int extend_index(int i, int n, Boundary boundary) {
    if (boundary == Boundary::periodic)
        return ((i % n) + n) % n;
    const int period = 2 * n;
    int m = ((i % period) + period) % period;
    return m < n ? m : period - 1 - m;
}

// Neighbour indices at offsets -step and +step along one axis.
struct Taps {
    std::vector<int> minus;
    std::vector<int> plus;
};

Taps make_taps(int n, int step, Boundary boundary) {
    Taps t{std::vector<int>(n), std::vector<int>(n)};
    for (int i = 0; i < n; ++i) {
        t.minus[i] = extend_index(i - step, n, boundary);
        t.plus[i] = extend_index(i + step, n, boundary);
    }
    return t;
}

using Plane = std::vector<double>;
using Mask = std::array<double, 3>;

// out(x, y) = m0 in(x - s, y) + m1 in(x, y) + m2 in(x + s, y)
void filter_rows(const double* in, double* out, int w, int h, const Mask& m, const Taps& t) {
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* dst = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            dst[x] = m[0] * row[t.minus[x]] + m[1] * row[x] + m[2] * row[t.plus[x]];
    }
}

void filter_cols(const double* in, double* out, int w, int h, const Mask& m, const Taps& t) {
    for (int y = 0; y < h; ++y) {
        const double* up = in + static_cast<std::size_t>(t.minus[y]) * w;
        const double* mid = in + static_cast<std::size_t>(y) * w;
        const double* down = in + static_cast<std::size_t>(t.plus[y]) * w;
        double* dst = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            dst[x] = m[0] * up[x] + m[1] * mid[x] + m[2] * down[x];
    }
}

// Transposes of the two passes above; accumulate into `out`.
void filter_rows_adjoint(const double* in, double* out, int w, int h, const Mask& m, const Taps& t) {
    for (int y = 0; y < h; ++y) {
        const double* src = in + static_cast<std::size_t>(y) * w;
        double* row = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            row[t.minus[x]] += m[0] * src[x];
            row[x] += m[1] * src[x];
            row[t.plus[x]] += m[2] * src[x];
        }
    }
}

void filter_cols_adjoint(const double* in, double* out, int w, int h, const Mask& m, const Taps& t) {
    for (int y = 0; y < h; ++y) {
        const double* src = in + static_cast<std::size_t>(y) * w;
        double* up = out + static_cast<std::size_t>(t.minus[y]) * w;
        double* mid = out + static_cast<std::size_t>(y) * w;
        double* down = out + static_cast<std::size_t>(t.plus[y]) * w;
        for (int x = 0; x < w; ++x) {
            up[x] += m[0] * src[x];
            mid[x] += m[1] * src[x];
            down[x] += m[2] * src[x];
        }
    }
}

void validate_config(int width, int height, const FrameConfig& config) {
    if (config.levels < 1 || config.levels > 4)
        throw Error("framelet levels must be in 1..4, got " + std::to_string(config.levels));
    const int min_extent = (1 << config.levels) + 1;
    if (width < min_extent || height < min_extent)
        throw Error("image " + std::to_string(width) + "x" + std::to_string(height) + " too small for " +
                    std::to_string(config.levels) + " framelet level(s); need at least " +
                    std::to_string(min_extent) + " pixels per side");
}

}  // namespace

FrameCoeffs analysis(const Image& u, const FrameConfig& config) {
    const int w = u.width();
    const int h = u.height();
    validate_config(w, h, config);
    const auto& masks = framelet_masks();
    FrameCoeffs out(w, h, config.levels);
    const std::size_t n = out.plane_size();

    Plane low(u.pixels().begin(), u.pixels().end());
    std::array<Plane, 3> rows;
    for (auto& p : rows)
        p.resize(n);
    Plane next_low(n);

    for (int level = 0; level < config.levels; ++level) {
        const int step = 1 << level;
        const Taps tx = make_taps(w, step, config.boundary);
        const Taps ty = make_taps(h, step, config.boundary);
        for (int b = 0; b < 3; ++b)
            filter_rows(low.data(), rows[b].data(), w, h, masks[b], tx);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double* dst = (a == 0 && b == 0) ? next_low.data() : out.band(level, 3 * a + b).data();
                filter_cols(rows[b].data(), dst, w, h, masks[a], ty);
            }
        std::swap(low, next_low);
    }
    std::ranges::copy(low, out.lowpass().begin());
    return out;
}

Image synthesis(const FrameCoeffs& c, Boundary boundary) {
    if (c.levels() < 1 || c.width() < 1)
        throw Error("synthesis: malformed frame coefficients");
    const int w = c.width();
    const int h = c.height();
    validate_config(w, h, FrameConfig{c.levels(), boundary});
    const auto& masks = framelet_masks();
    const std::size_t n = c.plane_size();

    Plane low(c.lowpass().begin(), c.lowpass().end());
    Plane acc(n);
    Plane result(n);
    for (int level = c.levels() - 1; level >= 0; --level) {
        const int step = 1 << level;
        const Taps tx = make_taps(w, step, boundary);
        const Taps ty = make_taps(h, step, boundary);
        std::ranges::fill(result, 0.0);
        for (int b = 0; b < 3; ++b) {
            std::ranges::fill(acc, 0.0);
            for (int a = 0; a < 3; ++a) {
                const double* src = (a == 0 && b == 0) ? low.data() : c.band(level, 3 * a + b).data();
                filter_cols_adjoint(src, acc.data(), w, h, masks[a], ty);
            }
            filter_rows_adjoint(acc.data(), result.data(), w, h, masks[b], tx);
        }
        std::swap(low, result);
    }
    return Image(w, h, std::move(low));
}

double pyramid_max_abs(const FrameCoeffs& c, bool exclude_lowpass) {
    const auto vals = exclude_lowpass ? c.highpass_values() : c.values();
    double m = 0.0;
    for (double v : vals)
        m = std::max(m, std::abs(v));
    return m;
}

}  // namespace wfd
