#include "wfd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>

namespace wfd {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw Error("image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1)
        throw Error("image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height)
        throw Error("image data length does not match dimensions");
}

bool Image::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a.width() << "x" << a.height() << " vs "
           << b.width() << "x" << b.height() << ")";
        throw Error(os.str());
    }
}

double dot(const Image& a, const Image& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(const Image& a) {
    double s = 0.0;
    for (double v : a.pixels())
        s += v * v;
    return std::sqrt(s);
}

double distance2(const Image& a, const Image& b) {
    require_same_shape(a, b, "distance2");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double max_abs_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Image operator+(const Image& a, const Image& b) {
    require_same_shape(a, b, "operator+");
    Image out = a;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += b[i];
    return out;
}

Image operator-(const Image& a, const Image& b) {
    require_same_shape(a, b, "operator-");
    Image out = a;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] -= b[i];
    return out;
}

Image operator*(double s, const Image& a) {
    Image out = a;
    for (double& v : out.pixels())
        v *= s;
    return out;
}

double psnr(const Image& reference, const Image& candidate) {
    require_same_shape(reference, candidate, "psnr");
    const double err = distance2(reference, candidate);
    if (err == 0.0)
        return std::numeric_limits<double>::infinity();
    const double rmse = err / std::sqrt(static_cast<double>(reference.size()));
    return 20.0 * std::log10(255.0 / rmse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

// Separable "valid" Gaussian filtering: output is (w-10) x (h-10).
std::vector<double> gaussian_valid(std::span<const double> in, int w, int h,
                                   const std::vector<double>& g) {
    const int ow = w - kSsimWindow + 1;
    const int oh = h - kSsimWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                s += g[k] * in[static_cast<std::size_t>(y) * w + x + k];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                s += g[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

}  // namespace

double ssim(const Image& reference, const Image& candidate) {
    require_same_shape(reference, candidate, "ssim");
    const int w = reference.width();
    const int h = reference.height();
    if (w < kSsimWindow || h < kSsimWindow)
        throw Error("ssim: image smaller than the 11x11 window");

    std::vector<double> g(kSsimWindow);
    double gsum = 0.0;
    for (int k = 0; k < kSsimWindow; ++k) {
        const double d = k - kSsimWindow / 2;
        g[k] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        gsum += g[k];
    }
    for (double& v : g)
        v /= gsum;

    const std::size_t n = reference.size();
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = reference[i] * reference[i];
        yy[i] = candidate[i] * candidate[i];
        xy[i] = reference[i] * candidate[i];
    }
    const auto mx = gaussian_valid(reference.pixels(), w, h, g);
    const auto my = gaussian_valid(candidate.pixels(), w, h, g);
    const auto sxx = gaussian_valid(xx, w, h, g);
    const auto syy = gaussian_valid(yy, w, h, g);
    const auto sxy = gaussian_valid(xy, w, h, g);

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double mu_x = mx[i];
        const double mu_y = my[i];
        const double var_x = sxx[i] - mu_x * mu_x;
        const double var_y = syy[i] - mu_y * mu_y;
        const double cov = sxy[i] - mu_x * mu_y;
        total += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                 ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
    }
    return total / static_cast<double>(mx.size());
}

Image add_gaussian_noise(const Image& clean, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw Error("noise sigma must be a finite non-negative number");
    Image out = clean;
    if (sigma == 0.0)
        return out;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    for (double& v : out.pixels())
        v += dist(gen);
    return out;
}

std::uint8_t quantize(double value) noexcept {
    if (!(value > 0.0))
        return 0;
    if (value >= 255.0)
        return 255;
    return static_cast<std::uint8_t>(std::floor(value + 0.5));
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n')
                ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#')
        tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
}

int parse_positive(const std::string& tok, const char* field) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 1)
            throw Error("");
        return v;
    } catch (const std::exception&) {
        throw Error(std::string("pgm: invalid ") + field + " '" + tok + "'");
    }
}

}  // namespace

Image decode_pgm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    const std::string magic = next_token(bytes, pos);
    if (magic != "P5")
        throw Error("unsupported image format (expected binary PGM 'P5', got '" + magic + "')");
    const int w = parse_positive(next_token(bytes, pos), "width");
    const int h = parse_positive(next_token(bytes, pos), "height");
    const int maxval = parse_positive(next_token(bytes, pos), "maxval");
    if (maxval != 255)
        throw Error("pgm: only maxval 255 is supported");
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= bytes.size())
        throw Error("pgm: truncated header");
    ++pos;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() - pos < n)
        throw Error("pgm: truncated raster");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i)
        data[i] = bytes[pos + i];
    return Image(w, h, std::move(data));
}

std::vector<std::uint8_t> encode_pgm(const Image& image) {
    const std::string header =
        "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.size());
    for (double v : image.pixels())
        out.push_back(quantize(v));
    return out;
}

Image load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open image '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void save_image(const Image& image, const std::filesystem::path& path) {
    if (image.empty())
        throw Error("cannot save an empty image");
    const auto bytes = encode_pgm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write image '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("write failed for '" + path.string() + "'");
}

}  // namespace wfd
