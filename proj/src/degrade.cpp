#include "wfd/degrade.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

namespace wfd {

double Kernel::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

namespace {

void normalize(Kernel& k) {
    const double s = k.sum();
    for (double& t : k.taps)
        t /= s;
}

}  // namespace

Kernel make_gaussian_kernel(int size, double sigma) {
    if (size < 1)
        throw Error("gaussian kernel size must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error("gaussian kernel sigma must be positive");
    Kernel k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
    const double c = (size - 1) / 2.0;
    for (int r = 0; r < size; ++r)
        for (int col = 0; col < size; ++col) {
            const double dx = col - c;
            const double dy = r - c;
            k.taps[static_cast<std::size_t>(r) * size + col] =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
    normalize(k);
    return k;
}

Kernel make_uniform_kernel(int size) {
    if (size < 1)
        throw Error("uniform kernel size must be >= 1");
    const double tap = 1.0 / (static_cast<double>(size) * size);
    return Kernel{size, size, std::vector<double>(static_cast<std::size_t>(size) * size, tap)};
}

Kernel make_motion_kernel(double length, double angle_deg) {
    if (!(length >= 1.0) || !std::isfinite(length))
        throw Error("motion kernel length must be >= 1");
    if (!std::isfinite(angle_deg))
        throw Error("motion kernel angle must be finite");

    constexpr double eps = DBL_EPSILON;
    constexpr double line_width = 1.0;
    const double half = (length - 1.0) / 2.0;
    double folded = std::fmod(angle_deg, 180.0);
    if (folded < 0.0)
        folded += 180.0;
    const double phi = folded / 180.0 * std::numbers::pi;
    const double cosphi = std::cos(phi);
    const double sinphi = std::sin(phi);
    const double xsign = cosphi > 0.0 ? 1.0 : (cosphi < 0.0 ? -1.0 : 0.0);

    // Half-plane mesh; the eps terms give the right extent at 0 and 90 degrees.
    const int sx = static_cast<int>(std::trunc(half * cosphi + line_width * xsign - length * eps));
    const int sy = static_cast<int>(std::trunc(half * sinphi + line_width - length * eps));
    const int nx = std::abs(sx) + 1;
    const int ny = sy + 1;

    std::vector<double> dist(static_cast<std::size_t>(nx) * ny);
    for (int r = 0; r < ny; ++r)
        for (int c = 0; c < nx; ++c) {
            const double x = c * xsign;
            const double y = r;
            double d = y * cosphi - x * sinphi;
            const double rad = std::sqrt(x * x + y * y);
            if (rad >= half && std::abs(d) <= line_width) {
                const double along = half - std::abs((x + d * sinphi) / cosphi);
                d = std::sqrt(d * d + along * along);
            }
            dist[static_cast<std::size_t>(r) * nx + c] = std::max(0.0, line_width + eps - std::abs(d));
        }

    // Full kernel: 180-degree rotated half in the top-left block, the half itself in the
    // bottom-right block, sharing the center tap.
    Kernel k{2 * ny - 1, 2 * nx - 1, {}};
    k.taps.assign(static_cast<std::size_t>(k.rows) * k.cols, 0.0);
    for (int r = 0; r < ny; ++r)
        for (int c = 0; c < nx; ++c)
            k.taps[static_cast<std::size_t>(r) * k.cols + c] =
                dist[static_cast<std::size_t>(ny - 1 - r) * nx + (nx - 1 - c)];
    for (int r = 0; r < ny; ++r)
        for (int c = 0; c < nx; ++c)
            k.taps[static_cast<std::size_t>(r + ny - 1) * k.cols + (c + nx - 1)] =
                dist[static_cast<std::size_t>(r) * nx + c];
    normalize(k);

    if (cosphi > 0.0) {
        for (int r = 0; r < k.rows / 2; ++r)
            std::swap_ranges(k.taps.begin() + static_cast<std::ptrdiff_t>(r) * k.cols,
                             k.taps.begin() + static_cast<std::ptrdiff_t>(r + 1) * k.cols,
                             k.taps.begin() + static_cast<std::ptrdiff_t>(k.rows - 1 - r) * k.cols);
    }
    return k;
}

std::string format_kernel(const Kernel& k) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (int r = 0; r < k.rows; ++r) {
        for (int c = 0; c < k.cols; ++c) {
            if (c)
                os << ' ';
            os << k.at(r, c);
        }
        os << '\n';
    }
    return os.str();
}

Kernel parse_kernel(const std::string& text) {
    Kernel k;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v = 0.0;
        while (ls >> v)
            row.push_back(v);
        if (!ls.eof())
            throw Error("kernel: non-numeric tap in row " + std::to_string(k.rows + 1));
        if (row.empty())
            continue;
        if (k.rows == 0)
            k.cols = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != k.cols)
            throw Error("kernel: ragged rows");
        k.taps.insert(k.taps.end(), row.begin(), row.end());
        ++k.rows;
    }
    if (k.rows == 0)
        throw Error("kernel: no taps");
    return k;
}

void save_kernel(const Kernel& k, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write kernel '" + path.string() + "'");
    out << format_kernel(k);
}

Kernel load_kernel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open kernel '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_kernel(ss.str());
}

// ---------------------------------------------------------------------------

namespace {

// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

struct BlurOperator::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    Plans(int width, int height) {
        std::vector<double> real(static_cast<std::size_t>(width) * height);
        std::vector<std::complex<double>> spec(static_cast<std::size_t>(height) * (width / 2 + 1));
        auto* c = reinterpret_cast<fftw_complex*>(spec.data());
        std::lock_guard lock(planner_mutex());
        forward = fftw_plan_dft_r2c_2d(height, width, real.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
        backward = fftw_plan_dft_c2r_2d(height, width, c, real.data(),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
        if (!forward || !backward)
            throw Error("fftw planning failed");
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (forward)
            fftw_destroy_plan(forward);
        if (backward)
            fftw_destroy_plan(backward);
    }
};

BlurOperator::BlurOperator(const Kernel& kernel, int width, int height)
    : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw Error("operator dimensions must be positive");
    if (kernel.rows < 1 || kernel.cols < 1 ||
        kernel.taps.size() != static_cast<std::size_t>(kernel.rows) * kernel.cols)
        throw Error("malformed kernel");

    plans_ = std::make_shared<const Plans>(width, height);

    std::vector<double> embedded(static_cast<std::size_t>(width) * height, 0.0);
    for (int r = 0; r < kernel.rows; ++r)
        for (int c = 0; c < kernel.cols; ++c) {
            const int y = ((r - kernel.anchor_row()) % height + height) % height;
            const int x = ((c - kernel.anchor_col()) % width + width) % width;
            embedded[static_cast<std::size_t>(y) * width + x] += kernel.at(r, c);
        }
    eig_.resize(static_cast<std::size_t>(height) * (width / 2 + 1));
    fftw_execute_dft_r2c(plans_->forward, embedded.data(), reinterpret_cast<fftw_complex*>(eig_.data()));
}

Image BlurOperator::filter(const Image& x, Mode mode, double shift) const {
    if (x.width() != width_ || x.height() != height_)
        throw Error("blur operator: dimension mismatch (operator " + std::to_string(width_) + "x" +
                    std::to_string(height_) + ", image " + std::to_string(x.width()) + "x" +
                    std::to_string(x.height()) + ")");
    std::vector<double> in(x.pixels().begin(), x.pixels().end());
    std::vector<std::complex<double>> spec(eig_.size());
    fftw_execute_dft_r2c(plans_->forward, in.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    for (std::size_t i = 0; i < spec.size(); ++i) {
        switch (mode) {
        case Mode::forward:
            spec[i] *= eig_[i];
            break;
        case Mode::adjoint:
            spec[i] *= std::conj(eig_[i]);
            break;
        case Mode::inverse:
            spec[i] /= std::norm(eig_[i]) + shift;
            break;
        }
    }
    Image out(width_, height_);
    fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(spec.data()),
                         out.pixels().data());
    const double scale = 1.0 / static_cast<double>(out.size());
    for (double& v : out.pixels())
        v *= scale;
    return out;
}

Image BlurOperator::apply(const Image& x) const { return filter(x, Mode::forward, 0.0); }

Image BlurOperator::adjoint(const Image& x) const { return filter(x, Mode::adjoint, 0.0); }

Image BlurOperator::solve_diagonal(double shift, const Image& rhs) const {
    if (!(shift > 0.0) || !std::isfinite(shift))
        throw Error("solve_diagonal: shift must be positive");
    return filter(rhs, Mode::inverse, shift);
}

BlurOperator make_operator(const Kernel& kernel, int width, int height) {
    return BlurOperator(kernel, width, height);
}

Image circular_convolve(const Kernel& kernel, const Image& x) {
    const int w = x.width();
    const int h = x.height();
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            double s = 0.0;
            for (int r = 0; r < kernel.rows; ++r)
                for (int c = 0; c < kernel.cols; ++c) {
                    const int sy = (((y - (r - kernel.anchor_row())) % h) + h) % h;
                    const int sx = (((xx - (c - kernel.anchor_col())) % w) + w) % w;
                    s += kernel.at(r, c) * x(sx, sy);
                }
            out(xx, y) = s;
        }
    return out;
}

namespace {

int blur_type_index(const std::string& type) {
    if (type == "I" || type == "1")
        return 1;
    if (type == "II" || type == "2")
        return 2;
    if (type == "III" || type == "3")
        return 3;
    if (type == "IV" || type == "4")
        return 4;
    throw Error("unknown blur type '" + type + "' (expected I, II, III or IV)");
}

}  // namespace

Kernel blur_kernel_for_type(const std::string& type) {
    switch (blur_type_index(type)) {
    case 1:
        return make_motion_kernel(10, 20);
    case 2:
        return make_gaussian_kernel(25, 1.6);
    case 3:
        return make_uniform_kernel(9);
    default:
        return make_motion_kernel(15, 30);
    }
}

double default_sigma_for_type(const std::string& type) {
    switch (blur_type_index(type)) {
    case 1:
    case 4:
        return 3.0;
    case 2:
        return std::sqrt(2.0);
    default:
        return std::sqrt(0.3);
    }
}

}  // namespace wfd
