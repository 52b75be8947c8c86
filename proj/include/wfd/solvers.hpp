#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfd/degrade.hpp"
#include "wfd/framelet.hpp"
#include "wfd/image.hpp"
#include "wfd/nonlocal.hpp"

namespace wfd {

enum class SolverKind {
    split_bregman,  ///< analysis l1, split Bregman
    mdal,           ///< analysis l0, mean doubly augmented Lagrangian
    nonlocal_mdal,  ///< l0-l2 with nonlocal coefficient estimate
    truncated_isd,  ///< truncated l0-l2 with iterative support detection
};

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

struct SolverParams {
    double lambda = 1.0;  ///< uniform high-pass regularization weight
    double mu = 0.01;
    double gamma = 0.003;
    double nu = 0.0;  ///< weight of ||Wu - beta||^2
    double rho = 3.0;
    int levels = 1;
    Boundary boundary = Boundary::symmetric;
    int max_inner = 300;
    /// 0 disables early stopping.
    double tol = 5e-4;
    int stages = 1;

    NonlocalParams nonlocal;
    /// Noise standard deviation of f, used when nonlocal.filtering is not set.
    double noise_sigma = 0.0;
    /// Damping of the Tikhonov guide image used for the nonlocal weights.
    double eta = 0.02;

    /// Defaults for each solver: mu = 0.05 for split Bregman, mu = 0.01 and
    /// gamma = 0.003 for the l0 family, rho = 3 and 3 stages for truncated ISD.
    static SolverParams defaults(SolverKind kind);
    void validate() const;
    FrameConfig frame() const { return FrameConfig{levels, boundary}; }
};

/// Detected support I. true = exempt from thresholding. Low-pass entries are always false.
class SupportMask {
public:
    SupportMask() = default;
    explicit SupportMask(const FrameCoeffs& shape, bool value = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int levels() const noexcept { return levels_; }
    bool congruent(const FrameCoeffs& c) const noexcept {
        return c.width() == width_ && c.height() == height_ && c.levels() == levels_;
    }

    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
    /// Low-pass positions ignore the request and stay false.
    void set(std::size_t i, bool value) noexcept;
    std::size_t count() const noexcept;
    std::span<const std::uint8_t> values() const noexcept { return bits_; }

    friend bool operator==(const SupportMask&, const SupportMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int levels_ = 0;
    std::size_t lowpass_begin_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct ThresholdParams {
    double nu = 0.0;
    double mu = 0.0;
    double gamma = 0.0;
};

/// sign(x) max(|x| - t, 0) entrywise; the low-pass plane (weight 0) passes through.
FrameCoeffs soft_threshold(const FrameCoeffs& c, const FrameWeights& t);

/// Entrywise minimizer of
///   lambda_i [z != 0] + nu/2 (z - x)^2 + mu/2 (z - y)^2 + gamma/2 (z - z0)^2.
/// With v = (nu x + mu y + gamma z0) / s, s = nu + mu + gamma, the result is 0 when
/// v^2 < 2 lambda_i / s and v otherwise.
FrameCoeffs hard_threshold_generalized(const FrameCoeffs& x, const FrameCoeffs& y, const FrameCoeffs& z,
                                       const FrameWeights& lambda, const ThresholdParams& p);

/// As hard_threshold_generalized, but entries inside the support mask are never zeroed.
FrameCoeffs hard_threshold_selective(const FrameCoeffs& x, const FrameCoeffs& y, const FrameCoeffs& z,
                                     const SupportMask& mask, const FrameWeights& lambda,
                                     const ThresholdParams& p);

/// Threshold-ISD: eps = max|alpha_highpass| / rho^(stage + 1); true where |alpha_i| > eps.
SupportMask detect_support(const FrameCoeffs& alpha, double rho, int stage);
double support_threshold(const FrameCoeffs& alpha, double rho, int stage);

/// min(||u_k - u_{k-1}|| / ||u_k||, ||A u_k - f|| / ||f||) < tol. A zero denominator
/// makes its ratio +inf.
bool stopping_criterion(const Image& u_curr, const Image& u_prev, double residual_norm, double f_norm,
                        double tol = 5e-4);

struct StageReport {
    int iterations = 0;
    double seconds = 0.0;
    std::size_t support_size = 0;  ///< |I| used during this stage
    std::optional<double> psnr;
    std::optional<double> ssim;
    Image output;
};

struct SolverReport {
    std::vector<double> relative_change;  ///< one entry per inner iteration, all stages
    std::vector<double> residual;         ///< ||A u - f|| / ||f|| per inner iteration
    std::vector<StageReport> stages;
    Image output;

    int iterations() const noexcept { return static_cast<int>(relative_change.size()); }
    double seconds() const noexcept;
};

/// Snapshot handed to an observer after every inner iteration.
struct IterationView {
    int stage = 0;      ///< 1-based
    int iteration = 0;  ///< 1-based within the stage
    const Image& u;     ///< current iterate
    const Image& output;  ///< reported iterate (running mean for the l0 family, u for split Bregman)
    const FrameCoeffs& alpha;
    const FrameCoeffs& bregman;
    const FrameCoeffs* beta;  ///< null for solvers without a nonlocal term
    bool beta_refreshed;
};

struct RunOptions {
    /// Ground truth for per-stage PSNR / SSIM.
    std::optional<Image> reference;
    /// Oracle mode: support masks are detected on W(oracle) instead of the iterate.
    std::optional<Image> oracle;
    std::function<void(const IterationView&)> observer;
};

SolverReport solve_split_bregman_l1(const Image& f, const BlurOperator& op, const SolverParams& params,
                                    const RunOptions& options = {});
SolverReport solve_mdal_l0(const Image& f, const BlurOperator& op, const SolverParams& params,
                           const RunOptions& options = {});
SolverReport solve_nonlocal_mdal(const Image& f, const BlurOperator& op, const SolverParams& params,
                                 const RunOptions& options = {});
SolverReport solve_truncated_isd(const Image& f, const BlurOperator& op, const SolverParams& params,
                                 const RunOptions& options = {});

SolverReport solve(SolverKind kind, const Image& f, const BlurOperator& op, const SolverParams& params,
                   const RunOptions& options = {});

/// 1/2 ||A u - f||^2 + sum_i lambda |(W u)_i| over the high-pass coefficients.
double l1_objective(const Image& u, const Image& f, const BlurOperator& op, double lambda,
                    const FrameConfig& frame);

}  // namespace wfd
