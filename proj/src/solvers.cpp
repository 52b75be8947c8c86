#include "wfd/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace wfd {

std::string to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::split_bregman:
        return "split_bregman";
    case SolverKind::mdal:
        return "mdal";
    case SolverKind::nonlocal_mdal:
        return "nonlocal_mdal";
    case SolverKind::truncated_isd:
        return "proposed";
    }
    return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
    if (name == "split_bregman" || name == "sb" || name == "l1")
        return SolverKind::split_bregman;
    if (name == "mdal" || name == "l0")
        return SolverKind::mdal;
    if (name == "nonlocal_mdal" || name == "nlmdal" || name == "l0l2")
        return SolverKind::nonlocal_mdal;
    if (name == "proposed" || name == "truncated_isd" || name == "isd")
        return SolverKind::truncated_isd;
    throw Error("unknown solver '" + name + "' (expected split_bregman, mdal, nonlocal_mdal or proposed)");
}

SolverParams SolverParams::defaults(SolverKind kind) {
    SolverParams p;
    switch (kind) {
    case SolverKind::split_bregman:
        p.mu = 0.05;
        p.gamma = 0.0;
        p.lambda = 0.02;
        break;
    case SolverKind::mdal:
        p.lambda = 0.1;
        break;
    case SolverKind::nonlocal_mdal:
        p.lambda = 0.1;
        p.nu = 0.001;
        break;
    case SolverKind::truncated_isd:
        p.lambda = 0.1;
        p.nu = 0.001;
        p.stages = 3;
        break;
    }
    return p;
}

void SolverParams::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok)
            throw Error(std::string("invalid solver parameters: ") + msg);
    };
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require(std::isfinite(mu) && mu > 0.0, "mu must be > 0");
    require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
    require(std::isfinite(nu) && nu >= 0.0, "nu must be >= 0");
    require(std::isfinite(rho) && rho > 0.0, "rho must be > 0");
    require(std::isfinite(tol) && tol >= 0.0, "tol must be >= 0 (0 runs max_inner iterations)");
    require(stages >= 1, "stages must be >= 1");
    require(max_inner >= 1, "max_inner must be >= 1");
    require(levels >= 1 && levels <= 4, "levels must be in 1..4");
    require(std::isfinite(eta) && eta > 0.0, "eta must be > 0");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise_sigma must be >= 0");
}

// ---------------------------------------------------------------------------

SupportMask::SupportMask(const FrameCoeffs& shape, bool value)
    : width_(shape.width()),
      height_(shape.height()),
      levels_(shape.levels()),
      lowpass_begin_(shape.plane_size() * shape.lowpass_index()),
      bits_(shape.values().size(), 0) {
    if (value)
        std::fill(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(lowpass_begin_), 1);
}

void SupportMask::set(std::size_t i, bool value) noexcept {
    if (i < lowpass_begin_)
        bits_[i] = value ? 1 : 0;
}

std::size_t SupportMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------

FrameCoeffs soft_threshold(const FrameCoeffs& c, const FrameWeights& t) {
    require_same_shape(c, t.coeffs(), "soft_threshold");
    FrameCoeffs out = c;
    auto v = out.values();
    const auto tv = t.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]) - tv[i];
        v[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
    }
    return out;
}

namespace {

void check_threshold_inputs(const FrameCoeffs& x, const FrameCoeffs& y, const FrameCoeffs& z,
                            const FrameWeights& lambda, const ThresholdParams& p) {
    require_same_shape(x, y, "hard_threshold");
    require_same_shape(x, z, "hard_threshold");
    require_same_shape(x, lambda.coeffs(), "hard_threshold");
    if (!(p.nu >= 0.0 && p.mu >= 0.0 && p.gamma >= 0.0) || !(p.nu + p.mu + p.gamma > 0.0))
        throw Error("hard_threshold: need nu, mu, gamma >= 0 with a positive sum");
}

// mask == nullptr means T is everything.
FrameCoeffs hard_threshold_impl(const FrameCoeffs& x, const FrameCoeffs& y, const FrameCoeffs& z,
                                const SupportMask* mask, const FrameWeights& lambda,
                                const ThresholdParams& p) {
    FrameCoeffs out(x.width(), x.height(), x.levels());
    const double s = p.nu + p.mu + p.gamma;
    const auto xv = x.values();
    const auto yv = y.values();
    const auto zv = z.values();
    const auto lv = lambda.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        const double v = (p.nu * xv[i] + p.mu * yv[i] + p.gamma * zv[i]) / s;
        const bool truncated = mask && (*mask)[i];
        ov[i] = (!truncated && v * v < 2.0 * lv[i] / s) ? 0.0 : v;
    }
    return out;
}

}  // namespace

FrameCoeffs hard_threshold_generalized(const FrameCoeffs& x, const FrameCoeffs& y, const FrameCoeffs& z,
                                       const FrameWeights& lambda, const ThresholdParams& p) {
    check_threshold_inputs(x, y, z, lambda, p);
    return hard_threshold_impl(x, y, z, nullptr, lambda, p);
}

FrameCoeffs hard_threshold_selective(const FrameCoeffs& x, const FrameCoeffs& y, const FrameCoeffs& z,
                                     const SupportMask& mask, const FrameWeights& lambda,
                                     const ThresholdParams& p) {
    check_threshold_inputs(x, y, z, lambda, p);
    if (!mask.congruent(x))
        throw Error("hard_threshold_selective: support mask shape mismatch");
    return hard_threshold_impl(x, y, z, &mask, lambda, p);
}

double support_threshold(const FrameCoeffs& alpha, double rho, int stage) {
    if (!(rho > 0.0))
        throw Error("detect_support: rho must be positive");
    if (stage < 1)
        throw Error("detect_support: stage must be >= 1");
    return pyramid_max_abs(alpha, true) / std::pow(rho, stage + 1);
}

SupportMask detect_support(const FrameCoeffs& alpha, double rho, int stage) {
    const double eps = support_threshold(alpha, rho, stage);
    SupportMask mask(alpha);
    const auto hv = alpha.highpass_values();
    for (std::size_t i = 0; i < hv.size(); ++i)
        if (std::abs(hv[i]) > eps)
            mask.set(i, true);
    return mask;
}

bool stopping_criterion(const Image& u_curr, const Image& u_prev, double residual_norm, double f_norm,
                        double tol) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double u_norm = norm2(u_curr);
    const double change = u_norm > 0.0 ? distance2(u_curr, u_prev) / u_norm : inf;
    const double fit = f_norm > 0.0 ? residual_norm / f_norm : inf;
    return std::min(change, fit) < tol;
}

double SolverReport::seconds() const noexcept {
    double s = 0.0;
    for (const auto& st : stages)
        s += st.seconds;
    return s;
}

double l1_objective(const Image& u, const Image& f, const BlurOperator& op, double lambda,
                    const FrameConfig& frame) {
    const double fit = distance2(op.apply(u), f);
    const auto hv = analysis(u, frame).highpass_values();
    double l1 = 0.0;
    for (double v : hv)
        l1 += std::abs(v);
    return 0.5 * fit * fit + lambda * l1;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kDivergenceLimit = 1e6;

void check_problem(const Image& f, const BlurOperator& op, const SolverParams& params,
                   const RunOptions& options) {
    params.validate();
    if (f.width() != op.width() || f.height() != op.height())
        throw Error("observation and blur operator differ in size");
    if (!f.all_finite())
        throw Error("observation contains non-finite values");
    if (options.reference)
        require_same_shape(f, *options.reference, "reference image");
    if (options.oracle)
        require_same_shape(f, *options.oracle, "oracle image");
}

struct Progress {
    double change;
    double residual;
    bool stop;
};

// Records one iteration and evaluates the stopping rule on the reported sequence.
Progress track(const Image& current, const Image& previous, const Image& f, double f_norm,
               const BlurOperator& op, const SolverParams& params, SolverReport& report) {
    const double cur_norm = norm2(current);
    const double change = cur_norm > 0.0 ? distance2(current, previous) / cur_norm
                                         : std::numeric_limits<double>::infinity();
    const double residual_norm = distance2(op.apply(current), f);
    const double residual = f_norm > 0.0 ? residual_norm / f_norm : std::numeric_limits<double>::infinity();
    if (!current.all_finite() || (std::isfinite(change) && change > kDivergenceLimit))
        throw Error("solver diverged: relative change " + std::to_string(change));
    report.relative_change.push_back(change);
    report.residual.push_back(residual);
    return {change, residual, stopping_criterion(current, previous, residual_norm, f_norm, params.tol)};
}

void finish_stage(StageReport& stage, const Image& output, Clock::time_point start, const RunOptions& options) {
    stage.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    stage.output = output;
    if (options.reference) {
        stage.psnr = psnr(*options.reference, output);
        if (output.width() >= 11 && output.height() >= 11)
            stage.ssim = ssim(*options.reference, output);
    }
}

enum class L0Variant { plain, nonlocal, truncated };

// Mean doubly augmented Lagrangian iterations shared by the l0 family. The plain
// variant keeps beta at zero with nu = 0; the truncated variant runs several
// stages with selective thresholding against the detected support.
SolverReport run_l0_family(const Image& f, const BlurOperator& op, const SolverParams& params,
                           const RunOptions& options, L0Variant variant) {
    check_problem(f, op, params, options);
    const FrameConfig frame = params.frame();
    const Image atf = op.adjoint(f);
    const double f_norm = norm2(f);
    const bool nonlocal = variant != L0Variant::plain;
    const int stages = variant == L0Variant::truncated ? params.stages : 1;
    const ThresholdParams tp{nonlocal ? params.nu : 0.0, params.mu, params.gamma};
    const double shift = params.mu + params.gamma;

    Image u = f;
    FrameCoeffs alpha = analysis(u, frame);
    FrameCoeffs bregman(f.width(), f.height(), params.levels);
    FrameCoeffs beta(f.width(), f.height(), params.levels);
    const FrameWeights lambda = FrameWeights::uniform_like(alpha, params.lambda);

    std::optional<NeighborTable> table;
    if (nonlocal) {
        const auto& nl = params.nonlocal;
        double h = nl.filtering;
        if (!(h > 0.0))
            h = default_filtering(params.noise_sigma, nl.patch_size);
        if (!(h > 0.0))
            throw Error("nonlocal weights need a filtering parameter or a positive noise sigma");
        const Image guide = tikhonov_initial(f, op, params.eta);
        table = build_neighbor_table(guide, nl.patch_size, nl.window_size, nl.neighbors, h);
        beta = estimate_beta(*table, analysis(guide, frame));
    }

    std::optional<FrameCoeffs> oracle_coeffs;
    if (options.oracle)
        oracle_coeffs = analysis(*options.oracle, frame);

    SolverReport report;
    SupportMask mask(alpha);
    Image mean = u;
    for (int stage = 1; stage <= stages; ++stage) {
        if (stage > 1)
            mask = detect_support(oracle_coeffs ? *oracle_coeffs : analysis(mean, frame), params.rho, stage - 1);

        const auto start = Clock::now();
        StageReport st;
        st.support_size = mask.count();
        mean = u;
        FrameCoeffs mean_alpha = alpha;
        for (int k = 1; k <= params.max_inner; ++k) {
            Image rhs = synthesis(alpha - bregman, params.boundary);
            for (std::size_t i = 0; i < rhs.size(); ++i)
                rhs[i] = atf[i] + params.gamma * u[i] + params.mu * rhs[i];
            u = op.solve_diagonal(shift, rhs);

            FrameCoeffs y = analysis(u, frame);
            y += bregman;
            FrameCoeffs next = variant == L0Variant::truncated
                                   ? hard_threshold_selective(beta, y, alpha, mask, lambda, tp)
                                   : hard_threshold_generalized(beta, y, alpha, lambda, tp);
            bregman = y - next;
            alpha = std::move(next);
            const bool refresh = nonlocal && k % 2 == 0;
            if (refresh)
                beta = estimate_beta(*table, alpha);

            const Image previous = mean;
            const double kk = static_cast<double>(k);
            for (std::size_t i = 0; i < mean.size(); ++i)
                mean[i] = (kk * mean[i] + u[i]) / (kk + 1.0);
            auto ma = mean_alpha.values();
            const auto av = alpha.values();
            for (std::size_t i = 0; i < ma.size(); ++i)
                ma[i] = (kk * ma[i] + av[i]) / (kk + 1.0);

            const Progress pr = track(mean, previous, f, f_norm, op, params, report);
            st.iterations = k;
            if (options.observer)
                options.observer(IterationView{stage, k, u, mean, alpha, bregman, nonlocal ? &beta : nullptr, refresh});
            if (pr.stop)
                break;
        }
        finish_stage(st, mean, start, options);
        report.stages.push_back(std::move(st));
        // Warm start for the next stage from the mean iterates.
        u = mean;
        alpha = std::move(mean_alpha);
    }
    report.output = mean;
    return report;
}

}  // namespace

SolverReport solve_split_bregman_l1(const Image& f, const BlurOperator& op, const SolverParams& params,
                                    const RunOptions& options) {
    check_problem(f, op, params, options);
    const FrameConfig frame = params.frame();
    const Image atf = op.adjoint(f);
    const double f_norm = norm2(f);

    Image u = f;
    FrameCoeffs alpha = analysis(u, frame);
    FrameCoeffs bregman(f.width(), f.height(), params.levels);
    const FrameWeights shrink = FrameWeights::uniform_like(alpha, params.lambda / params.mu);

    SolverReport report;
    StageReport st;
    const auto start = Clock::now();
    for (int k = 1; k <= params.max_inner; ++k) {
        Image rhs = synthesis(alpha - bregman, params.boundary);
        for (std::size_t i = 0; i < rhs.size(); ++i)
            rhs[i] = atf[i] + params.mu * rhs[i];
        Image next = op.solve_diagonal(params.mu, rhs);

        FrameCoeffs y = analysis(next, frame);
        y += bregman;
        alpha = soft_threshold(y, shrink);
        bregman = y - alpha;

        const Progress pr = track(next, u, f, f_norm, op, params, report);
        u = std::move(next);
        st.iterations = k;
        if (options.observer)
            options.observer(IterationView{1, k, u, u, alpha, bregman, nullptr, false});
        if (pr.stop)
            break;
    }
    finish_stage(st, u, start, options);
    report.stages.push_back(std::move(st));
    report.output = u;
    return report;
}

SolverReport solve_mdal_l0(const Image& f, const BlurOperator& op, const SolverParams& params,
                           const RunOptions& options) {
    return run_l0_family(f, op, params, options, L0Variant::plain);
}

SolverReport solve_nonlocal_mdal(const Image& f, const BlurOperator& op, const SolverParams& params,
                                 const RunOptions& options) {
    return run_l0_family(f, op, params, options, L0Variant::nonlocal);
}

SolverReport solve_truncated_isd(const Image& f, const BlurOperator& op, const SolverParams& params,
                                 const RunOptions& options) {
    return run_l0_family(f, op, params, options, L0Variant::truncated);
}

SolverReport solve(SolverKind kind, const Image& f, const BlurOperator& op, const SolverParams& params,
                   const RunOptions& options) {
    switch (kind) {
    case SolverKind::split_bregman:
        return solve_split_bregman_l1(f, op, params, options);
    case SolverKind::mdal:
        return solve_mdal_l0(f, op, params, options);
    case SolverKind::nonlocal_mdal:
        return solve_nonlocal_mdal(f, op, params, options);
    case SolverKind::truncated_isd:
        return solve_truncated_isd(f, op, params, options);
    }
    throw Error("unknown solver kind");
}

}  // namespace wfd
