// wfdeblur: command line front end for degradation, restoration and benchmarks.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "wfd/bench.hpp"

namespace {

using namespace wfd;

struct DegradeArgs {
    std::string input, output, blur = "III", sigma;
    std::uint64_t seed = 0;
};

struct RestoreArgs {
    std::string input, output, blur = "III", solver = "proposed", reference, oracle, sigma, config;
    std::optional<double> lambda, nu, mu, gamma, rho, eta, h, tol;
    std::optional<int> stages, levels, max_inner, patch, window, neighbors;
    std::string boundary;
    bool verbose = false;
};

struct BenchArgs {
    std::string config, output;
    std::optional<int> threads;
};

struct DecayArgs {
    std::string input, output;
    int levels = 1;
    std::string boundary = "symmetric";
};

Boundary parse_boundary(const std::string& s) {
    if (s == "symmetric")
        return Boundary::symmetric;
    if (s == "periodic")
        return Boundary::periodic;
    throw Error("boundary must be 'symmetric' or 'periodic', got '" + s + "'");
}

double sigma_for(const std::string& text, const std::string& blur) {
    if (!text.empty())
        return bench::parse_number(text);
    if (blur.rfind("kernel:", 0) == 0)
        throw Error("--sigma is required with an explicit kernel file");
    return default_sigma_for_type(blur);
}

std::string blur_spec(const std::string& s) {
    if (s.rfind("kernel:", 0) == 0)
        return s;
    for (const char* t : {"I", "II", "III", "IV", "1", "2", "3", "4"})
        if (s == t)
            return s;
    return "kernel:" + s;
}

int run_degrade(const DegradeArgs& a) {
    const std::string spec = blur_spec(a.blur);
    const Image clean = bench::load_source(a.input);
    const Image out = bench::degrade(clean, bench::resolve_blur(spec), sigma_for(a.sigma, spec), a.seed);
    save_image(out, a.output);
    std::printf("%s: PSNR %.2f dB against the input\n", a.output.c_str(), psnr(clean, load_image(a.output)));
    return 0;
}

int run_restore(const RestoreArgs& a) {
    const std::string spec = blur_spec(a.blur);
    const Image f = load_image(a.input);
    const BlurOperator op(bench::resolve_blur(spec), f.width(), f.height());

    const bool oracle = a.solver == "oracle";
    const SolverKind kind = oracle ? SolverKind::truncated_isd : parse_solver_kind(a.solver);
    SolverParams p = SolverParams::defaults(kind);
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in)
            throw Error("cannot open config '" + a.config + "'");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        // Reuse the experiment parser; a dummy image keeps it satisfied.
        const auto cfg = bench::parse_config("images = fixture:disk\n" + text);
        const double lambda = p.lambda, nu = p.nu;
        const int stages = p.stages;
        const double mu = p.mu, gamma = p.gamma;
        p = cfg.base;
        p.lambda = lambda;
        p.nu = nu;
        p.mu = mu;
        p.gamma = gamma;
        p.stages = kind == SolverKind::truncated_isd ? cfg.base.stages : stages;
        for (const auto& g : cfg.solvers)
            if (g.kind == kind && g.oracle == oracle) {
                p.lambda = g.lambdas.front();
                p.nu = g.nus.front();
                if (g.mu)
                    p.mu = *g.mu;
                if (g.gamma)
                    p.gamma = *g.gamma;
            }
        if (cfg.sigma)
            p.noise_sigma = *cfg.sigma;
    }
    if (a.lambda) p.lambda = *a.lambda;
    if (a.nu) p.nu = *a.nu;
    if (a.mu) p.mu = *a.mu;
    if (a.gamma) p.gamma = *a.gamma;
    if (a.rho) p.rho = *a.rho;
    if (a.eta) p.eta = *a.eta;
    if (a.tol) p.tol = *a.tol;
    if (a.h) p.nonlocal.filtering = *a.h;
    if (a.stages) p.stages = *a.stages;
    if (a.levels) p.levels = *a.levels;
    if (a.max_inner) p.max_inner = *a.max_inner;
    if (a.patch) p.nonlocal.patch_size = *a.patch;
    if (a.window) p.nonlocal.window_size = *a.window;
    if (a.neighbors) p.nonlocal.neighbors = *a.neighbors;
    if (!a.boundary.empty()) p.boundary = parse_boundary(a.boundary);
    const bool nonlocal = kind == SolverKind::nonlocal_mdal || kind == SolverKind::truncated_isd;
    if (!a.sigma.empty() || (p.noise_sigma == 0.0 && nonlocal && p.nonlocal.filtering == 0.0))
        p.noise_sigma = sigma_for(a.sigma, spec);

    RunOptions options;
    if (!a.reference.empty())
        options.reference = bench::load_source(a.reference);
    if (oracle) {
        if (a.oracle.empty() && a.reference.empty())
            throw Error("the oracle solver needs --oracle or --reference with the clean image");
        options.oracle = bench::load_source(a.oracle.empty() ? a.reference : a.oracle);
    }
    if (a.verbose)
        options.observer = [](const IterationView& v) {
            if (v.iteration % 10 == 0)
                std::fprintf(stderr, "stage %d iteration %d\n", v.stage, v.iteration);
        };

    const SolverReport rep = solve(kind, f, op, p, options);
    save_image(rep.output, a.output);
    std::printf("%s: %d iterations in %zu stage(s)\n", a.output.c_str(), rep.iterations(), rep.stages.size());
    for (std::size_t s = 0; s < rep.stages.size(); ++s) {
        const auto& st = rep.stages[s];
        if (st.psnr)
            std::printf("  stage %zu: %d iterations, |I| = %zu, PSNR %.2f dB, SSIM %.4f\n", s + 1, st.iterations,
                        st.support_size, *st.psnr, st.ssim.value_or(0.0));
    }
    return 0;
}

int run_bench(const BenchArgs& a) {
    bench::ExperimentConfig cfg = bench::load_config(a.config);
    if (!a.output.empty())
        cfg.output_dir = a.output;
    if (a.threads)
        cfg.threads = *a.threads;
    const auto result = bench::run_experiment(cfg);
    std::cout << bench::format_summary(result);
    std::cout << "\nresults written to " << cfg.output_dir.string() << "\n";
    return 0;
}

int run_decay(const DecayArgs& a) {
    const Image img = bench::load_source(a.input);
    const auto profile = bench::decay_profile(img, FrameConfig{a.levels, parse_boundary(a.boundary)});
    const std::string csv = bench::format_decay_csv(profile);
    if (a.output.empty() || a.output == "-") {
        std::cout << csv;
    } else {
        std::ofstream out(a.output, std::ios::binary);
        if (!out)
            throw Error("cannot write '" + a.output + "'");
        out << csv;
    }
    std::fprintf(stderr, "top 1%% of coefficients: %.1f%% of the l1 mass\n",
                 100.0 * bench::top_mass_share(profile, 0.01));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavelet frame image deblurring"};
    app.require_subcommand(1);

    DegradeArgs da;
    auto* deg = app.add_subcommand("degrade", "blur an image and add Gaussian noise");
    deg->add_option("input", da.input, "clean image (PGM) or fixture:<name>")->required();
    deg->add_option("output", da.output, "output PGM")->required();
    deg->add_option("-b,--blur", da.blur, "blur type I-IV or kernel file")->capture_default_str();
    deg->add_option("-s,--sigma", da.sigma, "noise level, number or sqrt(x); defaults per blur type");
    deg->add_option("--seed", da.seed, "noise seed")->capture_default_str();

    RestoreArgs ra;
    auto* res = app.add_subcommand("restore", "deblur an observed image");
    res->add_option("input", ra.input, "observed image (PGM)")->required()->check(CLI::ExistingFile);
    res->add_option("output", ra.output, "restored PGM")->required();
    res->add_option("-b,--blur", ra.blur, "blur type I-IV or kernel file")->capture_default_str();
    res->add_option("--solver", ra.solver, "split_bregman, mdal, nonlocal_mdal, proposed or oracle")->capture_default_str();
    res->add_option("-c,--config", ra.config, "key=value parameter file")->check(CLI::ExistingFile);
    res->add_option("-s,--sigma", ra.sigma, "noise level (sets the nonlocal filtering scale)");
    res->add_option("--reference", ra.reference, "clean image (PGM or fixture:<name>) for PSNR/SSIM reporting");
    res->add_option("--oracle", ra.oracle, "clean image for oracle support detection");
    res->add_option("--lambda", ra.lambda);
    res->add_option("--nu", ra.nu);
    res->add_option("--mu", ra.mu);
    res->add_option("--gamma", ra.gamma);
    res->add_option("--rho", ra.rho);
    res->add_option("--eta", ra.eta, "damping of the Tikhonov guide image");
    res->add_option("--tol", ra.tol);
    res->add_option("--filtering", ra.h, "nonlocal filtering parameter");
    res->add_option("--stages", ra.stages);
    res->add_option("--levels", ra.levels);
    res->add_option("--max-inner", ra.max_inner);
    res->add_option("--patch", ra.patch);
    res->add_option("--window", ra.window);
    res->add_option("--neighbors", ra.neighbors);
    res->add_option("--boundary", ra.boundary, "symmetric or periodic");
    res->add_flag("-v,--verbose", ra.verbose);

    BenchArgs ba;
    auto* ben = app.add_subcommand("bench", "run an experiment described by a config file");
    ben->add_option("config", ba.config, "key=value experiment file")->required()->check(CLI::ExistingFile);
    ben->add_option("-o,--output", ba.output, "output directory (overrides the config)");
    ben->add_option("-j,--threads", ba.threads, "worker threads (WFD_THREADS takes precedence)");

    DecayArgs ya;
    auto* dec = app.add_subcommand("decay", "sorted magnitudes of the high-pass frame coefficients");
    dec->add_option("input", ya.input, "image (PGM) or fixture:<name>")->required();
    dec->add_option("-o,--output", ya.output, "CSV file, '-' for stdout");
    dec->add_option("-L,--levels", ya.levels, "decomposition levels")->capture_default_str();
    dec->add_option("--boundary", ya.boundary, "symmetric or periodic")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*deg)
            return run_degrade(da);
        if (*res)
            return run_restore(ra);
        if (*ben)
            return run_bench(ba);
        return run_decay(ya);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "wfdeblur: %s\n", e.what());
        return 1;
    }
}
