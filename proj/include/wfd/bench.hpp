#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wfd/degrade.hpp"
#include "wfd/image.hpp"
#include "wfd/solvers.hpp"

namespace wfd::bench {

/// A solver entry of an experiment with its parameter grid.
struct SolverGrid {
    std::string name;  ///< split_bregman, mdal, nonlocal_mdal, proposed or oracle
    SolverKind kind = SolverKind::mdal;
    bool oracle = false;
    std::vector<double> lambdas;
    std::vector<double> nus;
    std::optional<double> mu;  ///< overrides the solver default
    std::optional<double> gamma;
};

struct ExperimentConfig {
    /// Image files, or procedural fixtures written as "fixture:<name>".
    std::vector<std::string> images;
    /// "I".."IV" or "kernel:<path>" (plain-text tap rows).
    std::string blur = "III";
    /// Noise level; defaults to the level paired with the blur type.
    std::optional<double> sigma;
    std::uint64_t seed = 0;
    std::vector<SolverGrid> solvers;  ///< empty: degrade only
    SolverParams base;                ///< everything except lambda and nu
    std::filesystem::path output_dir = "bench_out";
    /// Wall-clock seconds in the CSV `seconds` column. Off keeps outputs byte-reproducible.
    bool record_timing = false;
    int threads = 1;
};

/// Parses `key = value` lines ('#' starts a comment). Relative paths resolve
/// against `base_dir`. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Accepts plain numbers and "sqrt(x)".
double parse_number(const std::string& text);

struct RunRecord {
    std::string image;
    std::string blur;
    double sigma = 0.0;
    std::string solver;
    double lambda = 0.0;
    double nu = 0.0;
    int stages = 1;
    double psnr = 0.0;
    double ssim = 0.0;
    double seconds = 0.0;
    int iterations = 0;
    std::vector<double> stage_psnr;
};

struct ImageSummary {
    std::string image;
    double degraded_psnr = 0.0;
    double degraded_ssim = 0.0;
};

struct ExperimentResult {
    std::vector<ImageSummary> degraded;
    std::vector<RunRecord> runs;       ///< every grid point, in config order
    std::vector<RunRecord> best_psnr;  ///< one per (image, solver), same order
    std::vector<RunRecord> best_ssim;
};

/// Degrades each image, runs every solver over its grid, selects the best settings
/// and writes images, runs.csv, summary.csv and summary.txt to the output directory.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Column order: image,blur_type,sigma,solver,lambda,nu,stages,psnr,ssim,seconds,iterations
std::string format_csv(const std::vector<RunRecord>& records, bool with_timing);
std::string format_summary(const ExperimentResult& result);

/// Blurred and noisy observation: A u + noise(sigma, seed).
Image degrade(const Image& clean, const Kernel& kernel, double sigma, std::uint64_t seed);

Kernel resolve_blur(const std::string& spec);
double resolve_sigma(const ExperimentConfig& config);

/// Procedural test images: checkerboard, ramp, stripes, blocks, disk.
Image make_fixture(const std::string& name, int width, int height);
std::vector<std::string> fixture_names();
/// Loads a file or, for "fixture:<name>[:<w>x<h>]", generates a fixture (default 128x128).
Image load_source(const std::string& spec);
std::string source_label(const std::string& spec);

/// High-pass |W u| sorted in decreasing order.
std::vector<double> decay_profile(const Image& image, const FrameConfig& frame = {});
std::string format_decay_csv(const std::vector<double>& profile);
/// Share of the total l1 mass carried by the largest `fraction` of the coefficients.
double top_mass_share(const std::vector<double>& profile, double fraction);

/// Thread count: WFD_THREADS when set to a positive integer, else `fallback`.
int thread_count(int fallback);

}  // namespace wfd::bench
