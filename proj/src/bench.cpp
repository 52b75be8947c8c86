#include "wfd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

namespace wfd::bench {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s))
        out.push_back(parse_number(item));
    if (out.empty())
        throw Error("empty numeric list");
    return out;
}

int parse_int(const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw Error("expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "on" || s == "true" || s == "yes" || s == "1")
        return true;
    if (s == "off" || s == "false" || s == "no" || s == "0")
        return false;
    throw Error("expected on/off, got '" + s + "'");
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    std::string body = t;
    bool root = false;
    if (t.rfind("sqrt(", 0) == 0 && t.size() > 6 && t.back() == ')') {
        body = t.substr(5, t.size() - 6);
        root = true;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(body, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != body.size() || !std::isfinite(v))
        throw Error("expected a number or sqrt(number), got '" + t + "'");
    if (root) {
        if (v < 0.0)
            throw Error("sqrt of a negative number in '" + t + "'");
        v = std::sqrt(v);
    }
    return v;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    cfg.base = SolverParams::defaults(SolverKind::truncated_isd);
    std::vector<std::string> solver_names;
    std::vector<double> lambda_all, nu_all;
    std::vector<std::pair<std::string, std::vector<double>>> lambda_by, nu_by;
    std::vector<std::pair<std::string, double>> mu_by, gamma_by;

    auto resolve = [&](const std::string& p) {
        if (p.rfind("fixture:", 0) == 0 || p.rfind("kernel:", 0) == 0 || base_dir.empty())
            return p;
        const std::filesystem::path path(p);
        return path.is_absolute() ? p : (base_dir / path).string();
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "image" || key == "images") {
                for (const auto& item : split_list(value))
                    cfg.images.push_back(resolve(item));
            } else if (key == "blur") {
                cfg.blur = value.rfind("kernel:", 0) == 0 ? "kernel:" + resolve(value.substr(7)) : value;
            } else if (key == "sigma") {
                cfg.sigma = parse_number(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "solvers" || key == "solver") {
                solver_names = split_list(value);
            } else if (key == "lambda") {
                lambda_all = parse_numbers(value);
            } else if (key == "nu") {
                nu_all = parse_numbers(value);
            } else if (key.rfind("lambda.", 0) == 0) {
                lambda_by.emplace_back(key.substr(7), parse_numbers(value));
            } else if (key.rfind("nu.", 0) == 0) {
                nu_by.emplace_back(key.substr(3), parse_numbers(value));
            } else if (key.rfind("mu.", 0) == 0) {
                mu_by.emplace_back(key.substr(3), parse_number(value));
            } else if (key.rfind("gamma.", 0) == 0) {
                gamma_by.emplace_back(key.substr(6), parse_number(value));
            } else if (key == "stages") {
                cfg.base.stages = parse_int(value);
            } else if (key == "rho") {
                cfg.base.rho = parse_number(value);
            } else if (key == "levels") {
                cfg.base.levels = parse_int(value);
            } else if (key == "boundary") {
                if (value == "symmetric")
                    cfg.base.boundary = Boundary::symmetric;
                else if (value == "periodic")
                    cfg.base.boundary = Boundary::periodic;
                else
                    throw Error("boundary must be 'symmetric' or 'periodic'");
            } else if (key == "max_inner") {
                cfg.base.max_inner = parse_int(value);
            } else if (key == "tol") {
                cfg.base.tol = parse_number(value);
            } else if (key == "eta") {
                cfg.base.eta = parse_number(value);
            } else if (key == "patch") {
                cfg.base.nonlocal.patch_size = parse_int(value);
            } else if (key == "window") {
                cfg.base.nonlocal.window_size = parse_int(value);
            } else if (key == "neighbors") {
                cfg.base.nonlocal.neighbors = parse_int(value);
            } else if (key == "h") {
                cfg.base.nonlocal.filtering = parse_number(value);
            } else if (key == "output") {
                cfg.output_dir = resolve(value);
            } else if (key == "timing") {
                cfg.record_timing = parse_bool(value);
            } else if (key == "threads") {
                cfg.threads = parse_int(value);
            } else {
                throw Error("unknown key '" + key + "'");
            }
        } catch (const Error& e) {
            throw Error("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
        } catch (const std::exception&) {
            throw Error("config line " + std::to_string(lineno) + " (" + key + "): invalid value '" + value + "'");
        }
    }

    if (cfg.images.empty())
        throw Error("config: no images given (set 'images = path, fixture:stripes, ...')");
    for (const auto& name : solver_names) {
        if (name == "none")
            continue;
        SolverGrid g;
        g.name = name;
        g.oracle = name == "oracle";
        g.kind = g.oracle ? SolverKind::truncated_isd : parse_solver_kind(name);
        g.name = g.oracle ? "oracle" : to_string(g.kind);
        const SolverParams d = SolverParams::defaults(g.kind);
        g.lambdas = lambda_all.empty() ? std::vector<double>{d.lambda} : lambda_all;
        const bool uses_nu = g.kind == SolverKind::nonlocal_mdal || g.kind == SolverKind::truncated_isd;
        g.nus = uses_nu ? (nu_all.empty() ? std::vector<double>{d.nu} : nu_all) : std::vector<double>{0.0};
        for (const auto& [n, v] : lambda_by)
            if (n == g.name || n == name)
                g.lambdas = v;
        for (const auto& [n, v] : nu_by)
            if ((n == g.name || n == name) && uses_nu)
                g.nus = v;
        cfg.solvers.push_back(std::move(g));
    }
    for (const auto& list : {lambda_by, nu_by})
        for (const auto& [n, v] : list)
            if (std::none_of(cfg.solvers.begin(), cfg.solvers.end(), [&](const SolverGrid& g) { return g.name == n; }))
                throw Error("config: grid given for solver '" + n + "' which is not listed in 'solvers'");
    for (auto& g : cfg.solvers) {
        for (const auto& [n, v] : mu_by)
            if (n == g.name)
                g.mu = v;
        for (const auto& [n, v] : gamma_by)
            if (n == g.name)
                g.gamma = v;
        if ((g.mu && !(*g.mu > 0.0)) || (g.gamma && *g.gamma < 0.0))
            throw Error("config: mu must be > 0 and gamma >= 0 for solver '" + g.name + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), path.parent_path());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

Image degrade(const Image& clean, const Kernel& kernel, double sigma, std::uint64_t seed) {
    const BlurOperator op(kernel, clean.width(), clean.height());
    return add_gaussian_noise(op.apply(clean), sigma, seed);
}

Kernel resolve_blur(const std::string& spec) {
    if (spec.rfind("kernel:", 0) == 0) {
        Kernel k = load_kernel(spec.substr(7));
        const double s = k.sum();
        if (std::abs(s - 1.0) > 1e-6)
            throw Error("kernel file '" + spec.substr(7) + "' taps sum to " + format_number(s) + ", expected 1");
        return k;
    }
    return blur_kernel_for_type(spec);
}

double resolve_sigma(const ExperimentConfig& config) {
    if (config.sigma)
        return *config.sigma;
    if (config.blur.rfind("kernel:", 0) == 0)
        throw Error("config: 'sigma' is required with an explicit kernel");
    return default_sigma_for_type(config.blur);
}

namespace {

std::string blur_label(const std::string& spec) {
    if (spec.rfind("kernel:", 0) == 0)
        return "kernel-" + std::filesystem::path(spec.substr(7)).stem().string();
    return spec;
}

}  // namespace

std::vector<std::string> fixture_names() { return {"checkerboard", "ramp", "stripes", "blocks", "disk"}; }

Image make_fixture(const std::string& name, int width, int height) {
    Image img(width, height);
    const double pi = std::numbers::pi;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double v = 0.0;
            if (name == "checkerboard") {
                v = ((x / 16 + y / 16) % 2) ? 192.0 : 64.0;
            } else if (name == "ramp") {
                v = 255.0 * x / std::max(1, width - 1);
            } else if (name == "stripes") {
                // Warped stripes of varying orientation, a stand-in for zebra texture.
                const double warp = 6.0 * std::sin(2.0 * pi * y / 48.0) + 0.15 * y;
                const double phase = 2.0 * pi * (x + warp) / 11.0;
                v = std::sin(phase) > 0.0 ? 220.0 : 30.0;
                if (y > height * 2 / 3)
                    v = 0.5 * v + 60.0 * (1.0 + std::cos(2.0 * pi * (x + y) / 23.0));
            } else if (name == "blocks") {
                v = 100.0;
                if (x > width / 8 && x < width / 2 && y > height / 8 && y < height / 2)
                    v = 200.0;
                if (x > width / 3 && x < 7 * width / 8 && y > 5 * height / 8 && y < 7 * height / 8)
                    v = 40.0;
                const double dx = x - 0.7 * width, dy = y - 0.3 * height;
                if (dx * dx + dy * dy < 0.04 * width * height)
                    v = 160.0 + 0.3 * (x - 0.7 * width);
            } else if (name == "disk") {
                const double dx = x - width / 2.0, dy = y - height / 2.0;
                v = dx * dx + dy * dy < 0.1 * width * height ? 210.0 : 50.0;
            } else {
                throw Error("unknown fixture '" + name + "'");
            }
            img(x, y) = v;
        }
    return img;
}

Image load_source(const std::string& spec) {
    if (spec.rfind("fixture:", 0) != 0)
        return load_image(spec);
    std::string rest = spec.substr(8);
    int w = 128, h = 128;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
        const std::string dims = rest.substr(colon + 1);
        rest = rest.substr(0, colon);
        const auto xpos = dims.find('x');
        if (xpos == std::string::npos)
            throw Error("fixture size must look like 128x128, got '" + dims + "'");
        w = parse_int(dims.substr(0, xpos));
        h = parse_int(dims.substr(xpos + 1));
    }
    return make_fixture(rest, w, h);
}

std::string source_label(const std::string& spec) {
    if (spec.rfind("fixture:", 0) == 0) {
        std::string rest = spec.substr(8);
        std::replace(rest.begin(), rest.end(), ':', '-');
        return rest;
    }
    return std::filesystem::path(spec).stem().string();
}

int thread_count(int fallback) {
    if (const char* env = std::getenv("WFD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<int>(v);
    }
    return std::max(1, fallback);
}

// ---------------------------------------------------------------------------

namespace {

struct Task {
    std::size_t image;
    std::size_t solver;
    double lambda;
    double nu;
};

struct Problem {
    std::string label;
    Image truth;
    Image observed;
    BlurOperator op;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.images.empty())
        throw Error("experiment has no images");
    for (const auto& g : config.solvers)
        if (g.lambdas.empty() || g.nus.empty())
            throw Error("empty parameter grid for solver '" + g.name + "'");

    const Kernel kernel = resolve_blur(config.blur);
    const double sigma = resolve_sigma(config);
    const std::string blur = blur_label(config.blur);
    std::filesystem::create_directories(config.output_dir);

    ExperimentResult result;
    std::vector<Problem> problems;
    for (const auto& spec : config.images) {
        Problem p;
        p.label = source_label(spec);
        p.truth = load_source(spec);
        p.op = BlurOperator(kernel, p.truth.width(), p.truth.height());
        p.observed = add_gaussian_noise(p.op.apply(p.truth), sigma, config.seed);
        save_image(p.observed, config.output_dir / (p.label + "_" + blur + "_degraded.pgm"));
        ImageSummary s{p.label, psnr(p.truth, p.observed), 0.0};
        if (p.truth.width() >= 11 && p.truth.height() >= 11)
            s.degraded_ssim = ssim(p.truth, p.observed);
        result.degraded.push_back(s);
        problems.push_back(std::move(p));
    }

    std::vector<Task> tasks;
    for (std::size_t i = 0; i < problems.size(); ++i)
        for (std::size_t s = 0; s < config.solvers.size(); ++s)
            for (double lambda : config.solvers[s].lambdas)
                for (double nu : config.solvers[s].nus)
                    tasks.push_back({i, s, lambda, nu});

    std::vector<RunRecord> records(tasks.size());
    std::vector<Image> outputs(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const Task& task = tasks[t];
            const Problem& prob = problems[task.image];
            const SolverGrid& grid = config.solvers[task.solver];
            SolverParams params = SolverParams::defaults(grid.kind);
            params.levels = config.base.levels;
            params.boundary = config.base.boundary;
            params.max_inner = config.base.max_inner;
            params.tol = config.base.tol;
            params.rho = config.base.rho;
            params.eta = config.base.eta;
            params.nonlocal = config.base.nonlocal;
            if (grid.kind == SolverKind::truncated_isd)
                params.stages = config.base.stages;
            if (grid.mu)
                params.mu = *grid.mu;
            if (grid.gamma)
                params.gamma = *grid.gamma;
            params.lambda = task.lambda;
            params.nu = task.nu;
            params.noise_sigma = sigma;
            RunOptions options;
            options.reference = prob.truth;
            if (grid.oracle)
                options.oracle = prob.truth;
            try {
                const SolverReport rep = solve(grid.kind, prob.observed, prob.op, params, options);
                RunRecord& r = records[t];
                r.image = prob.label;
                r.blur = blur;
                r.sigma = sigma;
                r.solver = grid.name;
                r.lambda = task.lambda;
                r.nu = task.nu;
                r.stages = static_cast<int>(rep.stages.size());
                r.psnr = psnr(prob.truth, rep.output);
                r.ssim = ssim(prob.truth, rep.output);
                r.seconds = rep.seconds();
                r.iterations = rep.iterations();
                for (const auto& st : rep.stages)
                    r.stage_psnr.push_back(st.psnr.value_or(0.0));
                outputs[t] = rep.output;
            } catch (const std::exception& e) {
                errors[t] = prob.label + "/" + grid.name + " (lambda " + format_number(task.lambda) + ", nu " +
                            format_number(task.nu) + "): " + e.what();
            }
        }
    };
    const int nthreads = std::min<int>(thread_count(config.threads), std::max<std::size_t>(1, tasks.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < nthreads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    for (const auto& e : errors)
        if (!e.empty())
            throw Error("run failed: " + e);

    result.runs = records;
    std::size_t t = 0;
    for (std::size_t i = 0; i < problems.size(); ++i)
        for (std::size_t s = 0; s < config.solvers.size(); ++s) {
            const std::size_t count = config.solvers[s].lambdas.size() * config.solvers[s].nus.size();
            std::size_t bp = t, bs = t;
            for (std::size_t k = t; k < t + count; ++k) {
                if (records[k].psnr > records[bp].psnr)
                    bp = k;
                if (records[k].ssim > records[bs].ssim)
                    bs = k;
            }
            result.best_psnr.push_back(records[bp]);
            result.best_ssim.push_back(records[bs]);
            save_image(outputs[bp], config.output_dir /
                                        (problems[i].label + "_" + blur + "_" + config.solvers[s].name + ".pgm"));
            t += count;
        }

    write_text(config.output_dir / "runs.csv", format_csv(result.runs, config.record_timing));
    write_text(config.output_dir / "summary.csv", format_csv(result.best_psnr, config.record_timing));
    write_text(config.output_dir / "summary.txt", format_summary(result));
    return result;
}

std::string format_csv(const std::vector<RunRecord>& records, bool with_timing) {
    std::string out = "image,blur_type,sigma,solver,lambda,nu,stages,psnr,ssim,seconds,iterations\n";
    for (const auto& r : records) {
        out += r.image + "," + r.blur + "," + fixed(r.sigma, 4) + "," + r.solver + "," + format_number(r.lambda) +
               "," + format_number(r.nu) + "," + std::to_string(r.stages) + "," + fixed(r.psnr, 4) + "," +
               fixed(r.ssim, 6) + "," + fixed(with_timing ? r.seconds : 0.0, 3) + "," +
               std::to_string(r.iterations) + "\n";
    }
    return out;
}

std::string format_summary(const ExperimentResult& result) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %10s %10s\n", "image", "PSNR", "SSIM");
    os << "degraded observations\n" << line;
    for (const auto& d : result.degraded) {
        std::snprintf(line, sizeof line, "%-16s %10.2f %10.4f\n", d.image.c_str(), d.degraded_psnr, d.degraded_ssim);
        os << line;
    }
    os << "\nbest settings per solver\n";
    std::snprintf(line, sizeof line, "%-16s %-8s %-8s %-14s %10s %10s %10s %10s %8s %16s\n", "image", "blur", "sigma",
                  "solver", "lambda", "nu", "PSNR", "SSIM", "iters", "best-SSIM");
    os << line;
    for (std::size_t i = 0; i < result.best_psnr.size(); ++i) {
        const auto& r = result.best_psnr[i];
        const auto& q = result.best_ssim[i];
        char ssim_best[64];
        std::snprintf(ssim_best, sizeof ssim_best, "%.4f@%s", q.ssim, format_number(q.lambda).c_str());
        std::snprintf(line, sizeof line, "%-16s %-8s %-8.4f %-14s %10s %10s %10.2f %10.4f %8d %16s\n",
                      r.image.c_str(), r.blur.c_str(), r.sigma, r.solver.c_str(), format_number(r.lambda).c_str(),
                      format_number(r.nu).c_str(), r.psnr, r.ssim, r.iterations, ssim_best);
        os << line;
    }
    return os.str();
}

// ---------------------------------------------------------------------------

std::vector<double> decay_profile(const Image& image, const FrameConfig& frame) {
    const FrameCoeffs c = analysis(image, frame);
    const auto hv = c.highpass_values();
    std::vector<double> mags(hv.size());
    std::transform(hv.begin(), hv.end(), mags.begin(), [](double v) { return std::abs(v); });
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return mags;
}

std::string format_decay_csv(const std::vector<double>& profile) {
    std::string out = "rank,magnitude\n";
    char buf[64];
    for (std::size_t i = 0; i < profile.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, profile[i]);
        out += buf;
    }
    return out;
}

double top_mass_share(const std::vector<double>& profile, double fraction) {
    if (profile.empty())
        return 0.0;
    const double total = std::accumulate(profile.begin(), profile.end(), 0.0);
    if (total == 0.0)
        return 0.0;
    const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(profile.size())));
    return std::accumulate(profile.begin(), profile.begin() + static_cast<std::ptrdiff_t>(std::min(count, profile.size())),
                           0.0) /
           total;
}

}  // namespace wfd::bench
