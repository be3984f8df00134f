// ctlab command-line front end: every workflow (data generation,
// reconstruction, hyperparameter fitting, policy training/evaluation,
// task-driven evaluation, plotting) behind one binary.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ctlab/hyperlearn.hpp"
#include "ctlab/io.hpp"
#include "ctlab/scanmdp.hpp"
#include "ctlab/taskpipe.hpp"

using namespace ctlab;
namespace fs = std::filesystem;

namespace {

ProjectionGeometry parse_geom(const std::string& text, int detectors) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw DomainError("geometry must be SIZE:ANGLES, got '" + text + "'");
    int size = 0, angles = 0;
    try {
        size = std::stoi(text.substr(0, colon));
        angles = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw DomainError("geometry must be SIZE:ANGLES, got '" + text + "'");
    }
    return ProjectionGeometry(size, angles, detectors);
}

// Reproducibility echo: the effective flat key=value config of the parsed
// subcommand, written into the output directory.
void echo_config(CLI::App* cmd, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "config.txt");
    out << "[" << cmd->get_name() << "]\n" << cmd->config_to_str(false, false);
}

std::vector<double> broadcast(std::vector<double> values, int levels, const char* what) {
    if (values.size() == 1) values.assign(static_cast<size_t>(levels), values[0]);
    if (static_cast<int>(values.size()) != levels)
        throw DomainError(std::string(what) + ": need 1 or `levels` values");
    return values;
}

std::vector<ImageGrid> manifest_images(const fs::path& manifest_path,
                                       std::vector<int>* labels = nullptr) {
    const auto entries = load_manifest(manifest_path);
    const fs::path base = manifest_path.parent_path();
    std::vector<ImageGrid> images;
    for (const ManifestEntry& e : entries) {
        images.push_back(load_grid(base / e.image_path));
        if (labels) labels->push_back(e.label);
    }
    return images;
}

// --- gen-data ---------------------------------------------------------------

struct GenDataArgs {
    std::string out = "dataset";
    int n = 20;
    int size = 64;
    int num_angles = 60;
    int detectors = 0;
    double sigma = 0.0;
    int min_ellipses = 1;
    int max_ellipses = 4;
    uint64_t seed = 0;
};

int run_gen_data(const GenDataArgs& a, CLI::App* cmd) {
    ProjectionGeometry geom(a.size, a.num_angles, a.detectors);
    std::vector<PhantomSpec> specs;
    for (int i = 0; i < a.n; ++i) {
        PhantomSpec s;
        s.size = a.size;
        s.num_ellipses_min = a.min_ellipses;
        s.num_ellipses_max = a.max_ellipses;
        s.seed = a.seed + static_cast<uint64_t>(i);
        specs.push_back(s);
    }
    NoiseModel noise;
    noise.sigma = a.sigma;
    const auto entries = generate_dataset(specs, geom, noise, geom.all_angles(), a.out);
    echo_config(cmd, a.out);
    std::cout << "gen-data: wrote " << entries.size() << " samples to " << a.out << "\n";
    return 0;
}

// --- recon ------------------------------------------------------------------

struct ReconArgs {
    std::string algo = "hqs";
    std::string sino;
    std::string geom;
    std::string out = "recon_out";
    std::string init = "warm";
    int detectors = 0;
    int levels = 1;
    std::vector<double> lambdas = {0.01};
    std::vector<double> gammas = {1.0};
    int iters = 10;
    double cg_tol = 1e-8;
    int cg_iters = 200;
    double relax = 1.0;
};

int run_recon(const ReconArgs& a, CLI::App* cmd) {
    const ProjectionGeometry geom = parse_geom(a.geom, a.detectors);
    const Sinogram sino = load_sinogram(a.sino);
    FrameletSystem system(a.levels);
    HqsConfig cfg;
    cfg.lambdas = broadcast(a.lambdas, a.levels, "--lambda");
    cfg.gammas = broadcast(a.gammas, a.levels, "--gamma");
    cfg.outer_iters = a.iters;
    cfg.cg_tol = a.cg_tol;
    cfg.cg_max_iters = a.cg_iters;
    if (a.init == "zeros")
        cfg.cg_init_strategy = CgInit::zeros;
    else if (a.init == "warm")
        cfg.cg_init_strategy = CgInit::warm_start;
    else if (a.init == "backproj")
        cfg.cg_init_strategy = CgInit::backprojection;
    else
        throw DomainError("--init must be zeros|warm|backproj");

    fs::create_directories(a.out);
    ImageGrid recon;
    if (a.algo == "hqs" || a.algo == "admm") {
        auto [image, trace] = a.algo == "hqs" ? hqs_reconstruct(sino, geom, system, cfg)
                                              : admm_reconstruct(sino, geom, system, cfg);
        recon = std::move(image);
        write_trace_csv(trace, fs::path(a.out) / "trace.csv");
        std::cout << "recon: " << a.algo << " finished, objective "
                  << trace.back().objective << "\n";
    } else if (a.algo == "sart") {
        recon = sart(sino, geom, a.iters, a.relax);
        std::cout << "recon: sart finished after " << a.iters << " sweeps\n";
    } else {
        throw DomainError("--algo must be hqs|admm|sart");
    }
    save_grid(recon, fs::path(a.out) / "recon.tgrd");
    export_pgm(recon, fs::path(a.out) / "recon.pgm");
    echo_config(cmd, a.out);
    return 0;
}

// --- fit-hyper --------------------------------------------------------------

struct FitHyperArgs {
    std::string manifest;
    std::string geom;
    std::string out = "fit_out";
    std::string mode = "supervised";
    int detectors = 0;
    int levels = 1;
    std::vector<double> lambdas = {0.01};
    std::vector<double> gammas = {1.0};
    int iters = 10;
    int cg_iters = 200;
    double reg = 0.0;
    int grid_points = 3;
    double grid_span = 2.0;
    int nm_evals = 40;
    uint64_t seed = 0;
};

int run_fit_hyper(const FitHyperArgs& a, CLI::App* cmd) {
    const ProjectionGeometry geom = parse_geom(a.geom, a.detectors);
    FrameletSystem system(a.levels);
    HqsConfig base;
    base.lambdas = broadcast(a.lambdas, a.levels, "--lambda");
    base.gammas = broadcast(a.gammas, a.levels, "--gamma");
    base.outer_iters = a.iters;
    base.cg_max_iters = a.cg_iters;
    LearnConfig lc;
    lc.mode = a.mode == "unsupervised" ? LearnMode::unsupervised : LearnMode::supervised;
    if (a.mode != "supervised" && a.mode != "unsupervised")
        throw DomainError("--mode must be supervised|unsupervised");
    lc.reg_weight = a.reg;
    lc.grid_points = a.grid_points;
    lc.grid_span = a.grid_span;
    lc.nm_max_evals = a.nm_evals;
    lc.seed = a.seed;

    FitResult fit = fit_hyperparameters(a.manifest, geom, system, base, lc);
    fs::create_directories(a.out);
    write_search_log_csv(fit.log, fs::path(a.out) / "search_log.csv");
    {
        std::ofstream best(fs::path(a.out) / "best.txt");
        best.precision(17);
        for (size_t l = 0; l < fit.best.lambdas.size(); ++l)
            best << "lambda_" << l << " = " << fit.best.lambdas[l] << "\n";
        for (size_t l = 0; l < fit.best.gammas.size(); ++l)
            best << "gamma_" << l << " = " << fit.best.gammas[l] << "\n";
    }
    echo_config(cmd, a.out);
    double best_obj = fit.log.front().objective;
    for (const SearchRecord& rec : fit.log) best_obj = std::min(best_obj, rec.objective);
    std::cout << "fit-hyper: " << fit.log.size() << " evaluations, best objective " << best_obj
              << "\n";
    return 0;
}

// --- train-policy -----------------------------------------------------------

struct TrainPolicyArgs {
    std::string manifest;
    std::string out = "policy_out";
    double sigma0 = 0.05;
    int sart_iters = 10;
    int steps = 20;
    int episodes = 500;
    double lr = 0.05;
    int baseline_window = 20;
    double temperature = 1.0;
    uint64_t seed = 0;
};

EpisodeConfig episode_template(const ProjectionGeometry& geom, double sigma0, int sart_iters,
                               int steps) {
    EpisodeConfig cfg;
    cfg.geom = geom;
    cfg.sigma0 = sigma0;
    cfg.sart_iters = sart_iters;
    cfg.max_steps = steps;
    return cfg;
}

int run_train_policy(const TrainPolicyArgs& a, CLI::App* cmd) {
    const std::vector<ImageGrid> images = manifest_images(a.manifest);
    if (images.empty()) throw DomainError("train-policy: empty manifest");
    const int size = images[0].width;
    const auto entries = load_manifest(a.manifest);
    const Sinogram probe = load_sinogram(fs::path(a.manifest).parent_path() / entries[0].sino_path);
    // angle count comes from the stored sinograms: they hold the full fan
    const ProjectionGeometry geom(size, probe.num_rows(), probe.detectors);

    const EpisodeConfig base = episode_template(geom, a.sigma0, a.sart_iters, a.steps);
    auto cfg_sampler = [&images, base, seed = a.seed](int episode) {
        EpisodeConfig cfg = base;
        cfg.ground_truth = images[static_cast<size_t>(episode) % images.size()];
        cfg.seed = seed + static_cast<uint64_t>(episode);
        return cfg;
    };
    PolicyParams params0(geom.num_angles_total, a.steps, a.temperature);
    ReinforceResult result =
        reinforce_train(cfg_sampler, params0, a.episodes, a.lr, a.baseline_window, a.seed);

    fs::create_directories(a.out);
    save_policy_params(result.params, fs::path(a.out) / "policy.txt");
    write_return_curve_csv(result.return_curve, a.baseline_window,
                           fs::path(a.out) / "returns.csv");
    echo_config(cmd, a.out);
    double tail = 0.0;
    const int tail_n = std::min<int>(a.baseline_window, static_cast<int>(result.return_curve.size()));
    for (int i = 0; i < tail_n; ++i)
        tail += result.return_curve[result.return_curve.size() - 1 - static_cast<size_t>(i)];
    std::cout << "train-policy: " << a.episodes << " episodes, final mean return "
              << (tail_n ? tail / tail_n : 0.0) << "\n";
    return 0;
}

// --- eval-policy ------------------------------------------------------------

struct EvalPolicyArgs {
    std::string manifest;
    std::string policy = "uniform";  // uniform | random | greedy | <policy file>
    std::string out = "eval_out";
    double sigma0 = 0.05;
    int sart_iters = 10;
    int steps = 20;
    int episodes = 3;
    uint64_t seed = 0;
};

int run_eval_policy(const EvalPolicyArgs& a, CLI::App* cmd) {
    const std::vector<ImageGrid> images = manifest_images(a.manifest);
    if (images.empty()) throw DomainError("eval-policy: empty manifest");
    const int size = images[0].width;
    const auto entries = load_manifest(a.manifest);
    const Sinogram probe = load_sinogram(fs::path(a.manifest).parent_path() / entries[0].sino_path);
    const ProjectionGeometry geom(size, probe.num_rows(), probe.detectors);
    const EpisodeConfig cfg = episode_template(geom, a.sigma0, a.sart_iters, a.steps);

    std::unique_ptr<Policy> policy;
    if (a.policy == "uniform")
        policy = uniform_policy(geom.num_angles_total, a.steps);
    else if (a.policy == "random")
        policy = random_policy(a.seed);
    else if (a.policy == "greedy")
        policy = greedy_oracle_policy();
    else
        policy = softmax_policy(load_policy_params(a.policy));

    PolicySummary summary = evaluate_policy(*policy, images, cfg, a.episodes, a.seed);

    // one logged trajectory for inspection
    std::vector<TrajectoryStep> trajectory;
    {
        EpisodeConfig episode_cfg = cfg;
        episode_cfg.ground_truth = images[0];
        episode_cfg.seed = a.seed;
        std::mt19937_64 rng(a.seed + 1);
        ScanState state = env_reset(episode_cfg);
        while (!state.done) {
            const ScanAction action = policy->select(state, episode_cfg, rng);
            StepResult res = env_step(state, action, episode_cfg);
            TrajectoryStep step;
            step.episode = 0;
            step.step = res.state.step;
            step.angle = action.angle;
            step.dose = action.dose_fraction;
            step.reward = res.reward;
            step.psnr = psnr(episode_cfg.ground_truth, res.state.last_recon);
            trajectory.push_back(step);
            state = std::move(res.state);
        }
    }

    fs::create_directories(a.out);
    write_trajectory_csv(trajectory, fs::path(a.out) / "trajectory.csv");
    {
        std::ofstream sum(fs::path(a.out) / "summary.txt");
        sum.precision(17);
        sum << "policy = " << a.policy << "\n";
        sum << "episodes = " << summary.episodes.size() << "\n";
        sum << "mean_final_psnr = " << summary.mean_final_psnr << "\n";
        sum << "stddev_final_psnr = " << summary.stddev_final_psnr << "\n";
        sum << "mean_return = " << summary.mean_return << "\n";
    }
    echo_config(cmd, a.out);
    std::cout << "eval-policy: " << a.policy << " mean final psnr " << summary.mean_final_psnr
              << " dB over " << summary.episodes.size() << " episodes\n";
    return 0;
}

// --- task-eval --------------------------------------------------------------

struct TaskEvalArgs {
    std::string manifest;
    std::string train_manifest;  // defaults to --manifest
    std::string geom;
    std::string out = "task_out";
    int detectors = 0;
    int levels = 1;
    std::vector<double> lambdas = {0.01};
    std::vector<double> gammas = {1.0};
    int iters = 10;
    double budget = 1.0;
    double sigma0 = 0.05;
    int block = 8;
    uint64_t seed = 0;
};

int run_task_eval(const TaskEvalArgs& a, CLI::App* cmd) {
    const ProjectionGeometry geom = parse_geom(a.geom, a.detectors);
    FrameletSystem system(a.levels);
    HqsConfig cfg;
    cfg.lambdas = broadcast(a.lambdas, a.levels, "--lambda");
    cfg.gammas = broadcast(a.gammas, a.levels, "--gamma");
    cfg.outer_iters = a.iters;

    const std::string train = a.train_manifest.empty() ? a.manifest : a.train_manifest;
    std::vector<int> labels;
    const std::vector<ImageGrid> images = manifest_images(train, &labels);
    const Classifier clf = train_classifier(images, labels, a.block);

    SensingPlan plan;
    plan.sigma0 = a.sigma0;
    const double dose = a.budget / geom.num_angles_total;
    for (int k = 0; k < geom.num_angles_total; ++k) {
        plan.angles.push_back(k);
        plan.doses.push_back(dose);
    }
    TaskReport report = pipeline_eval(a.manifest, geom, system, cfg, plan, clf, a.seed);
    fs::create_directories(a.out);
    write_task_report_csv(report, fs::path(a.out) / "task_report.csv");
    echo_config(cmd, a.out);
    std::cout << "task-eval: accuracy " << report.accuracy << ", mean margin "
              << report.mean_margin << ", mean psnr " << report.mean_psnr << " dB\n";
    return 0;
}

// --- plot -------------------------------------------------------------------

struct PlotArgs {
    std::string curve;
    std::string out;  // defaults to <curve stem>.svg next to the input
    int x_column = 0;
    int y_column = 1;
};

struct Series {
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
};

Series read_curve(const fs::path& path, int xc, int yc) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open curve file: " + path.string());
    Series series;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const int needed = std::max(xc, yc);
        if (static_cast<int>(cells.size()) <= needed)
            throw FormatError("curve row has too few columns: " + line);
        if (header) {
            header = false;
            try {
                std::stod(cells[static_cast<size_t>(yc)]);
            } catch (const std::exception&) {
                series.x_label = cells[static_cast<size_t>(xc)];
                series.y_label = cells[static_cast<size_t>(yc)];
                continue;  // header row
            }
        }
        series.x.push_back(std::stod(cells[static_cast<size_t>(xc)]));
        series.y.push_back(std::stod(cells[static_cast<size_t>(yc)]));
    }
    if (series.x.empty()) throw FormatError("curve file has no data rows: " + path.string());
    return series;
}

void write_svg(const Series& series, const fs::path& path) {
    const double width = 640, height = 420;
    const double ml = 60, mr = 20, mt = 20, mb = 50;
    double xmin = series.x[0], xmax = series.x[0], ymin = series.y[0], ymax = series.y[0];
    for (size_t i = 0; i < series.x.size(); ++i) {
        xmin = std::min(xmin, series.x[i]);
        xmax = std::max(xmax, series.x[i]);
        ymin = std::min(ymin, series.y[i]);
        ymax = std::max(ymax, series.y[i]);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    // ticks and labels
    for (int i = 0; i <= 4; ++i) {
        const double tx = xmin + (xmax - xmin) * i / 4.0;
        const double ty = ymin + (ymax - ymin) * i / 4.0;
        out << "<line x1=\"" << px(tx) << "\" y1=\"" << height - mb << "\" x2=\"" << px(tx)
            << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(tx) << "\" y=\"" << height - mb + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << tx << "</text>\n";
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(ty) << "\" x2=\"" << ml << "\" y2=\""
            << py(ty) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ty) + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << ty << "</text>\n";
    }
    if (!series.x_label.empty())
        out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
            << "\" font-size=\"13\" text-anchor=\"middle\">" << series.x_label << "</text>\n";
    if (!series.y_label.empty())
        out << "<text x=\"15\" y=\"" << (mt + height - mb) / 2
            << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
            << (mt + height - mb) / 2 << ")\">" << series.y_label << "</text>\n";
    // curve
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series.x.size(); ++i)
        out << px(series.x[i]) << "," << py(series.y[i]) << " ";
    out << "\"/>\n</svg>\n";
}

int run_plot(const PlotArgs& a) {
    const fs::path curve = a.curve;
    const fs::path out = a.out.empty() ? curve.parent_path() / (curve.stem().string() + ".svg")
                                       : fs::path(a.out);
    Series series = read_curve(curve, a.x_column, a.y_column);
    write_svg(series, out);
    std::cout << "plot: wrote " << out.string() << " (" << series.x.size() << " points)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"computational tomography laboratory"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value config file (before the subcommand); flags override");

    GenDataArgs gd;
    CLI::App* gen = app.add_subcommand("gen-data", "generate a phantom/sinogram dataset");
    gen->add_option("--out", gd.out, "output directory");
    gen->add_option("--n", gd.n, "number of samples")->check(CLI::PositiveNumber);
    gen->add_option("--size", gd.size, "image side length");
    gen->add_option("--num-angles", gd.num_angles, "angles in the full fan");
    gen->add_option("--detectors", gd.detectors, "detector count (0: image size)");
    gen->add_option("--sigma", gd.sigma, "sinogram noise sigma");
    gen->add_option("--min-ellipses", gd.min_ellipses, "minimum ellipse count");
    gen->add_option("--max-ellipses", gd.max_ellipses, "maximum ellipse count");
    gen->add_option("--seed", gd.seed, "base seed; sample i uses seed+i");

    ReconArgs rc;
    CLI::App* recon = app.add_subcommand("recon", "reconstruct a sinogram");
    recon->add_option("--algo", rc.algo, "hqs|admm|sart");
    recon->add_option("--sino", rc.sino, "input sinogram (.tgrd)")->required();
    recon->add_option("--geom", rc.geom, "geometry SIZE:ANGLES")->required();
    recon->add_option("--detectors", rc.detectors, "detector count (0: image size)");
    recon->add_option("--levels", rc.levels, "framelet levels");
    recon->add_option("--lambda", rc.lambdas, "per-level lambda")->delimiter(',');
    recon->add_option("--gamma", rc.gammas, "per-level gamma")->delimiter(',');
    recon->add_option("--iters", rc.iters, "outer iterations / sart sweeps");
    recon->add_option("--cg-tol", rc.cg_tol, "cg relative tolerance");
    recon->add_option("--cg-iters", rc.cg_iters, "cg iteration cap");
    recon->add_option("--init", rc.init, "cg init: zeros|warm|backproj");
    recon->add_option("--relax", rc.relax, "sart relaxation");
    recon->add_option("--out", rc.out, "output directory");

    FitHyperArgs fh;
    CLI::App* fit = app.add_subcommand("fit-hyper", "fit lambda/gamma on a dataset");
    fit->add_option("--manifest", fh.manifest, "training manifest")->required();
    fit->add_option("--geom", fh.geom, "geometry SIZE:ANGLES")->required();
    fit->add_option("--detectors", fh.detectors, "detector count (0: image size)");
    fit->add_option("--levels", fh.levels, "framelet levels");
    fit->add_option("--lambda", fh.lambdas, "baseline lambda")->delimiter(',');
    fit->add_option("--gamma", fh.gammas, "baseline gamma")->delimiter(',');
    fit->add_option("--iters", fh.iters, "outer iterations");
    fit->add_option("--cg-iters", fh.cg_iters, "cg iteration cap");
    fit->add_option("--mode", fh.mode, "supervised|unsupervised");
    fit->add_option("--reg", fh.reg, "ridge weight on log-parameters");
    fit->add_option("--grid-points", fh.grid_points, "grid points per dimension");
    fit->add_option("--grid-span", fh.grid_span, "grid half-span in decades");
    fit->add_option("--nm-evals", fh.nm_evals, "Nelder-Mead evaluation budget");
    fit->add_option("--seed", fh.seed, "search seed");
    fit->add_option("--out", fh.out, "output directory");

    TrainPolicyArgs tp;
    CLI::App* train = app.add_subcommand("train-policy", "train a softmax scan policy");
    train->add_option("--manifest", tp.manifest, "training manifest")->required();
    train->add_option("--sigma0", tp.sigma0, "unit-dose noise sigma");
    train->add_option("--sart-iters", tp.sart_iters, "sart sweeps per step");
    train->add_option("--steps", tp.steps, "episode step cap");
    train->add_option("--episodes", tp.episodes, "training episodes");
    train->add_option("--lr", tp.lr, "learning rate");
    train->add_option("--baseline-window", tp.baseline_window, "moving-average window");
    train->add_option("--temperature", tp.temperature, "softmax temperature");
    train->add_option("--seed", tp.seed, "training seed");
    train->add_option("--out", tp.out, "output directory");

    EvalPolicyArgs ep;
    CLI::App* epeval = app.add_subcommand("eval-policy", "evaluate a scan policy");
    epeval->add_option("--manifest", ep.manifest, "test manifest")->required();
    epeval->add_option("--policy", ep.policy, "uniform|random|greedy|<policy file>");
    epeval->add_option("--sigma0", ep.sigma0, "unit-dose noise sigma");
    epeval->add_option("--sart-iters", ep.sart_iters, "sart sweeps per step");
    epeval->add_option("--steps", ep.steps, "episode step cap");
    epeval->add_option("--episodes", ep.episodes, "episodes per test image");
    epeval->add_option("--seed", ep.seed, "evaluation seed");
    epeval->add_option("--out", ep.out, "output directory");

    TaskEvalArgs te;
    CLI::App* task = app.add_subcommand("task-eval", "task-driven pipeline evaluation");
    task->add_option("--manifest", te.manifest, "test manifest")->required();
    task->add_option("--train-manifest", te.train_manifest, "classifier manifest (default: test)");
    task->add_option("--geom", te.geom, "geometry SIZE:ANGLES")->required();
    task->add_option("--detectors", te.detectors, "detector count (0: image size)");
    task->add_option("--levels", te.levels, "framelet levels");
    task->add_option("--lambda", te.lambdas, "per-level lambda")->delimiter(',');
    task->add_option("--gamma", te.gammas, "per-level gamma")->delimiter(',');
    task->add_option("--iters", te.iters, "outer iterations");
    task->add_option("--budget", te.budget, "total dose budget for the uniform plan");
    task->add_option("--sigma0", te.sigma0, "unit-dose noise sigma");
    task->add_option("--block", te.block, "feature block size");
    task->add_option("--seed", te.seed, "measurement noise seed");
    task->add_option("--out", te.out, "output directory");

    PlotArgs pl;
    CLI::App* plot = app.add_subcommand("plot", "render a CSV curve as SVG");
    plot->add_option("--curve", pl.curve, "input CSV")->required();
    plot->add_option("--out", pl.out, "output SVG (default: alongside the input)");
    plot->add_option("--x-column", pl.x_column, "x column index");
    plot->add_option("--y-column", pl.y_column, "y column index");

    CLI11_PARSE(app, argc, argv);
    try {
        if (gen->parsed()) return run_gen_data(gd, gen);
        if (recon->parsed()) return run_recon(rc, recon);
        if (fit->parsed()) return run_fit_hyper(fh, fit);
        if (train->parsed()) return run_train_policy(tp, train);
        if (epeval->parsed()) return run_eval_policy(ep, epeval);
        if (task->parsed()) return run_task_eval(te, task);
        if (plot->parsed()) return run_plot(pl);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}
