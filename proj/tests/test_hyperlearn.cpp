#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ctlab/hyperlearn.hpp"
#include "ctlab/io.hpp"

using namespace ctlab;
namespace fs = std::filesystem;

namespace {

// Small shared fixture: three noisy 16x16 ellipse phantoms with a 10-angle
// fan, written once under the temp dir.
struct Fixture {
    fs::path dir;
    ProjectionGeometry geom{16, 10};
    FrameletSystem system{1};
    HqsConfig base;

    Fixture() {
        dir = fs::temp_directory_path() / "ctlab_hyper";
        fs::remove_all(dir);
        std::vector<PhantomSpec> specs;
        for (int i = 0; i < 3; ++i) {
            PhantomSpec s;
            s.size = 16;
            s.seed = 40 + static_cast<uint64_t>(i);
            specs.push_back(s);
        }
        NoiseModel noise;
        noise.sigma = 0.1;
        generate_dataset(specs, geom, noise, geom.all_angles(), dir);
        base.lambdas = {0.01};
        base.gammas = {1.0};
        base.outer_iters = 4;
        base.cg_max_iters = 60;
    }

    fs::path manifest() const { return dir / "manifest.txt"; }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("degenerate search reproduces the baseline exactly") {
    Fixture& f = fixture();
    LearnConfig lc;
    lc.grid_points = 1;
    lc.nm_max_evals = 0;
    FitResult fit = fit_hyperparameters(f.manifest(), f.geom, f.system, f.base, lc);
    REQUIRE(fit.log.size() == 1);
    CHECK(fit.best.lambdas[0] == doctest::Approx(f.base.lambdas[0]).epsilon(1e-12));
    CHECK(fit.best.gammas[0] == doctest::Approx(f.base.gammas[0]).epsilon(1e-12));
}

TEST_CASE("fitted objective never exceeds the baseline objective") {
    Fixture& f = fixture();
    LearnConfig lc;
    lc.grid_points = 3;
    lc.grid_span = 1.0;
    lc.nm_max_evals = 8;
    FitResult fit = fit_hyperparameters(f.manifest(), f.geom, f.system, f.base, lc);
    const auto entries = load_manifest(f.manifest());
    const double base_obj =
        training_objective(entries, f.dir, f.geom, f.system, f.base, lc);
    const double fit_obj =
        training_objective(entries, f.dir, f.geom, f.system, fit.best, lc);
    CHECK(fit_obj <= base_obj + 1e-14);
    // eval 0 is the baseline itself
    CHECK(fit.log[0].objective == doctest::Approx(base_obj).epsilon(1e-12));
}

TEST_CASE("grid phase winner matches an exhaustive re-evaluation") {
    Fixture& f = fixture();
    LearnConfig lc;
    lc.grid_points = 3;
    lc.grid_span = 1.0;
    lc.nm_max_evals = 0;
    FitResult fit = fit_hyperparameters(f.manifest(), f.geom, f.system, f.base, lc);
    REQUIRE(fit.log.size() == 1 + 9);  // baseline + 3^2 grid

    // independent oracle: re-run the objective over the same grid by hand
    const auto entries = load_manifest(f.manifest());
    double best = std::numeric_limits<double>::infinity();
    double best_lambda = f.base.lambdas[0], best_gamma = f.base.gammas[0];
    {
        const double o = training_objective(entries, f.dir, f.geom, f.system, f.base, lc);
        if (o < best) best = o;
    }
    const double cl = std::log10(f.base.lambdas[0]);
    const double cg = std::log10(f.base.gammas[0]);
    for (int gi = 0; gi < 3; ++gi)
        for (int li = 0; li < 3; ++li) {
            HqsConfig cfg = f.base;
            cfg.lambdas[0] = std::pow(10.0, cl - 1.0 + li);
            cfg.gammas[0] = std::pow(10.0, cg - 1.0 + gi);
            const double o = training_objective(entries, f.dir, f.geom, f.system, cfg, lc);
            if (o < best) {
                best = o;
                best_lambda = cfg.lambdas[0];
                best_gamma = cfg.gammas[0];
            }
        }
    const double fit_obj =
        training_objective(entries, f.dir, f.geom, f.system, fit.best, lc);
    CHECK(fit_obj == doctest::Approx(best).epsilon(1e-12));
    CHECK(fit.best.lambdas[0] == doctest::Approx(best_lambda).epsilon(1e-9));
    CHECK(fit.best.gammas[0] == doctest::Approx(best_gamma).epsilon(1e-9));
}

TEST_CASE("search log entries replay to the same objective") {
    Fixture& f = fixture();
    LearnConfig lc;
    lc.grid_points = 3;
    lc.grid_span = 1.0;
    lc.nm_max_evals = 6;
    FitResult fit = fit_hyperparameters(f.manifest(), f.geom, f.system, f.base, lc);
    const auto entries = load_manifest(f.manifest());
    REQUIRE(fit.log.size() >= 10);
    for (size_t i : {size_t{0}, size_t{4}, fit.log.size() - 1}) {
        HqsConfig cfg = f.base;
        cfg.lambdas = fit.log[i].lambdas;
        cfg.gammas = fit.log[i].gammas;
        double mean_psnr = 0.0;
        const double o =
            training_objective(entries, f.dir, f.geom, f.system, cfg, lc, &mean_psnr);
        CHECK(o == doctest::Approx(fit.log[i].objective).epsilon(1e-12));
        CHECK(mean_psnr == doctest::Approx(fit.log[i].mean_psnr).epsilon(1e-12));
    }
    CHECK(fit.log.back().eval_id == static_cast<int>(fit.log.size()) - 1);
}

TEST_CASE("unsupervised mode needs no ground truth agreement but stays finite") {
    Fixture& f = fixture();
    LearnConfig lc;
    lc.mode = LearnMode::unsupervised;
    lc.reg_weight = 1e-4;
    const auto entries = load_manifest(f.manifest());
    const double o = training_objective(entries, f.dir, f.geom, f.system, f.base, lc);
    CHECK(std::isfinite(o));
    // the ridge makes the objective strictly larger than without it
    LearnConfig lc0 = lc;
    lc0.reg_weight = 0.0;
    CHECK(o > training_objective(entries, f.dir, f.geom, f.system, f.base, lc0));
}

TEST_CASE("evaluation covers every manifest sample and is deterministic") {
    Fixture& f = fixture();
    EvalSummary a = evaluate_reconstructor(f.manifest(), f.geom, f.system, f.base);
    EvalSummary b = evaluate_reconstructor(f.manifest(), f.geom, f.system, f.base);
    REQUIRE(a.samples.size() == 3);
    CHECK(a.mean_psnr == b.mean_psnr);
    CHECK(a.mean_mse == b.mean_mse);
    CHECK(a.mean_data_consistency == b.mean_data_consistency);
    double psnr_sum = 0.0;
    for (const SampleEval& s : a.samples) {
        psnr_sum += s.quality.psnr;
        CHECK(s.data_consistency >= 0.0);
    }
    CHECK(a.mean_psnr == doctest::Approx(psnr_sum / 3.0).epsilon(1e-12));
}

TEST_CASE("noiseless consistent data reconstructs above 30 dB") {
    const fs::path dir = fs::temp_directory_path() / "ctlab_hyper_clean";
    fs::remove_all(dir);
    ProjectionGeometry geom(32, 40);
    std::vector<PhantomSpec> specs;
    PhantomSpec s;
    s.size = 32;
    s.seed = 11;
    specs.push_back(s);
    generate_dataset(specs, geom, NoiseModel{}, geom.all_angles(), dir);
    FrameletSystem system(1);
    HqsConfig cfg;
    cfg.lambdas = {1e-6};
    cfg.gammas = {0.05};
    cfg.outer_iters = 12;
    cfg.cg_max_iters = 200;
    EvalSummary summary = evaluate_reconstructor(dir / "manifest.txt", geom, system, cfg);
    CHECK(summary.mean_psnr > 30.0);
}

TEST_CASE("search log csv round-trips the header and row count") {
    Fixture& f = fixture();
    LearnConfig lc;
    lc.grid_points = 1;
    lc.nm_max_evals = 0;
    FitResult fit = fit_hyperparameters(f.manifest(), f.geom, f.system, f.base, lc);
    const fs::path csv = fs::temp_directory_path() / "ctlab_search_log.csv";
    write_search_log_csv(fit.log, csv);
    std::ifstream in(csv);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "eval_id,lambda_0,gamma_0,objective,mean_psnr");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(fit.log.size()));
}

TEST_CASE("config validation rejects bad learn settings") {
    LearnConfig lc;
    lc.grid_points = 0;
    CHECK_THROWS_AS(lc.validate(), DomainError);
    lc.grid_points = 2;
    lc.reg_weight = -1.0;
    CHECK_THROWS_AS(lc.validate(), DomainError);
    lc.reg_weight = 0.0;
    lc.nm_max_evals = -1;
    CHECK_THROWS_AS(lc.validate(), DomainError);
}
