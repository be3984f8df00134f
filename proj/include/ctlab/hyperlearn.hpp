#pragma once

#include <filesystem>
#include <vector>

#include "ctlab/phantom.hpp"
#include "ctlab/solvers.hpp"

namespace ctlab {

enum class LearnMode { supervised, unsupervised };

// Derivative-free search over Theta = {log10 lambda_l, log10 gamma_l}:
// a coarse log grid centered on the baseline, then Nelder-Mead from the
// grid winner.
struct LearnConfig {
    LearnMode mode = LearnMode::supervised;
    double reg_weight = 0.0;   // ridge on the log-parameters
    int grid_points = 3;       // per dimension; 1 degenerates to the baseline
    double grid_span = 2.0;    // +- decades around the baseline
    int nm_max_evals = 40;     // 0 disables the Nelder-Mead phase
    uint64_t seed = 0;

    void validate() const {
        if (reg_weight < 0.0) throw DomainError("LearnConfig: reg_weight must be >= 0");
        if (grid_points < 1) throw DomainError("LearnConfig: grid_points must be >= 1");
        if (nm_max_evals < 0) throw DomainError("LearnConfig: nm_max_evals must be >= 0");
    }
};

struct SearchRecord {
    int eval_id = 0;
    std::vector<double> lambdas;
    std::vector<double> gammas;
    double objective = 0.0;
    double mean_psnr = 0.0;
};

struct FitResult {
    HqsConfig best;
    std::vector<SearchRecord> log;
};

struct SampleEval {
    QualityReport quality;
    double data_consistency = 0.0;  // ||A F(f) - f||
};

struct EvalSummary {
    std::vector<SampleEval> samples;
    double mean_psnr = 0.0;
    double mean_mse = 0.0;
    double mean_data_consistency = 0.0;
};

// Empirical training objective at a fixed Theta: mean reconstruction loss
// (MSE vs ground truth, or data-consistency MSE in unsupervised mode) plus
// the log-space ridge. Solver failures score +infinity.
double training_objective(const std::vector<ManifestEntry>& entries,
                          const std::filesystem::path& base_dir,
                          const ProjectionGeometry& geom, const FrameletSystem& system,
                          const HqsConfig& cfg, const LearnConfig& learn_cfg,
                          double* mean_psnr_out = nullptr);

FitResult fit_hyperparameters(const std::filesystem::path& manifest_path,
                              const ProjectionGeometry& geom, const FrameletSystem& system,
                              const HqsConfig& base_cfg, const LearnConfig& learn_cfg);

EvalSummary evaluate_reconstructor(const std::filesystem::path& manifest_path,
                                   const ProjectionGeometry& geom, const FrameletSystem& system,
                                   const HqsConfig& cfg);

// "eval_id,lambda_0,...,gamma_0,...,objective,mean_psnr"
void write_search_log_csv(const std::vector<SearchRecord>& log,
                          const std::filesystem::path& path);

}  // namespace ctlab
