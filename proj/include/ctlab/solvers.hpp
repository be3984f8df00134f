#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "ctlab/framelet.hpp"
#include "ctlab/grid.hpp"
#include "ctlab/projector.hpp"

namespace ctlab {

enum class CgInit { zeros, warm_start, backprojection };

struct HqsConfig {
    std::vector<double> lambdas;   // one per framelet level, > 0 (or 0 to disable l1)
    std::vector<double> gammas;    // one per level, > 0
    int outer_iters = 10;
    double cg_tol = 1e-8;
    int cg_max_iters = 200;
    CgInit cg_init_strategy = CgInit::warm_start;

    void validate(int levels) const;
};

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;
    double primal_residual = 0.0;
    int cg_iters = 0;
};

using SolveTrace = std::vector<IterationRecord>;

// "iter,objective,primal_residual,cg_iters"
void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path);

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> residual_history;  // 2-norm residual per iteration, incl. initial
};

using LinearOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Conjugate gradient on an SPD operator, matrix-free. Stops when the relative
// residual drops below tol or max_iters is reached.
CgResult cg_solve(const LinearOp& apply_op, const std::vector<double>& rhs,
                  const std::vector<double>& init, double tol, int max_iters);

// Relaxed per-angle SART sweeps in ascending angle order. Normalization sums
// below 1e-12 exclude the corresponding ray/pixel from the update.
ImageGrid sart(const Sinogram& sino, const ProjectionGeometry& geom, int iters, double relax,
               const std::optional<ImageGrid>& init = std::nullopt);

// Half-quadratic splitting: CG u-step on (A^T A + sum_l gamma_l I) u = rhs,
// soft-threshold z-step with beta_l = lambda_l / gamma_l.
std::pair<ImageGrid, SolveTrace> hqs_reconstruct(const Sinogram& sino,
                                                 const ProjectionGeometry& geom,
                                                 const FrameletSystem& system,
                                                 const HqsConfig& cfg,
                                                 const std::optional<ImageGrid>& u0 = std::nullopt);

// Scaled-form ADMM with a single step gamma (gammas[0]) and additive dual
// update beta += W u - z.
std::pair<ImageGrid, SolveTrace> admm_reconstruct(const Sinogram& sino,
                                                  const ProjectionGeometry& geom,
                                                  const FrameletSystem& system,
                                                  const HqsConfig& cfg,
                                                  const std::optional<ImageGrid>& u0 = std::nullopt);

// 1/2 ||Au-f||^2 + sum_l (lambda_l ||z_l||_1 + gamma_l/2 ||W_l u - z_l||^2);
// the l1 term covers high-pass subbands only.
double objective_value(const ImageGrid& u, const FrameletCoeffs& z, const Sinogram& sino,
                       const ProjectionGeometry& geom, const FrameletSystem& system,
                       const std::vector<double>& lambdas, const std::vector<double>& gammas);

// SART-style normalized backprojection C^-1 A^T R^-1 f; used as the
// "backprojection" CG initialization.
ImageGrid normalized_backprojection(const Sinogram& sino, const ProjectionGeometry& geom);

}  // namespace ctlab
