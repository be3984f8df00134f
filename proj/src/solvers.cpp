#include "ctlab/solvers.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace ctlab {
namespace {

constexpr double kSumGuard = 1e-12;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// rhs = A^T f + sum_l gamma_l W_l^T z_l
std::vector<double> build_u_rhs(const Sinogram& sino, const ProjectionGeometry& geom,
                                const FrameletCoeffs& z, const std::vector<double>& gammas) {
    ImageGrid atf = back_project(sino, geom);
    std::array<std::vector<double>, 9> level_planes;
    for (int l = 0; l < z.levels; ++l) {
        for (int s = 0; s < 9; ++s) level_planes[static_cast<size_t>(s)] = z.plane(l, s);
        ImageGrid accum(z.size, z.size, 0.0);
        synthesis_level(level_planes, z.size, 1 << l, accum);
        const double g = gammas[static_cast<size_t>(l)];
        for (size_t i = 0; i < atf.data.size(); ++i) atf.data[i] += g * accum.data[i];
    }
    return std::move(atf.data);
}

// Normal operator A^T A + (sum_l gamma_l) I; the per-level tight frames turn
// the regularizer into an exact multiple of the identity.
LinearOp make_normal_op(const ProjectionGeometry& geom, const std::vector<int>& angles,
                        double gamma_sum) {
    const int n = geom.image_size;
    return [&geom, angles, gamma_sum, n](const std::vector<double>& x, std::vector<double>& y) {
        ImageGrid u(n, n, 0.0);
        u.data = x;
        Sinogram au = forward_project(u, geom, angles);
        ImageGrid ata = back_project(au, geom);
        y.resize(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = ata.data[i] + gamma_sum * x[i];
    };
}

std::vector<double> cg_initial_guess(CgInit strategy, const ImageGrid& current,
                                     const Sinogram& sino, const ProjectionGeometry& geom) {
    switch (strategy) {
        case CgInit::zeros:
            return std::vector<double>(current.data.size(), 0.0);
        case CgInit::warm_start:
            return current.data;
        case CgInit::backprojection:
            return normalized_backprojection(sino, geom).data;
    }
    throw DomainError("unknown CG init strategy");
}

}  // namespace

void HqsConfig::validate(int levels) const {
    if (static_cast<int>(lambdas.size()) != levels || static_cast<int>(gammas.size()) != levels)
        throw ShapeError("HqsConfig: need one lambda and gamma per framelet level");
    for (double l : lambdas)
        if (!(l >= 0.0)) throw DomainError("HqsConfig: lambdas must be >= 0");
    for (double g : gammas)
        if (!(g > 0.0)) throw DomainError("HqsConfig: gammas must be > 0");
    if (outer_iters < 1) throw DomainError("HqsConfig: outer_iters must be >= 1");
    if (!(cg_tol > 0.0) || cg_max_iters < 1) throw DomainError("HqsConfig: bad CG settings");
}

void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "iter,objective,primal_residual,cg_iters\n";
    out.precision(17);
    for (const IterationRecord& rec : trace)
        out << rec.iter << "," << rec.objective << "," << rec.primal_residual << ","
            << rec.cg_iters << "\n";
}

CgResult cg_solve(const LinearOp& apply_op, const std::vector<double>& rhs,
                  const std::vector<double>& init, double tol, int max_iters) {
    const size_t n = rhs.size();
    if (init.size() != n) throw ShapeError("cg_solve: init/rhs size mismatch");
    CgResult result;
    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
        result.x.assign(n, 0.0);
        result.residual_history.push_back(0.0);
        return result;
    }
    result.x = init;
    std::vector<double> r(n), p(n), ap(n);
    apply_op(result.x, ap);
    for (size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
    double rr = dot(r, r);
    result.residual_history.push_back(std::sqrt(rr));
    p = r;
    int iter = 0;
    while (std::sqrt(rr) / rhs_norm > tol && iter < max_iters) {
        apply_op(p, ap);
        const double pap = dot(p, ap);
        if (!std::isfinite(pap) || pap <= 0.0)
            throw NumericalError("cg_solve: operator not positive definite at iteration " +
                                 std::to_string(iter));
        const double alpha = rr / pap;
        for (size_t i = 0; i < n; ++i) {
            result.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        if (!std::isfinite(rr_new))
            throw NumericalError("cg_solve: non-finite residual at iteration " +
                                 std::to_string(iter));
        const double beta = rr_new / rr;
        rr = rr_new;
        for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        ++iter;
        result.residual_history.push_back(std::sqrt(rr));
    }
    result.iterations = iter;
    result.relative_residual = std::sqrt(rr) / rhs_norm;
    return result;
}

ImageGrid normalized_backprojection(const Sinogram& sino, const ProjectionGeometry& geom) {
    const std::vector<double> rsum = row_sums(geom, sino.angles);
    Sinogram scaled = sino;
    for (size_t i = 0; i < scaled.data.size(); ++i)
        scaled.data[i] = rsum[i] > kSumGuard ? scaled.data[i] / rsum[i] : 0.0;
    ImageGrid bp = back_project(scaled, geom);
    const std::vector<double> csum = col_sums(geom, sino.angles);
    for (size_t i = 0; i < bp.data.size(); ++i)
        bp.data[i] = csum[i] > kSumGuard ? bp.data[i] / csum[i] : 0.0;
    return bp;
}

ImageGrid sart(const Sinogram& sino, const ProjectionGeometry& geom, int iters, double relax,
               const std::optional<ImageGrid>& init) {
    sino.validate();
    geom.validate();
    if (sino.angles.empty()) throw DomainError("sart: empty angle set");
    if (!(relax > 0.0 && relax < 2.0)) throw DomainError("sart: relaxation must be in (0,2)");
    if (iters < 1) throw DomainError("sart: iters must be >= 1");
    const int n = geom.image_size;
    const int D = geom.detectors;
    ImageGrid u = init ? *init : ImageGrid(n, n, 0.0);
    if (u.width != n) throw ShapeError("sart: init image does not match geometry");

    const int num_angles = sino.num_rows();
    std::vector<std::vector<double>> rsum(num_angles), csum(num_angles);
    for (int a = 0; a < num_angles; ++a) {
        const std::vector<int> one{sino.angles[a]};
        rsum[a] = row_sums(geom, one);
        csum[a] = col_sums(geom, one);
    }

    Sinogram single({0}, D);
    for (int it = 0; it < iters; ++it) {
        for (int a = 0; a < num_angles; ++a) {
            single.angles[0] = sino.angles[a];
            Sinogram au = forward_project(u, geom, single.angles);
            for (int m = 0; m < D; ++m) {
                const double rs = rsum[a][static_cast<size_t>(m)];
                single.data[static_cast<size_t>(m)] =
                    rs > kSumGuard ? (sino.row(a)[m] - au.data[static_cast<size_t>(m)]) / rs : 0.0;
            }
            ImageGrid update = back_project(single, geom);
            for (size_t i = 0; i < u.data.size(); ++i) {
                const double cs = csum[a][i];
                if (cs > kSumGuard) u.data[i] += relax * update.data[i] / cs;
            }
        }
    }
    return u;
}

double objective_value(const ImageGrid& u, const FrameletCoeffs& z, const Sinogram& sino,
                       const ProjectionGeometry& geom, const FrameletSystem& system,
                       const std::vector<double>& lambdas, const std::vector<double>& gammas) {
    Sinogram au = forward_project(u, geom, sino.angles);
    double data_term = 0.0;
    for (size_t i = 0; i < au.data.size(); ++i) {
        const double d = au.data[i] - sino.data[i];
        data_term += d * d;
    }
    double total = 0.5 * data_term;
    FrameletCoeffs wu = analysis(u, system);
    for (int l = 0; l < system.levels; ++l) {
        double l1 = 0.0;
        for (int s = 1; s < 9; ++s)
            for (double v : z.plane(l, s)) l1 += std::abs(v);
        double quad = 0.0;
        for (int s = 0; s < 9; ++s) {
            const auto& a = wu.plane(l, s);
            const auto& b = z.plane(l, s);
            for (size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                quad += d * d;
            }
        }
        total += lambdas[static_cast<size_t>(l)] * l1 +
                 0.5 * gammas[static_cast<size_t>(l)] * quad;
    }
    return total;
}

std::pair<ImageGrid, SolveTrace> hqs_reconstruct(const Sinogram& sino,
                                                 const ProjectionGeometry& geom,
                                                 const FrameletSystem& system,
                                                 const HqsConfig& cfg,
                                                 const std::optional<ImageGrid>& u0) {
    sino.validate();
    geom.validate();
    cfg.validate(system.levels);
    const int n = geom.image_size;

    ImageGrid u = u0 ? *u0
                     : (cfg.cg_init_strategy == CgInit::backprojection
                            ? normalized_backprojection(sino, geom)
                            : ImageGrid(n, n, 0.0));
    if (u.width != n) throw ShapeError("hqs_reconstruct: u0 does not match geometry");

    std::vector<double> thresholds(cfg.lambdas.size());
    for (size_t l = 0; l < thresholds.size(); ++l) thresholds[l] = cfg.lambdas[l] / cfg.gammas[l];

    const double gamma_sum = std::accumulate(cfg.gammas.begin(), cfg.gammas.end(), 0.0);
    const LinearOp op = make_normal_op(geom, sino.angles, gamma_sum);

    FrameletCoeffs z = soft_threshold(analysis(u, system), thresholds);
    SolveTrace trace;
    for (int k = 0; k < cfg.outer_iters; ++k) {
        const std::vector<double> rhs = build_u_rhs(sino, geom, z, cfg.gammas);
        const std::vector<double> guess = cg_initial_guess(cfg.cg_init_strategy, u, sino, geom);
        CgResult cg;
        try {
            cg = cg_solve(op, rhs, guess, cfg.cg_tol, cfg.cg_max_iters);
        } catch (const NumericalError& e) {
            throw NumericalError("hqs_reconstruct: outer iteration " + std::to_string(k) + ": " +
                                 e.what());
        }
        u.data = cg.x;
        FrameletCoeffs wu = analysis(u, system);
        z = soft_threshold(wu, thresholds);
        IterationRecord rec;
        rec.iter = k;
        rec.objective = objective_value(u, z, sino, geom, system, cfg.lambdas, cfg.gammas);
        double pr = 0.0;
        for (int l = 0; l < system.levels; ++l)
            for (int s = 0; s < 9; ++s) {
                const auto& a = wu.plane(l, s);
                const auto& b = z.plane(l, s);
                for (size_t i = 0; i < a.size(); ++i) {
                    const double d = a[i] - b[i];
                    pr += d * d;
                }
            }
        rec.primal_residual = std::sqrt(pr);
        rec.cg_iters = cg.iterations;
        trace.push_back(rec);
    }
    return {std::move(u), std::move(trace)};
}

std::pair<ImageGrid, SolveTrace> admm_reconstruct(const Sinogram& sino,
                                                  const ProjectionGeometry& geom,
                                                  const FrameletSystem& system,
                                                  const HqsConfig& cfg,
                                                  const std::optional<ImageGrid>& u0) {
    sino.validate();
    geom.validate();
    cfg.validate(system.levels);
    const int n = geom.image_size;
    const double gamma = cfg.gammas[0];

    ImageGrid u = u0 ? *u0 : ImageGrid(n, n, 0.0);
    if (u.width != n) throw ShapeError("admm_reconstruct: u0 does not match geometry");

    FrameletCoeffs z(n, system.levels);
    FrameletCoeffs beta(n, system.levels);
    std::vector<double> thresholds(static_cast<size_t>(system.levels));
    for (int l = 0; l < system.levels; ++l)
        thresholds[static_cast<size_t>(l)] = cfg.lambdas[static_cast<size_t>(l)] / gamma;

    const std::vector<double> gammas_flat(static_cast<size_t>(system.levels), gamma);
    const LinearOp op = make_normal_op(geom, sino.angles, gamma * system.levels);

    SolveTrace trace;
    for (int k = 0; k < cfg.outer_iters; ++k) {
        // u-step: min 1/2||Au-f||^2 + gamma/2 sum_l ||W_l u - z_l + beta_l||^2
        FrameletCoeffs target = z;
        for (size_t p = 0; p < target.planes.size(); ++p)
            for (size_t i = 0; i < target.planes[p].size(); ++i)
                target.planes[p][i] -= beta.planes[p][i];
        const std::vector<double> rhs = build_u_rhs(sino, geom, target, gammas_flat);
        const std::vector<double> guess = cg_initial_guess(cfg.cg_init_strategy, u, sino, geom);
        CgResult cg;
        try {
            cg = cg_solve(op, rhs, guess, cfg.cg_tol, cfg.cg_max_iters);
        } catch (const NumericalError& e) {
            throw NumericalError("admm_reconstruct: outer iteration " + std::to_string(k) + ": " +
                                 e.what());
        }
        u.data = cg.x;

        FrameletCoeffs wu = analysis(u, system);
        // z-step on W u + beta; low pass passes through unthresholded
        FrameletCoeffs shifted = wu;
        for (size_t p = 0; p < shifted.planes.size(); ++p)
            for (size_t i = 0; i < shifted.planes[p].size(); ++i)
                shifted.planes[p][i] += beta.planes[p][i];
        z = soft_threshold(shifted, thresholds);

        double pr = 0.0;
        for (size_t p = 0; p < beta.planes.size(); ++p)
            for (size_t i = 0; i < beta.planes[p].size(); ++i) {
                const double resid = wu.planes[p][i] - z.planes[p][i];
                beta.planes[p][i] += resid;
                pr += resid * resid;
            }

        IterationRecord rec;
        rec.iter = k;
        rec.objective = objective_value(u, z, sino, geom, system, cfg.lambdas, gammas_flat);
        rec.primal_residual = std::sqrt(pr);
        rec.cg_iters = cg.iterations;
        trace.push_back(rec);
    }
    return {std::move(u), std::move(trace)};
}

}  // namespace ctlab
