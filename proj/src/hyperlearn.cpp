#include "ctlab/hyperlearn.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "ctlab/io.hpp"

namespace ctlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Dataset {
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;
};

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    Dataset ds;
    ds.entries = load_manifest(manifest_path);
    ds.base_dir = manifest_path.parent_path();
    if (ds.entries.empty()) throw DomainError("hyperlearn: empty dataset");
    return ds;
}

HqsConfig cfg_from_log_params(const HqsConfig& base, const std::vector<double>& theta) {
    HqsConfig cfg = base;
    const size_t L = base.lambdas.size();
    for (size_t l = 0; l < L; ++l) {
        cfg.lambdas[l] = std::pow(10.0, theta[l]);
        cfg.gammas[l] = std::pow(10.0, theta[L + l]);
    }
    return cfg;
}

std::vector<double> log_params(const HqsConfig& cfg) {
    std::vector<double> theta;
    for (double l : cfg.lambdas) theta.push_back(std::log10(std::max(l, 1e-8)));
    for (double g : cfg.gammas) theta.push_back(std::log10(g));
    return theta;
}

class SearchDriver {
  public:
    SearchDriver(const Dataset& ds, const ProjectionGeometry& geom, const FrameletSystem& system,
                 const HqsConfig& base, const LearnConfig& lc)
        : ds_(ds), geom_(geom), system_(system), base_(base), lc_(lc) {}

    double score(const std::vector<double>& theta) {
        const HqsConfig cfg = cfg_from_log_params(base_, theta);
        double mean_psnr = 0.0;
        const double obj =
            training_objective(ds_.entries, ds_.base_dir, geom_, system_, cfg, lc_, &mean_psnr);
        SearchRecord rec;
        rec.eval_id = static_cast<int>(log_.size());
        rec.lambdas = cfg.lambdas;
        rec.gammas = cfg.gammas;
        rec.objective = obj;
        rec.mean_psnr = mean_psnr;
        log_.push_back(rec);
        if (obj < best_obj_) {
            best_obj_ = obj;
            best_theta_ = theta;
        }
        return obj;
    }

    const std::vector<double>& best_theta() const { return best_theta_; }
    std::vector<SearchRecord>&& take_log() { return std::move(log_); }

  private:
    const Dataset& ds_;
    const ProjectionGeometry& geom_;
    const FrameletSystem& system_;
    const HqsConfig& base_;
    const LearnConfig& lc_;
    std::vector<SearchRecord> log_;
    double best_obj_ = kInf;
    std::vector<double> best_theta_;
};

// Standard Nelder-Mead on the search driver, capped at max_evals scores.
void nelder_mead(SearchDriver& driver, const std::vector<double>& start, int max_evals) {
    const size_t dim = start.size();
    if (max_evals < static_cast<int>(dim) + 2) return;
    int evals = 0;
    auto score = [&](const std::vector<double>& x) {
        ++evals;
        return driver.score(x);
    };

    std::vector<std::pair<double, std::vector<double>>> simplex;
    simplex.push_back({score(start), start});
    for (size_t i = 0; i < dim; ++i) {
        std::vector<double> v = start;
        v[i] += 0.25;
        simplex.push_back({score(v), v});
    }

    while (evals < max_evals) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<double> centroid(dim, 0.0);
        for (size_t i = 0; i < dim; ++i) {
            for (size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].second[j];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);
        const auto& worst = simplex.back();

        auto blend = [&](double t) {
            std::vector<double> v(dim);
            for (size_t j = 0; j < dim; ++j)
                v[j] = centroid[j] + t * (centroid[j] - worst.second[j]);
            return v;
        };

        const std::vector<double> reflected = blend(1.0);
        const double fr = score(reflected);
        if (fr < simplex.front().first && evals < max_evals) {
            const std::vector<double> expanded = blend(2.0);
            const double fe = score(expanded);
            simplex.back() = fe < fr ? std::make_pair(fe, expanded) : std::make_pair(fr, reflected);
        } else if (fr < simplex[dim - 1].first) {
            simplex.back() = {fr, reflected};
        } else if (evals < max_evals) {
            const std::vector<double> contracted = blend(-0.5);
            const double fc = score(contracted);
            if (fc < worst.first) {
                simplex.back() = {fc, contracted};
            } else {
                // shrink toward the best vertex
                for (size_t i = 1; i < simplex.size() && evals < max_evals; ++i) {
                    for (size_t j = 0; j < dim; ++j)
                        simplex[i].second[j] =
                            0.5 * (simplex[i].second[j] + simplex[0].second[j]);
                    simplex[i].first = score(simplex[i].second);
                }
            }
        }
    }
}

}  // namespace

double training_objective(const std::vector<ManifestEntry>& entries,
                          const std::filesystem::path& base_dir,
                          const ProjectionGeometry& geom, const FrameletSystem& system,
                          const HqsConfig& cfg, const LearnConfig& learn_cfg,
                          double* mean_psnr_out) {
    learn_cfg.validate();
    if (entries.empty()) throw DomainError("training_objective: empty dataset");
    double loss_sum = 0.0;
    double psnr_sum = 0.0;
    bool failed = false;
    for (const ManifestEntry& entry : entries) {
        try {
            const ImageGrid truth = load_grid(base_dir / entry.image_path);
            const Sinogram f = load_sinogram(base_dir / entry.sino_path);
            auto [recon, trace] = hqs_reconstruct(f, geom, system, cfg);
            psnr_sum += psnr(truth, recon);
            if (learn_cfg.mode == LearnMode::supervised) {
                loss_sum += mse(truth, recon);
            } else {
                const Sinogram af = forward_project(recon, geom, f.angles);
                double acc = 0.0;
                for (size_t i = 0; i < af.data.size(); ++i) {
                    const double d = af.data[i] - f.data[i];
                    acc += d * d;
                }
                loss_sum += acc / static_cast<double>(af.data.size());
            }
        } catch (const NumericalError&) {
            failed = true;
            break;
        }
    }
    if (mean_psnr_out)
        *mean_psnr_out = failed ? -kInf : psnr_sum / static_cast<double>(entries.size());
    if (failed) return kInf;
    double obj = loss_sum / static_cast<double>(entries.size());
    if (learn_cfg.reg_weight > 0.0) {
        double ridge = 0.0;
        for (double t : log_params(cfg)) ridge += t * t;
        obj += learn_cfg.reg_weight * ridge;
    }
    return obj;
}

FitResult fit_hyperparameters(const std::filesystem::path& manifest_path,
                              const ProjectionGeometry& geom, const FrameletSystem& system,
                              const HqsConfig& base_cfg, const LearnConfig& learn_cfg) {
    learn_cfg.validate();
    base_cfg.validate(system.levels);
    const Dataset ds = load_dataset(manifest_path);
    SearchDriver driver(ds, geom, system, base_cfg, learn_cfg);

    const std::vector<double> center = log_params(base_cfg);
    const size_t dim = center.size();

    // grid phase; the baseline itself is always evaluation 0
    driver.score(center);
    if (learn_cfg.grid_points > 1) {
        std::vector<int> idx(dim, 0);
        const int P = learn_cfg.grid_points;
        while (true) {
            std::vector<double> theta(dim);
            for (size_t j = 0; j < dim; ++j)
                theta[j] = center[j] - learn_cfg.grid_span +
                           2.0 * learn_cfg.grid_span * idx[j] / (P - 1);
            driver.score(theta);
            size_t j = 0;
            while (j < dim && ++idx[j] == P) idx[j++] = 0;
            if (j == dim) break;
        }
    }

    if (learn_cfg.nm_max_evals > 0) nelder_mead(driver, driver.best_theta(), learn_cfg.nm_max_evals);

    FitResult result;
    result.best = cfg_from_log_params(base_cfg, driver.best_theta());
    result.log = driver.take_log();
    return result;
}

EvalSummary evaluate_reconstructor(const std::filesystem::path& manifest_path,
                                   const ProjectionGeometry& geom, const FrameletSystem& system,
                                   const HqsConfig& cfg) {
    const Dataset ds = load_dataset(manifest_path);
    EvalSummary summary;
    for (const ManifestEntry& entry : ds.entries) {
        const ImageGrid truth = load_grid(ds.base_dir / entry.image_path);
        const Sinogram f = load_sinogram(ds.base_dir / entry.sino_path);
        const auto start = std::chrono::steady_clock::now();
        auto [recon, trace] = hqs_reconstruct(f, geom, system, cfg);
        const auto stop = std::chrono::steady_clock::now();
        SampleEval sample;
        sample.quality.mse = mse(truth, recon);
        sample.quality.psnr = psnr(truth, recon);
        sample.quality.runtime_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
        const Sinogram af = forward_project(recon, geom, f.angles);
        double acc = 0.0;
        for (size_t i = 0; i < af.data.size(); ++i) {
            const double d = af.data[i] - f.data[i];
            acc += d * d;
        }
        sample.data_consistency = std::sqrt(acc);
        summary.samples.push_back(sample);
        summary.mean_psnr += sample.quality.psnr;
        summary.mean_mse += sample.quality.mse;
        summary.mean_data_consistency += sample.data_consistency;
    }
    const double n = static_cast<double>(summary.samples.size());
    summary.mean_psnr /= n;
    summary.mean_mse /= n;
    summary.mean_data_consistency /= n;
    return summary;
}

void write_search_log_csv(const std::vector<SearchRecord>& log,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    if (log.empty()) {
        out << "eval_id,objective,mean_psnr\n";
        return;
    }
    out << "eval_id";
    for (size_t l = 0; l < log[0].lambdas.size(); ++l) out << ",lambda_" << l;
    for (size_t l = 0; l < log[0].gammas.size(); ++l) out << ",gamma_" << l;
    out << ",objective,mean_psnr\n";
    out.precision(17);
    for (const SearchRecord& rec : log) {
        out << rec.eval_id;
        for (double v : rec.lambdas) out << "," << v;
        for (double v : rec.gammas) out << "," << v;
        out << "," << rec.objective << "," << rec.mean_psnr << "\n";
    }
}

}  // namespace ctlab
