#include "ctlab/taskpipe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "ctlab/io.hpp"
#include "ctlab/phantom.hpp"

namespace ctlab {
namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

std::vector<double> block_features(const ImageGrid& image, int block) {
    image.validate();
    if (block < 1) throw DomainError("block_features: block must be >= 1");
    if (image.width % block != 0)
        throw ShapeError("block_features: image size not divisible by block");
    const int nb = image.width / block;
    std::vector<double> features(static_cast<size_t>(nb) * nb, 0.0);
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
            features[static_cast<size_t>(r / block) * nb + c / block] += image.at(r, c);
        }
    }
    const double inv = 1.0 / (static_cast<double>(block) * block);
    for (double& f : features) f *= inv;
    return features;
}

Classifier train_classifier(const std::vector<ImageGrid>& images, const std::vector<int>& labels,
                            int block) {
    if (images.empty()) throw DomainError("train_classifier: empty training set");
    if (images.size() != labels.size())
        throw ShapeError("train_classifier: images/labels size mismatch");
    std::map<int, std::pair<std::vector<double>, int>> sums;
    for (size_t i = 0; i < images.size(); ++i) {
        const std::vector<double> f = block_features(images[i], block);
        auto [it, inserted] = sums.try_emplace(labels[i], std::vector<double>(f.size(), 0.0), 0);
        if (it->second.first.size() != f.size())
            throw ShapeError("train_classifier: inconsistent image sizes");
        for (size_t j = 0; j < f.size(); ++j) it->second.first[j] += f[j];
        ++it->second.second;
    }
    Classifier clf;
    clf.block = block;
    for (auto& [label, sum_count] : sums) {
        auto& [sum, count] = sum_count;
        for (double& v : sum) v /= static_cast<double>(count);
        clf.labels.push_back(label);
        clf.centroids.push_back(std::move(sum));
    }
    return clf;
}

Prediction classify(const Classifier& clf, const ImageGrid& image) {
    if (clf.labels.empty()) throw StateError("classify: untrained classifier");
    const std::vector<double> f = block_features(image, clf.block);
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    int best_label = clf.labels.front();
    for (size_t i = 0; i < clf.labels.size(); ++i) {
        const double d = sq_dist(f, clf.centroids[i]);
        if (d < best) {
            second = best;
            best = d;
            best_label = clf.labels[i];
        } else if (d < second) {
            second = d;
        }
    }
    Prediction pred;
    pred.label = best_label;
    pred.margin = std::isinf(second) ? 0.0 : std::sqrt(second) - std::sqrt(best);
    return pred;
}

TaskReport pipeline_eval(const std::filesystem::path& manifest_path,
                         const ProjectionGeometry& geom, const FrameletSystem& system,
                         const HqsConfig& cfg, const SensingPlan& plan, const Classifier& clf,
                         uint64_t seed) {
    if (plan.angles.size() != plan.doses.size())
        throw ShapeError("pipeline_eval: plan angles/doses size mismatch");
    for (double d : plan.doses)
        if (d <= 0.0) throw DomainError("pipeline_eval: plan doses must be > 0");
    const std::vector<ManifestEntry> entries = load_manifest(manifest_path);
    const std::filesystem::path base_dir = manifest_path.parent_path();

    // sorted unique acquisition order; doses at duplicate angles accumulate
    std::map<int, double> dose_by_angle;
    for (size_t i = 0; i < plan.angles.size(); ++i) dose_by_angle[plan.angles[i]] += plan.doses[i];

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TaskReport report;
    for (const ManifestEntry& entry : entries) {
        const ImageGrid truth = load_grid(base_dir / entry.image_path);
        ImageGrid recon(geom.image_size, geom.image_size, 0.0);
        if (!dose_by_angle.empty()) {
            std::vector<int> angles;
            for (const auto& [angle, dose] : dose_by_angle) angles.push_back(angle);
            Sinogram sino = forward_project(truth, geom, angles);
            int r = 0;
            for (const auto& [angle, dose] : dose_by_angle) {
                const double sigma = plan.sigma0 > 0.0 ? plan.sigma0 / std::sqrt(dose) : 0.0;
                sino.noise_sigma_per_row[r] = sigma;
                if (sigma > 0.0) {
                    double* row = sino.row(r);
                    for (int d = 0; d < sino.detectors; ++d) row[d] += sigma * gauss(rng);
                }
                ++r;
            }
            recon = hqs_reconstruct(sino, geom, system, cfg).first;
        }
        const Prediction pred = classify(clf, recon);
        TaskSample sample;
        sample.sample_id = entry.id;
        sample.true_label = entry.label;
        sample.pred_label = pred.label;
        sample.margin = pred.margin;
        sample.psnr = psnr(truth, recon);
        report.samples.push_back(sample);
        report.accuracy += pred.label == entry.label ? 1.0 : 0.0;
        report.mean_margin += pred.margin;
        report.mean_psnr += sample.psnr;
    }
    if (!report.samples.empty()) {
        const double n = static_cast<double>(report.samples.size());
        report.accuracy /= n;
        report.mean_margin /= n;
        report.mean_psnr /= n;
    }
    return report;
}

std::function<double(const ImageGrid&)> task_reward_adapter(const Classifier& clf,
                                                            int true_label) {
    return [clf, true_label](const ImageGrid& image) {
        const Prediction pred = classify(clf, image);
        return pred.label == true_label ? pred.margin : -pred.margin;
    };
}

void write_task_report_csv(const TaskReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "sample_id,true_label,pred_label,margin,psnr\n";
    out.precision(17);
    for (const TaskSample& s : report.samples) {
        out << s.sample_id << "," << s.true_label << "," << s.pred_label << "," << s.margin
            << "," << s.psnr << "\n";
    }
}

}  // namespace ctlab
