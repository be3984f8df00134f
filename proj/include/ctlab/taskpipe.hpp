#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "ctlab/framelet.hpp"
#include "ctlab/grid.hpp"
#include "ctlab/projector.hpp"
#include "ctlab/solvers.hpp"

namespace ctlab {

// Nearest-centroid classifier on block-mean features. Ties in distance go to
// the lowest class label; the margin is d2 - d1 (runner-up minus winner), so
// it is >= 0 and 0 exactly on ties.
struct Classifier {
    int block = 8;                      // image size must be divisible by this
    std::vector<int> labels;            // sorted ascending, unique
    std::vector<std::vector<double>> centroids;  // parallel to labels
};

struct Prediction {
    int label = 0;
    double margin = 0.0;
};

std::vector<double> block_features(const ImageGrid& image, int block);
Classifier train_classifier(const std::vector<ImageGrid>& images, const std::vector<int>& labels,
                            int block = 8);
Prediction classify(const Classifier& clf, const ImageGrid& image);

// A fixed measurement plan: acquire the listed angles with per-angle dose
// fractions; row noise is sigma0 / sqrt(dose_i).
struct SensingPlan {
    std::vector<int> angles;
    std::vector<double> doses;
    double sigma0 = 0.0;
};

struct TaskSample {
    int sample_id = 0;
    int true_label = 0;
    int pred_label = 0;
    double margin = 0.0;
    double psnr = 0.0;
};

struct TaskReport {
    std::vector<TaskSample> samples;
    double accuracy = 0.0;
    double mean_margin = 0.0;
    double mean_psnr = 0.0;
};

// Simulate the plan on each manifest image (noisy sinogram -> HQS
// reconstruction -> classification). An empty plan yields the zero image.
TaskReport pipeline_eval(const std::filesystem::path& manifest_path,
                         const ProjectionGeometry& geom, const FrameletSystem& system,
                         const HqsConfig& cfg, const SensingPlan& plan, const Classifier& clf,
                         uint64_t seed);

// Task-driven step score for the scan MDP: signed margin of the current
// reconstruction, positive iff the classifier is right about true_label.
std::function<double(const ImageGrid&)> task_reward_adapter(const Classifier& clf,
                                                            int true_label);

// "sample_id,true_label,pred_label,margin,psnr"
void write_task_report_csv(const TaskReport& report, const std::filesystem::path& path);

}  // namespace ctlab
