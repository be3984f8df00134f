#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "ctlab/grid.hpp"
#include "ctlab/projector.hpp"

namespace ctlab {

// Discrete dose menu: fractions of the TOTAL budget, clipped to the remainder.
inline constexpr std::array<double, 3> kDoseMenu = {0.02, 0.05, 0.10};
inline constexpr double kDoseEpsilon = 1e-9;

enum class RewardMode { psnr, task_score };

struct EpisodeConfig {
    ProjectionGeometry geom;
    ImageGrid ground_truth;
    double sigma0 = 0.0;    // sinogram noise at unit dose; per-row sigma is sigma0/sqrt(dose)
    int sart_iters = 10;
    double sart_relax = 1.0;
    int max_steps = 20;
    RewardMode reward_mode = RewardMode::psnr;
    // Step score for task_score mode; reward is score(I_t) - score(I_{t-1}).
    std::function<double(const ImageGrid&)> score_fn;
    // Overrides the score delta entirely (test/toy MDPs); gets the chosen
    // action and the current reconstruction.
    std::function<double(int angle, double dose, const ImageGrid& recon)> action_reward;
    uint64_t seed = 0;
};

struct ScanAction {
    int angle = 0;
    double dose_fraction = kDoseMenu[1];
};

// Full MDP state. The measurement noise stream lives in the state so that
// stepping is a pure function of (state, action, cfg) and candidate rollouts
// can fork by value.
struct ScanState {
    Sinogram collected;               // rows kept sorted by angle
    std::vector<double> dose_spent;   // per angle, length N
    double dose_rest = 1.0;
    int step = 0;
    std::vector<bool> visited;
    bool done = false;
    double prev_score = 0.0;          // score of the previous reconstruction
    ImageGrid last_recon;
    std::mt19937_64 noise_rng;
};

struct StepResult {
    ScanState state;
    double reward = 0.0;
    bool done = false;
};

ScanState env_reset(const EpisodeConfig& cfg);
StepResult env_step(const ScanState& state, const ScanAction& action, const EpisodeConfig& cfg);

// Policy abstraction; the rng is the caller's action-sampling stream,
// separate from the environment noise stream.
struct Policy {
    virtual ~Policy() = default;
    virtual ScanAction select(const ScanState& state, const EpisodeConfig& cfg,
                              std::mt19937_64& rng) = 0;
};

std::unique_ptr<Policy> uniform_policy(int num_angles, int steps);
std::unique_ptr<Policy> random_policy(uint64_t seed);
// One-step lookahead on the realized reward; uses the ground truth through
// the simulated environment, so it is an oracle upper baseline.
std::unique_ptr<Policy> greedy_oracle_policy();

// Linear softmax policy over (angle, dose-bin) pairs on the feature vector
// visited ++ dose_spent ++ dose_rest ++ t/max_steps.
struct PolicyParams {
    int num_angles = 0;
    int max_steps = 1;
    double temperature = 1.0;
    std::vector<double> weights;  // (N*3) x (2N+2), row-major
    std::vector<double> bias;     // N*3

    PolicyParams() = default;
    PolicyParams(int angles, int steps, double temp = 1.0);
    int feature_dim() const { return 2 * num_angles + 2; }
    int action_count() const { return 3 * num_angles; }
};

std::vector<double> policy_features(const PolicyParams& params, const ScanState& state);
// Masked softmax over unvisited (angle, dose) pairs.
std::vector<double> policy_probs(const PolicyParams& params, const ScanState& state);
ScanAction policy_sample(const PolicyParams& params, const ScanState& state,
                         std::mt19937_64& rng);
double policy_logprob(const PolicyParams& params, const ScanState& state,
                      const ScanAction& action);
std::unique_ptr<Policy> softmax_policy(PolicyParams params);

struct ReinforceResult {
    PolicyParams params;
    std::vector<double> return_curve;  // total return per episode
};

// Episodic REINFORCE with a moving-average return baseline.
ReinforceResult reinforce_train(const std::function<EpisodeConfig(int)>& cfg_sampler,
                                const PolicyParams& params0, int episodes, double lr,
                                int baseline_window, uint64_t seed);

struct EpisodeRecord {
    int image_index = 0;
    int episode = 0;
    double total_return = 0.0;
    double final_psnr = 0.0;
};

struct PolicySummary {
    double mean_final_psnr = 0.0;
    double stddev_final_psnr = 0.0;
    double mean_return = 0.0;
    std::vector<EpisodeRecord> episodes;
};

PolicySummary evaluate_policy(Policy& policy, const std::vector<ImageGrid>& test_images,
                              const EpisodeConfig& cfg_template, int episodes_per_image,
                              uint64_t seed);

// Text serialization: "CTPOLICY" header, dimensions, then weight rows and
// the bias line at full precision.
void save_policy_params(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_policy_params(const std::filesystem::path& path);

// "episode,return,moving_avg"
void write_return_curve_csv(const std::vector<double>& returns, int window,
                            const std::filesystem::path& path);

// "episode,step,angle,dose,reward,psnr" collected while running a policy.
struct TrajectoryStep {
    int episode = 0;
    int step = 0;
    int angle = 0;
    double dose = 0.0;
    double reward = 0.0;
    double psnr = 0.0;
};
void write_trajectory_csv(const std::vector<TrajectoryStep>& steps,
                          const std::filesystem::path& path);

}  // namespace ctlab
