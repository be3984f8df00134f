#include "ctlab/scanmdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ctlab/solvers.hpp"

namespace ctlab {
namespace {

double episode_score(const EpisodeConfig& cfg, const ImageGrid& recon) {
    if (cfg.reward_mode == RewardMode::task_score) {
        if (!cfg.score_fn) throw DomainError("task_score mode requires a score_fn");
        return cfg.score_fn(recon);
    }
    return psnr(cfg.ground_truth, recon);
}

int dose_menu_index(double fraction) {
    for (size_t i = 0; i < kDoseMenu.size(); ++i)
        if (std::abs(fraction - kDoseMenu[i]) < 1e-12) return static_cast<int>(i);
    return -1;
}

void check_cfg(const EpisodeConfig& cfg) {
    cfg.geom.validate();
    if (cfg.ground_truth.width != cfg.geom.image_size)
        throw ShapeError("EpisodeConfig: ground truth does not match geometry");
    if (cfg.sigma0 < 0.0) throw DomainError("EpisodeConfig: sigma0 must be >= 0");
    if (cfg.sart_iters < 0) throw DomainError("EpisodeConfig: sart_iters must be >= 0");
}

}  // namespace

ScanState env_reset(const EpisodeConfig& cfg) {
    check_cfg(cfg);
    ScanState state;
    const int N = cfg.geom.num_angles_total;
    state.collected = Sinogram({}, cfg.geom.detectors);
    state.dose_spent.assign(static_cast<size_t>(N), 0.0);
    state.visited.assign(static_cast<size_t>(N), false);
    state.dose_rest = 1.0;
    state.step = 0;
    state.last_recon = ImageGrid(cfg.geom.image_size, cfg.geom.image_size, 0.0);
    state.prev_score = episode_score(cfg, state.last_recon);
    state.noise_rng.seed(cfg.seed);
    state.done = cfg.max_steps <= 0;
    return state;
}

StepResult env_step(const ScanState& state, const ScanAction& action, const EpisodeConfig& cfg) {
    check_cfg(cfg);
    if (state.done) throw StateError("env_step: episode already finished");
    const int N = cfg.geom.num_angles_total;
    if (action.angle < 0 || action.angle >= N)
        throw DomainError("env_step: angle index out of range");
    if (state.visited[static_cast<size_t>(action.angle)])
        throw DomainError("env_step: angle already measured");
    if (dose_menu_index(action.dose_fraction) < 0)
        throw DomainError("env_step: dose fraction not on the menu");

    StepResult result;
    result.state = state;
    ScanState& next = result.state;

    const double applied = std::min(action.dose_fraction, state.dose_rest);
    Sinogram row = forward_project(cfg.ground_truth, cfg.geom, {action.angle});
    double sigma = 0.0;
    if (cfg.sigma0 > 0.0) {
        sigma = cfg.sigma0 / std::sqrt(applied);
        std::normal_distribution<double> gauss(0.0, sigma);
        for (double& v : row.data) v += gauss(next.noise_rng);
    }

    // keep rows sorted by angle so the collected sinogram stays valid
    const auto pos = std::lower_bound(next.collected.angles.begin(),
                                      next.collected.angles.end(), action.angle);
    const auto idx = static_cast<size_t>(pos - next.collected.angles.begin());
    next.collected.angles.insert(pos, action.angle);
    next.collected.data.insert(next.collected.data.begin() +
                                   static_cast<long>(idx * static_cast<size_t>(cfg.geom.detectors)),
                               row.data.begin(), row.data.end());
    next.collected.noise_sigma_per_row.insert(
        next.collected.noise_sigma_per_row.begin() + static_cast<long>(idx), sigma);

    next.dose_spent[static_cast<size_t>(action.angle)] += applied;
    next.dose_rest =
        1.0 - std::accumulate(next.dose_spent.begin(), next.dose_spent.end(), 0.0);
    next.visited[static_cast<size_t>(action.angle)] = true;
    next.step = state.step + 1;

    if (cfg.sart_iters > 0)
        next.last_recon = sart(next.collected, cfg.geom, cfg.sart_iters, cfg.sart_relax);

    const double score = episode_score(cfg, next.last_recon);
    if (cfg.action_reward)
        result.reward = cfg.action_reward(action.angle, applied, next.last_recon);
    else
        result.reward = score - state.prev_score;
    next.prev_score = score;

    next.done = next.dose_rest <= kDoseEpsilon || next.step >= cfg.max_steps;
    result.done = next.done;
    return result;
}

namespace {

class UniformPolicy final : public Policy {
  public:
    UniformPolicy(int num_angles, int steps) : angles_(), dose_(kDoseMenu[0]) {
        if (steps < 1 || steps > num_angles)
            throw DomainError("uniform_policy: need 1 <= steps <= num_angles");
        for (int i = 0; i < steps; ++i)
            angles_.push_back(static_cast<int>(static_cast<long>(i) * num_angles / steps));
        const double target = 1.0 / steps;
        double best = 1e300;
        for (double d : kDoseMenu)
            if (std::abs(d - target) < best) {
                best = std::abs(d - target);
                dose_ = d;
            }
    }

    ScanAction select(const ScanState& state, const EpisodeConfig&, std::mt19937_64&) override {
        if (state.step >= static_cast<int>(angles_.size()))
            throw StateError("uniform_policy: schedule exhausted");
        return {angles_[static_cast<size_t>(state.step)], dose_};
    }

  private:
    std::vector<int> angles_;
    double dose_;
};

class RandomPolicy final : public Policy {
  public:
    explicit RandomPolicy(uint64_t seed) : rng_(seed) {}

    ScanAction select(const ScanState& state, const EpisodeConfig&, std::mt19937_64&) override {
        std::vector<int> unvisited;
        for (size_t k = 0; k < state.visited.size(); ++k)
            if (!state.visited[k]) unvisited.push_back(static_cast<int>(k));
        if (unvisited.empty()) throw DomainError("random_policy: all angles visited");
        std::uniform_int_distribution<size_t> pick(0, unvisited.size() - 1);
        std::uniform_int_distribution<size_t> dose(0, kDoseMenu.size() - 1);
        return {unvisited[pick(rng_)], kDoseMenu[dose(rng_)]};
    }

  private:
    std::mt19937_64 rng_;
};

class GreedyOraclePolicy final : public Policy {
  public:
    ScanAction select(const ScanState& state, const EpisodeConfig& cfg,
                      std::mt19937_64&) override {
        ScanAction best{};
        double best_reward = -1e300;
        bool found = false;
        for (size_t k = 0; k < state.visited.size(); ++k) {
            if (state.visited[k]) continue;
            for (double dose : kDoseMenu) {
                const ScanAction cand{static_cast<int>(k), dose};
                const StepResult sim = env_step(state, cand, cfg);
                if (!found || sim.reward > best_reward) {
                    found = true;
                    best_reward = sim.reward;
                    best = cand;
                }
            }
        }
        if (!found) throw DomainError("greedy_oracle_policy: all angles visited");
        return best;
    }
};

class SoftmaxPolicyAdapter final : public Policy {
  public:
    explicit SoftmaxPolicyAdapter(PolicyParams params) : params_(std::move(params)) {}

    ScanAction select(const ScanState& state, const EpisodeConfig&,
                      std::mt19937_64& rng) override {
        return policy_sample(params_, state, rng);
    }

  private:
    PolicyParams params_;
};

}  // namespace

std::unique_ptr<Policy> uniform_policy(int num_angles, int steps) {
    return std::make_unique<UniformPolicy>(num_angles, steps);
}

std::unique_ptr<Policy> random_policy(uint64_t seed) {
    return std::make_unique<RandomPolicy>(seed);
}

std::unique_ptr<Policy> greedy_oracle_policy() { return std::make_unique<GreedyOraclePolicy>(); }

std::unique_ptr<Policy> softmax_policy(PolicyParams params) {
    return std::make_unique<SoftmaxPolicyAdapter>(std::move(params));
}

PolicyParams::PolicyParams(int angles, int steps, double temp)
    : num_angles(angles), max_steps(steps), temperature(temp),
      weights(static_cast<size_t>(3 * angles) * (2 * angles + 2), 0.0),
      bias(static_cast<size_t>(3 * angles), 0.0) {
    if (angles < 1 || steps < 1 || !(temp > 0.0)) throw DomainError("PolicyParams: bad shape");
}

std::vector<double> policy_features(const PolicyParams& params, const ScanState& state) {
    const int N = params.num_angles;
    if (static_cast<int>(state.visited.size()) != N)
        throw ShapeError("policy_features: state angle count does not match params");
    std::vector<double> phi(static_cast<size_t>(params.feature_dim()));
    for (int k = 0; k < N; ++k) phi[static_cast<size_t>(k)] = state.visited[static_cast<size_t>(k)] ? 1.0 : 0.0;
    for (int k = 0; k < N; ++k) phi[static_cast<size_t>(N + k)] = state.dose_spent[static_cast<size_t>(k)];
    phi[static_cast<size_t>(2 * N)] = state.dose_rest;
    phi[static_cast<size_t>(2 * N + 1)] = static_cast<double>(state.step) / params.max_steps;
    return phi;
}

std::vector<double> policy_probs(const PolicyParams& params, const ScanState& state) {
    const int N = params.num_angles;
    const std::vector<double> phi = policy_features(params, state);
    const int A = params.action_count();
    const int F = params.feature_dim();
    std::vector<double> logits(static_cast<size_t>(A), -std::numeric_limits<double>::infinity());
    bool any_valid = false;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < A; ++a) {
        const int angle = a / 3;
        if (state.visited[static_cast<size_t>(angle)]) continue;
        any_valid = true;
        double z = params.bias[static_cast<size_t>(a)];
        const double* w = params.weights.data() + static_cast<size_t>(a) * F;
        for (int k = 0; k < F; ++k) z += w[k] * phi[static_cast<size_t>(k)];
        z /= params.temperature;
        logits[static_cast<size_t>(a)] = z;
        max_logit = std::max(max_logit, z);
    }
    if (!any_valid) throw DomainError("policy_probs: all angles visited");
    std::vector<double> probs(static_cast<size_t>(A), 0.0);
    double norm = 0.0;
    for (int a = 0; a < A; ++a) {
        if (!std::isfinite(logits[static_cast<size_t>(a)])) continue;
        probs[static_cast<size_t>(a)] = std::exp(logits[static_cast<size_t>(a)] - max_logit);
        norm += probs[static_cast<size_t>(a)];
    }
    for (double& p : probs) p /= norm;
    (void)N;
    return probs;
}

ScanAction policy_sample(const PolicyParams& params, const ScanState& state,
                         std::mt19937_64& rng) {
    const std::vector<double> probs = policy_probs(params, state);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0.0;
    int chosen = -1;
    for (size_t a = 0; a < probs.size(); ++a) {
        cum += probs[a];
        if (u < cum) {
            chosen = static_cast<int>(a);
            break;
        }
    }
    if (chosen < 0)  // numerical tail
        for (size_t a = probs.size(); a-- > 0;)
            if (probs[a] > 0.0) {
                chosen = static_cast<int>(a);
                break;
            }
    return {chosen / 3, kDoseMenu[static_cast<size_t>(chosen % 3)]};
}

double policy_logprob(const PolicyParams& params, const ScanState& state,
                      const ScanAction& action) {
    const int d = dose_menu_index(action.dose_fraction);
    if (d < 0) throw DomainError("policy_logprob: dose fraction not on the menu");
    const std::vector<double> probs = policy_probs(params, state);
    const double p = probs[static_cast<size_t>(action.angle * 3 + d)];
    return std::log(p);
}

ReinforceResult reinforce_train(const std::function<EpisodeConfig(int)>& cfg_sampler,
                                const PolicyParams& params0, int episodes, double lr,
                                int baseline_window, uint64_t seed) {
    if (episodes < 1) throw DomainError("reinforce_train: episodes must be >= 1");
    if (lr < 0.0) throw DomainError("reinforce_train: lr must be >= 0");
    if (baseline_window < 1) throw DomainError("reinforce_train: baseline window must be >= 1");

    ReinforceResult result;
    result.params = params0;
    PolicyParams& params = result.params;
    const int F = params.feature_dim();
    std::mt19937_64 action_rng(seed);

    for (int ep = 0; ep < episodes; ++ep) {
        const EpisodeConfig cfg = cfg_sampler(ep);
        ScanState state = env_reset(cfg);
        std::vector<std::vector<double>> step_phi, step_probs;
        std::vector<int> step_action;
        std::vector<double> rewards;
        while (!state.done) {
            const std::vector<double> probs = policy_probs(params, state);
            step_phi.push_back(policy_features(params, state));
            step_probs.push_back(probs);
            const ScanAction action = policy_sample(params, state, action_rng);
            step_action.push_back(action.angle * 3 + dose_menu_index(action.dose_fraction));
            StepResult res = env_step(state, action, cfg);
            rewards.push_back(res.reward);
            state = std::move(res.state);
        }

        // returns-to-go
        std::vector<double> returns(rewards.size());
        double g = 0.0;
        for (size_t t = rewards.size(); t-- > 0;) {
            g += rewards[t];
            returns[t] = g;
        }
        const double episode_return = rewards.empty() ? 0.0 : returns[0];

        double baseline = 0.0;
        const int have = static_cast<int>(result.return_curve.size());
        const int use = std::min(have, baseline_window);
        for (int i = 0; i < use; ++i)
            baseline += result.return_curve[static_cast<size_t>(have - 1 - i)];
        if (use > 0) baseline /= use;

        if (lr > 0.0) {
            for (size_t t = 0; t < rewards.size(); ++t) {
                const double adv = returns[t] - baseline;
                const std::vector<double>& probs = step_probs[t];
                const std::vector<double>& phi = step_phi[t];
                for (size_t a = 0; a < probs.size(); ++a) {
                    const double indicator = (static_cast<int>(a) == step_action[t]) ? 1.0 : 0.0;
                    if (indicator == 0.0 && probs[a] == 0.0) continue;
                    const double coef = lr * adv * (indicator - probs[a]) / params.temperature;
                    double* w = params.weights.data() + a * static_cast<size_t>(F);
                    for (int k = 0; k < F; ++k) w[k] += coef * phi[static_cast<size_t>(k)];
                    params.bias[a] += coef;
                }
            }
            for (double w : params.bias)
                if (!std::isfinite(w))
                    throw NumericalError("reinforce_train: non-finite parameters at episode " +
                                         std::to_string(ep));
        }
        result.return_curve.push_back(episode_return);
    }
    return result;
}

PolicySummary evaluate_policy(Policy& policy, const std::vector<ImageGrid>& test_images,
                              const EpisodeConfig& cfg_template, int episodes_per_image,
                              uint64_t seed) {
    if (test_images.empty()) throw DomainError("evaluate_policy: empty test set");
    PolicySummary summary;
    std::vector<double> finals;
    for (size_t i = 0; i < test_images.size(); ++i) {
        for (int e = 0; e < episodes_per_image; ++e) {
            EpisodeConfig cfg = cfg_template;
            cfg.ground_truth = test_images[i];
            cfg.seed = seed + 1000003ull * i + 17ull * static_cast<uint64_t>(e);
            std::mt19937_64 action_rng(cfg.seed ^ 0x5deece66dull);
            ScanState state = env_reset(cfg);
            double total = 0.0;
            while (!state.done) {
                const ScanAction action = policy.select(state, cfg, action_rng);
                StepResult res = env_step(state, action, cfg);
                total += res.reward;
                state = std::move(res.state);
            }
            EpisodeRecord rec;
            rec.image_index = static_cast<int>(i);
            rec.episode = e;
            rec.total_return = total;
            rec.final_psnr = psnr(cfg.ground_truth, state.last_recon);
            summary.episodes.push_back(rec);
            finals.push_back(rec.final_psnr);
            summary.mean_return += total;
        }
    }
    const double n = static_cast<double>(finals.size());
    summary.mean_return /= n;
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= n;
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    summary.mean_final_psnr = mean;
    summary.stddev_final_psnr = std::sqrt(var / n);
    return summary;
}

void save_policy_params(const PolicyParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "CTPOLICY 1\n";
    out << params.num_angles << " " << params.max_steps << " " << params.temperature << "\n";
    const int cols = params.feature_dim();
    for (int a = 0; a < params.action_count(); ++a) {
        for (int j = 0; j < cols; ++j) {
            if (j) out << " ";
            out << params.weights[static_cast<size_t>(a) * cols + j];
        }
        out << "\n";
    }
    for (int a = 0; a < params.action_count(); ++a) {
        if (a) out << " ";
        out << params.bias[static_cast<size_t>(a)];
    }
    out << "\n";
}

PolicyParams load_policy_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open policy file: " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "CTPOLICY" || version != 1)
        throw FormatError("not a policy file: " + path.string());
    int num_angles = 0, max_steps = 0;
    double temperature = 0.0;
    in >> num_angles >> max_steps >> temperature;
    if (!in || num_angles < 1 || max_steps < 1 || temperature <= 0.0)
        throw FormatError("corrupt policy header: " + path.string());
    PolicyParams params(num_angles, max_steps, temperature);
    for (double& w : params.weights) in >> w;
    for (double& b : params.bias) in >> b;
    if (!in) throw FormatError("truncated policy file: " + path.string());
    return params;
}

void write_return_curve_csv(const std::vector<double>& returns, int window,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "episode,return,moving_avg\n";
    out.precision(17);
    double acc = 0.0;
    std::vector<double> buf;
    for (size_t i = 0; i < returns.size(); ++i) {
        buf.push_back(returns[i]);
        acc += returns[i];
        if (static_cast<int>(buf.size()) > window) {
            acc -= buf[buf.size() - static_cast<size_t>(window) - 1];
        }
        const int use = std::min<int>(window, static_cast<int>(buf.size()));
        out << i << "," << returns[i] << "," << acc / use << "\n";
    }
}

void write_trajectory_csv(const std::vector<TrajectoryStep>& steps,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "episode,step,angle,dose,reward,psnr\n";
    out.precision(17);
    for (const TrajectoryStep& s : steps)
        out << s.episode << "," << s.step << "," << s.angle << "," << s.dose << "," << s.reward
            << "," << s.psnr << "\n";
}

}  // namespace ctlab
