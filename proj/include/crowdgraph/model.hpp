#pragma once

// Generative crowdsourcing models. A model fixes the true answers a in {-1,+1}^T
// and a skill matrix F in [0,1]^{T x W}; worker j answers task i with a_i with
// probability F_ij and with -a_i otherwise, independently across pairs.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crowdgraph/assignment.hpp"
#include "crowdgraph/errors.hpp"
#include "crowdgraph/rng.hpp"
#include "json.hpp"

namespace crowdgraph {

class TrueAnswers {
public:
    explicit TrueAnswers(std::vector<int> values) : values_(std::move(values)) {
        detail::require(!values_.empty(), "TrueAnswers: need at least one task");
        for (int v : values_) detail::require(v == 1 || v == -1, "TrueAnswers: entries must be +1 or -1");
    }

    /// Each answer is +1 with probability `alpha`, independently.
    static TrueAnswers bernoulli(std::size_t tasks, double alpha, std::uint64_t seed) {
        detail::require(detail::is_probability(alpha), "TrueAnswers::bernoulli: alpha outside [0,1]");
        Rng rng(seed);
        std::vector<int> v(tasks);
        for (auto& x : v) x = rng.sign_with_probability(alpha);
        return TrueAnswers(std::move(v));
    }

    std::size_t size() const noexcept { return values_.size(); }
    int operator[](std::size_t i) const { return values_[i]; }
    std::span<const int> values() const noexcept { return values_; }

    friend bool operator==(const TrueAnswers&, const TrueAnswers&) = default;

private:
    std::vector<int> values_;
};

/// Model 1: F_ij = w_j.
struct DawidSkene {
    std::vector<double> reliability;
};

/// F_ij = t_i w_j + (1 - t_i)(1 - w_j), t_i in [1/2, 1].
struct DifficultyReliability {
    std::vector<double> difficulty;
    std::vector<double> reliability;
};

/// F_ij = w_j (1 - t_i) + t_i / 2.
struct Monotone {
    std::vector<double> difficulty;
    std::vector<double> reliability;
};

/// d-type specialization: F_ij = p when task and worker types match, 1/2 otherwise.
/// Type labels are 0-based, in [0, d).
struct DType {
    int d = 1;
    double p = 0.5;
    std::vector<int> task_types;
    std::vector<int> worker_types;
};

/// Spammers answer by coin toss (F = 1/2); hammers are always right (F = 1).
struct SpammerHammer {
    double sigma2 = 0.0;  // probability a worker is a hammer, when generated
    std::vector<bool> hammers;
};

using ModelParams = std::variant<DawidSkene, DifficultyReliability, Monotone, DType, SpammerHammer>;

class CrowdModel {
public:
    CrowdModel(ModelParams params, TrueAnswers answers) : params_(std::move(params)), answers_(std::move(answers)) {
        validate();
    }

    std::size_t task_count() const noexcept { return answers_.size(); }
    std::size_t worker_count() const noexcept { return workers_; }
    const TrueAnswers& answers() const noexcept { return answers_; }
    const ModelParams& params() const noexcept { return params_; }

    template <class V>
    const V* get_if() const noexcept {
        return std::get_if<V>(&params_);
    }

    /// F_ij.
    double skill(std::size_t i, std::size_t j) const {
        check_index(i, j);
        return skill_unchecked(i, j);
    }

    /// E[M_ij] = a_i (2 F_ij - 1).
    double expected_response(std::size_t i, std::size_t j) const {
        check_index(i, j);
        return answers_[i] * (2.0 * skill_unchecked(i, j) - 1.0);
    }

    std::vector<double> skill_row(std::size_t i) const {
        check_index(i, 0);
        std::vector<double> row(workers_);
        for (std::size_t j = 0; j < workers_; ++j) row[j] = skill_unchecked(i, j);
        return row;
    }

    Eigen::MatrixXd expected_matrix() const {
        Eigen::MatrixXd m(task_count(), workers_);
        for (std::size_t i = 0; i < task_count(); ++i) {
            for (std::size_t j = 0; j < workers_; ++j) m(i, j) = answers_[i] * (2.0 * skill_unchecked(i, j) - 1.0);
        }
        return m;
    }

private:
    double skill_unchecked(std::size_t i, std::size_t j) const {
        return std::visit(
            [&](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, DawidSkene>) {
                    return m.reliability[j];
                } else if constexpr (std::is_same_v<M, DifficultyReliability>) {
                    const double t = m.difficulty[i], w = m.reliability[j];
                    return t * w + (1.0 - t) * (1.0 - w);
                } else if constexpr (std::is_same_v<M, Monotone>) {
                    const double t = m.difficulty[i], w = m.reliability[j];
                    return w * (1.0 - t) + 0.5 * t;
                } else if constexpr (std::is_same_v<M, DType>) {
                    return m.task_types[i] == m.worker_types[j] ? m.p : 0.5;
                } else {
                    return m.hammers[j] ? 1.0 : 0.5;
                }
            },
            params_);
    }

    void check_index(std::size_t i, std::size_t j) const {
        if (i >= task_count() || j >= workers_) throw IndexOutOfRange("CrowdModel: index out of range");
    }

    static void require_probabilities(std::span<const double> xs, const char* what) {
        for (double x : xs) detail::require(detail::is_probability(x), std::string(what) + " outside [0,1]");
    }

    void validate() {
        const std::size_t t = answers_.size();
        std::visit(
            [&](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, DawidSkene>) {
                    require_probabilities(m.reliability, "DawidSkene reliability");
                    workers_ = m.reliability.size();
                } else if constexpr (std::is_same_v<M, DifficultyReliability> || std::is_same_v<M, Monotone>) {
                    detail::require(m.difficulty.size() == t, "difficulty vector length differs from T");
                    require_probabilities(m.difficulty, "difficulty");
                    require_probabilities(m.reliability, "reliability");
                    if constexpr (std::is_same_v<M, DifficultyReliability>) {
                        for (double x : m.difficulty) detail::require(x >= 0.5, "DifficultyReliability: t_i below 1/2");
                    }
                    workers_ = m.reliability.size();
                } else if constexpr (std::is_same_v<M, DType>) {
                    detail::require(m.d >= 1, "DType: d must be positive");
                    detail::require(m.p >= 0.5 && m.p <= 1.0, "DType: p outside [1/2,1]");
                    detail::require(m.task_types.size() == t, "DType: task_types length differs from T");
                    for (int x : m.task_types) detail::require(x >= 0 && x < m.d, "DType: task type outside [0,d)");
                    for (int x : m.worker_types) detail::require(x >= 0 && x < m.d, "DType: worker type outside [0,d)");
                    workers_ = m.worker_types.size();
                } else {
                    detail::require(detail::is_probability(m.sigma2), "SpammerHammer: sigma2 outside [0,1]");
                    workers_ = m.hammers.size();
                }
            },
            params_);
        detail::require(workers_ >= 1, "CrowdModel: need at least one worker");
    }

    ModelParams params_;
    TrueAnswers answers_;
    std::size_t workers_ = 0;
};

/// Labels drawn uniformly from [0, d).
inline std::vector<int> uniform_types(std::size_t count, int d, std::uint64_t seed) {
    detail::require(d >= 1, "uniform_types: d must be positive");
    Rng rng(seed);
    std::vector<int> out(count);
    for (auto& x : out) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    return out;
}

/// d-type model with uniform task and worker types and uniform answers.
inline CrowdModel make_uniform_dtype(std::size_t tasks, std::size_t workers, int d, double p, std::uint64_t seed) {
    DType m{d, p, uniform_types(tasks, d, derive_seed(seed, 0)), uniform_types(workers, d, derive_seed(seed, 1))};
    return CrowdModel(std::move(m), TrueAnswers::bernoulli(tasks, 0.5, derive_seed(seed, 2)));
}

/// Spammer-hammer model: each worker is a hammer with probability sigma2 and
/// each answer is +1 with probability alpha.
inline CrowdModel make_spammer_hammer(std::size_t tasks, std::size_t workers, double sigma2, double alpha,
                                      std::uint64_t seed) {
    detail::require(detail::is_probability(sigma2), "make_spammer_hammer: sigma2 outside [0,1]");
    Rng rng(derive_seed(seed, 0));
    std::vector<bool> hammers(workers);
    for (std::size_t j = 0; j < workers; ++j) hammers[j] = rng.bernoulli(sigma2);
    return CrowdModel(SpammerHammer{sigma2, std::move(hammers)},
                      TrueAnswers::bernoulli(tasks, alpha, derive_seed(seed, 1)));
}

struct Response {
    std::uint32_t task;
    std::uint32_t worker;
    int value;
};

/// Observed responses M_ij in {-1,+1}, stored sorted by (task, worker) with a
/// per-task offset index.
class ResponseMatrix {
public:
    ResponseMatrix(std::size_t tasks, std::size_t workers, std::vector<Response> entries)
        : tasks_(tasks), workers_(workers), entries_(std::move(entries)), offsets_(tasks + 1, 0) {
        std::sort(entries_.begin(), entries_.end(), [](const Response& a, const Response& b) {
            return a.task != b.task ? a.task < b.task : a.worker < b.worker;
        });
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            const auto& e = entries_[k];
            if (e.task >= tasks_ || e.worker >= workers_) throw IndexOutOfRange("ResponseMatrix: entry outside [T] x [W]");
            detail::require(e.value == 1 || e.value == -1, "ResponseMatrix: values must be +1 or -1");
            if (k > 0) {
                const auto& prev = entries_[k - 1];
                detail::require(prev.task != e.task || prev.worker != e.worker, "ResponseMatrix: duplicate entry");
            }
            ++offsets_[e.task + 1];
        }
        for (std::size_t i = 0; i < tasks_; ++i) offsets_[i + 1] += offsets_[i];
    }

    std::size_t task_count() const noexcept { return tasks_; }
    std::size_t worker_count() const noexcept { return workers_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::span<const Response> entries() const noexcept { return entries_; }

    /// Responses to task i, sorted by worker.
    std::span<const Response> task(std::size_t i) const {
        if (i >= tasks_) throw IndexOutOfRange("ResponseMatrix: task index out of range");
        return std::span<const Response>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
    }

    std::optional<int> value(std::size_t i, std::size_t j) const {
        const auto row = task(i);
        auto it = std::lower_bound(row.begin(), row.end(), j,
                                   [](const Response& r, std::size_t w) { return r.worker < w; });
        if (it == row.end() || it->worker != j) return std::nullopt;
        return it->value;
    }

    bool fully_observed() const noexcept { return entries_.size() == tasks_ * workers_; }

    friend bool operator==(const ResponseMatrix& a, const ResponseMatrix& b) {
        return a.tasks_ == b.tasks_ && a.workers_ == b.workers_ &&
               std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(), b.entries_.end(),
                          [](const Response& x, const Response& y) {
                              return x.task == y.task && x.worker == y.worker && x.value == y.value;
                          });
    }

private:
    std::size_t tasks_;
    std::size_t workers_;
    std::vector<Response> entries_;
    std::vector<std::size_t> offsets_;
};

/// Samples M_ij for every assigned pair: +a_i with probability F_ij, -a_i otherwise.
/// Pairs are visited in sorted order, one uniform draw each.
inline ResponseMatrix sample_responses(const CrowdModel& model, const Assignment& assignment, std::uint64_t seed) {
    detail::require(assignment.task_count() == model.task_count() && assignment.worker_count() == model.worker_count(),
                    "sample_responses: assignment dimensions differ from the model");
    Rng rng(seed);
    std::vector<Response> entries;
    entries.reserve(assignment.size());
    const auto& a = model.answers();
    for (const auto& p : assignment.pairs()) {
        const double f = model.skill(p.task, p.worker);
        const int correct = a[p.task];
        entries.push_back({p.task, p.worker, rng.bernoulli(f) ? correct : -correct});
    }
    return ResponseMatrix(model.task_count(), model.worker_count(), std::move(entries));
}

// JSON config format: {"variant": "...", <parameter arrays>, "answers": [...]}.

inline nlohmann::json to_json(const CrowdModel& model) {
    nlohmann::json j;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, DawidSkene>) {
                j["variant"] = "dawid_skene";
                j["reliability"] = m.reliability;
            } else if constexpr (std::is_same_v<M, DifficultyReliability>) {
                j["variant"] = "difficulty";
                j["difficulty"] = m.difficulty;
                j["reliability"] = m.reliability;
            } else if constexpr (std::is_same_v<M, Monotone>) {
                j["variant"] = "monotone";
                j["difficulty"] = m.difficulty;
                j["reliability"] = m.reliability;
            } else if constexpr (std::is_same_v<M, DType>) {
                j["variant"] = "dtype";
                j["d"] = m.d;
                j["p"] = m.p;
                j["task_types"] = m.task_types;
                j["worker_types"] = m.worker_types;
            } else {
                j["variant"] = "spammer_hammer";
                j["sigma2"] = m.sigma2;
                j["hammers"] = m.hammers;
            }
        },
        model.params());
    j["answers"] = std::vector<int>(model.answers().values().begin(), model.answers().values().end());
    return j;
}

inline CrowdModel model_from_json(const nlohmann::json& j) {
    try {
        const auto variant = j.at("variant").get<std::string>();
        TrueAnswers answers(j.at("answers").get<std::vector<int>>());
        if (variant == "dawid_skene") {
            return CrowdModel(DawidSkene{j.at("reliability").get<std::vector<double>>()}, std::move(answers));
        }
        if (variant == "difficulty") {
            return CrowdModel(DifficultyReliability{j.at("difficulty").get<std::vector<double>>(),
                                                    j.at("reliability").get<std::vector<double>>()},
                              std::move(answers));
        }
        if (variant == "monotone") {
            return CrowdModel(Monotone{j.at("difficulty").get<std::vector<double>>(),
                                       j.at("reliability").get<std::vector<double>>()},
                              std::move(answers));
        }
        if (variant == "dtype") {
            return CrowdModel(DType{j.at("d").get<int>(), j.at("p").get<double>(),
                                    j.at("task_types").get<std::vector<int>>(),
                                    j.at("worker_types").get<std::vector<int>>()},
                              std::move(answers));
        }
        if (variant == "spammer_hammer") {
            return CrowdModel(SpammerHammer{j.at("sigma2").get<double>(), j.at("hammers").get<std::vector<bool>>()},
                              std::move(answers));
        }
        throw InvalidArgument("model_from_json: unknown variant '" + variant + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("model_from_json: ") + e.what());
    }
}

}  // namespace crowdgraph
