#include "bbauth/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "bbauth/dwt.hpp"
#include "bbauth/error.hpp"
#include "bbauth/keystroke.hpp"
#include "bbauth/parallel.hpp"
#include "bbauth/preprocess.hpp"
#include "bbauth/siamese.hpp"
#include "bbauth/softdtw.hpp"
#include "bbauth/touch.hpp"

namespace bbauth::pipeline {

std::string_view to_string(MatcherKind kind) {
    switch (kind) {
        case MatcherKind::KeystrokeNgram: return "keystroke-ngram";
        case MatcherKind::SwipeTemplate: return "swipe-template";
        case MatcherKind::DwtDistance: return "dwt-distance";
        case MatcherKind::SoftDtw: return "softdtw";
        case MatcherKind::Siamese: return "siamese";
    }
    return "?";
}

std::optional<MatcherKind> parse_matcher(std::string_view name) {
    for (MatcherKind k : kAllMatchers) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

bool matcher_supports(MatcherKind kind, TaskKind task) {
    switch (kind) {
        case MatcherKind::KeystrokeNgram: return task == TaskKind::Keystroke;
        case MatcherKind::SwipeTemplate: return task == TaskKind::TextReading || task == TaskKind::GallerySwiping;
        default: return true;
    }
}

namespace {

class KeystrokeMatcher final : public Matcher {
public:
    explicit KeystrokeMatcher(const MatcherParams& p) : options_{p.ngram_top_k, p.ngram_min_occurrences} {}
    MatcherKind kind() const override { return MatcherKind::KeystrokeNgram; }
    TaskKind task() const override { return TaskKind::Keystroke; }
    void fit(const DatasetSplit&) override {}
    double score(std::span<const Session* const> enroll, const Session& verify) const override {
        return keystroke::keystroke_score(enroll, verify, options_);
    }

private:
    keystroke::ScoreOptions options_;
};

class SwipeMatcher final : public Matcher {
public:
    explicit SwipeMatcher(TaskKind task) : task_(task) {}
    MatcherKind kind() const override { return MatcherKind::SwipeTemplate; }
    TaskKind task() const override { return task_; }
    void fit(const DatasetSplit&) override {}
    double score(std::span<const Session* const> enroll, const Session& verify) const override {
        std::vector<touch::SwipeFeatureVector> strokes;
        for (const Session* s : enroll) {
            auto f = touch::session_swipe_features(*s);
            strokes.insert(strokes.end(), f.begin(), f.end());
        }
        const auto tmpl = touch::build_template(strokes);
        return touch::template_score(tmpl, touch::session_swipe_features(verify));
    }

private:
    TaskKind task_;
};

class DwtMatcher final : public Matcher {
public:
    DwtMatcher(TaskKind task, const MatcherParams& p) : task_(task), width_(p.dwt_width), filter_(p.dwt_filter) {
        dwt::filter_by_name(filter_);
    }
    MatcherKind kind() const override { return MatcherKind::DwtDistance; }
    TaskKind task() const override { return task_; }
    void fit(const DatasetSplit& train) override {
        config_ = dwt::ImageConfig::from_training(train, width_);
        config_.filter = filter_;
    }
    double score(std::span<const Session* const> enroll, const Session& verify) const override {
        std::vector<dwt::ModalityImage> images;
        for (const Session* s : enroll) images.push_back(dwt::task_image(*s, config_));
        return dwt::dwt_score(images, dwt::task_image(verify, config_));
    }

private:
    TaskKind task_;
    std::size_t width_;
    std::string filter_;
    dwt::ImageConfig config_;
};

class SoftDtwMatcher final : public Matcher {
public:
    SoftDtwMatcher(TaskKind task, const MatcherParams& p) : task_(task), gamma_(p.softdtw_gamma) {
        if (!(gamma_ > 0)) throw Error(ErrorCode::ConfigInvalid, "softdtw.gamma must be > 0");
    }
    MatcherKind kind() const override { return MatcherKind::SoftDtw; }
    TaskKind task() const override { return task_; }
    void fit(const DatasetSplit& train) override { model_ = softdtw::calibrate(train, task_, gamma_); }
    double score(std::span<const Session* const> enroll, const Session& verify) const override {
        return softdtw::softdtw_score(enroll, verify, model_);
    }

private:
    TaskKind task_;
    double gamma_;
    softdtw::SoftDtwModel model_;
};

class SiameseMatcher final : public Matcher {
public:
    SiameseMatcher(TaskKind task, const MatcherParams& p, std::uint64_t seed) : task_(task), params_(p) {
        config_.learning_rate = p.siamese_learning_rate;
        config_.epochs = p.siamese_epochs;
        config_.batch_size = p.siamese_batch_size;
        config_.margin = p.siamese_margin;
        config_.seed = seed;
        config_.validate();
        if (p.siamese_max_length < 2) throw Error(ErrorCode::ConfigInvalid, "siamese.max_length must be >= 2");
        if (!(p.siamese_pair_ratio > 0)) throw Error(ErrorCode::ConfigInvalid, "siamese.pair_ratio must be > 0");
    }
    MatcherKind kind() const override { return MatcherKind::Siamese; }
    TaskKind task() const override { return task_; }
    bool postprocess_minmax() const override { return true; }

    void fit(const DatasetSplit& train) override {
        if (auto it = params_.target_lengths.find(task_); it != params_.target_lengths.end()) {
            length_ = it->second;
        } else {
            length_ = std::min(compute_target_lengths(train).at(task_), params_.siamese_max_length);
        }
        std::map<std::string, std::vector<std::vector<double>>> by_subject;
        for (const auto& s : train.sessions) {
            if (s.task != task_ || !s.subject_id) continue;
            by_subject[*s.subject_id].push_back(input(s));
        }
        std::vector<std::vector<std::vector<double>>> samples;
        for (auto& [_, v] : by_subject) samples.push_back(std::move(v));
        const auto pairs = siamese::make_pairs(samples, config_.seed, params_.siamese_pair_ratio);
        net_ = siamese::train(pairs, config_, params_.siamese_layers).params;
    }

    double score(std::span<const Session* const> enroll, const Session& verify) const override {
        std::vector<std::vector<double>> e;
        for (const Session* s : enroll) e.push_back(input(*s));
        return siamese::siamese_score(net_, e, input(verify));
    }

private:
    std::vector<double> input(const Session& s) const {
        const UniformSeries series = stack_modalities(s, task_, length_);
        const auto v = series.values();
        return {v.begin(), v.end()};
    }

    TaskKind task_;
    MatcherParams params_;
    siamese::TrainConfig config_;
    std::size_t length_ = 0;
    siamese::NetworkParams net_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::unique_ptr<Matcher> make_matcher(MatcherKind kind, TaskKind task, const MatcherParams& params,
                                      std::uint64_t seed) {
    if (!matcher_supports(kind, task)) {
        throw Error(ErrorCode::MatcherTaskMismatch, "matcher " + std::string(to_string(kind)) +
                                                        " does not support task " + std::string(to_string(task)));
    }
    switch (kind) {
        case MatcherKind::KeystrokeNgram: return std::make_unique<KeystrokeMatcher>(params);
        case MatcherKind::SwipeTemplate: return std::make_unique<SwipeMatcher>(task);
        case MatcherKind::DwtDistance: return std::make_unique<DwtMatcher>(task, params);
        case MatcherKind::SoftDtw: return std::make_unique<SoftDtwMatcher>(task, params);
        case MatcherKind::Siamese: return std::make_unique<SiameseMatcher>(task, params, seed);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown matcher");
}

std::vector<std::pair<std::string, double>> score_list(const Matcher& matcher, const DatasetSplit& split,
                                                       const protocol::ComparisonList& list, std::size_t threads) {
    if (list.task != matcher.task()) {
        throw Error(ErrorCode::MatcherTaskMismatch, "comparison list is for task " + std::string(to_string(list.task)) +
                                                        " but the matcher was built for " +
                                                        std::string(to_string(matcher.task())));
    }
    auto lookup = [&](const std::string& id, const std::string& cmp) -> const Session& {
        const Session* s = split.find(id);
        if (!s) throw Error(ErrorCode::SchemaViolation, "comparison " + cmp + ": session " + id + " not in dataset");
        if (s->task != list.task) {
            throw Error(ErrorCode::SchemaViolation, "comparison " + cmp + ": session " + id + " has task " +
                                                        std::string(to_string(s->task)));
        }
        return *s;
    };
    std::vector<double> raw(list.comparisons.size());
    parallel_for(list.comparisons.size(), threads, [&](std::size_t i) {
        const auto& c = list.comparisons[i];
        const Session* enroll[2] = {&lookup(c.enroll[0], c.id), &lookup(c.enroll[1], c.id)};
        try {
            raw[i] = matcher.score(enroll, lookup(c.verify, c.id));
        } catch (const Error& e) {
            throw Error(e.code(), "comparison " + c.id + ": " + e.what());
        }
    });
    if (matcher.postprocess_minmax() && !raw.empty()) raw = siamese::minmax_postprocess(raw);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out.emplace_back(list.comparisons[i].id, std::clamp(raw[i], 0.0, 1.0));
    return out;
}

ScoreRun run_matcher(Matcher& matcher, const DatasetSplit& train, const DatasetSplit& split,
                     const protocol::ComparisonList& list, std::size_t threads) {
    ScoreRun run;
    auto t0 = std::chrono::steady_clock::now();
    matcher.fit(train);
    run.fit_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    run.scores = score_list(matcher, split, list, threads);
    run.score_seconds = seconds_since(t0);
    return run;
}

}  // namespace bbauth::pipeline
