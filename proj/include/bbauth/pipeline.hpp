#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bbauth/dataset.hpp"
#include "bbauth/protocol.hpp"

namespace bbauth::pipeline {

enum class MatcherKind { KeystrokeNgram, SwipeTemplate, DwtDistance, SoftDtw, Siamese };

inline constexpr MatcherKind kAllMatchers[] = {MatcherKind::KeystrokeNgram, MatcherKind::SwipeTemplate,
                                               MatcherKind::DwtDistance, MatcherKind::SoftDtw,
                                               MatcherKind::Siamese};

std::string_view to_string(MatcherKind kind);
std::optional<MatcherKind> parse_matcher(std::string_view name);

/// keystroke-ngram: Keystroke only. swipe-template: reading and gallery.
/// The others run on every task.
bool matcher_supports(MatcherKind kind, TaskKind task);

struct MatcherParams {
    // keystroke-ngram
    std::size_t ngram_top_k = 0;
    double ngram_min_occurrences = 3.0;
    // dwt-distance
    std::size_t dwt_width = 16;
    std::string dwt_filter = "coif1";
    // softdtw
    double softdtw_gamma = 0.1;
    // siamese
    std::size_t siamese_epochs = 50;
    double siamese_learning_rate = 0.001;
    std::size_t siamese_batch_size = 32;
    double siamese_margin = 1.0;
    std::size_t siamese_max_length = 48;
    std::vector<std::size_t> siamese_layers = {400, 200, 100, 50};
    double siamese_pair_ratio = 1.0;
    /// Per-task resampling length for the fused sensor input; tasks absent
    /// here use the training-set mean capped at siamese_max_length.
    std::map<TaskKind, std::size_t> target_lengths;
};

class Matcher {
public:
    virtual ~Matcher() = default;
    virtual MatcherKind kind() const = 0;
    virtual TaskKind task() const = 0;
    /// Learns templates, scalers or network weights from the training split.
    virtual void fit(const DatasetSplit& train) = 0;
    /// Raw similarity, higher means more likely genuine. Thread-safe after fit.
    virtual double score(std::span<const Session* const> enroll, const Session& verify) const = 0;
    /// True when raw scores are mapped to [0,1] over the whole comparison list.
    virtual bool postprocess_minmax() const { return false; }
};

/// Throws MatcherTaskMismatch.
std::unique_ptr<Matcher> make_matcher(MatcherKind kind, TaskKind task, const MatcherParams& params,
                                      std::uint64_t seed);

struct ScoreRun {
    std::vector<std::pair<std::string, double>> scores;  // comparison list order
    double fit_seconds = 0.0;
    double score_seconds = 0.0;
};

/// Fits on `train` and scores every comparison of `list` against sessions of
/// `split`. Output order follows the list regardless of `threads`.
/// Throws SchemaViolation when a referenced session is absent.
ScoreRun run_matcher(Matcher& matcher, const DatasetSplit& train, const DatasetSplit& split,
                     const protocol::ComparisonList& list, std::size_t threads = 1);

/// Scores an already fitted matcher.
std::vector<std::pair<std::string, double>> score_list(const Matcher& matcher, const DatasetSplit& split,
                                                       const protocol::ComparisonList& list,
                                                       std::size_t threads = 1);

}  // namespace bbauth::pipeline
