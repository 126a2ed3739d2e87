#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bbauth/dataset.hpp"

namespace bbauth::touch {

enum class Feature : std::size_t {
    StartX, StartY, EndX, EndY,
    MaxDevX, MaxDevY,
    DevP20, DevP50, DevP80,
    VelP20, VelP50, VelP80,
    AccP20, AccP50, AccP80,
    MedianVelLast3,
    MeanAccFirst5,
    DispSum,
    EuclidStartEnd,
    StraightnessRatio,
    DurationMs,
    MeanVelocity,
    Count_,
};

inline constexpr std::size_t kFeatureCount = static_cast<std::size_t>(Feature::Count_);

std::string_view feature_name(Feature f);

struct SwipeFeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
};

/// Linear interpolation between order statistics (inclusive convention);
/// `p` is a fraction in [0,1].
/// Returns 0 for an empty sample.
double percentile(std::vector<double> sample, double p);

/// Mean (x, y) over every point of every stroke.
std::pair<double, double> mean_point(std::span<const Stroke> strokes);

/// Throws DegenerateStroke when the stroke spans fewer than two distinct timestamps.
SwipeFeatureVector swipe_features(const Stroke& stroke, std::pair<double, double> session_mean_xy);

/// Feature vectors of every usable stroke in the session; degenerate strokes are skipped.
std::vector<SwipeFeatureVector> session_swipe_features(const Session& session);

struct SessionTemplate {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> stddev{};  // population
    std::size_t count = 0;
};

/// Throws NoStrokes.
SessionTemplate build_template(std::span<const SwipeFeatureVector> strokes);

/// Scores verification strokes against an enrollment template; higher means
/// more likely genuine. Implementations must be pure.
class StrokeScorer {
public:
    virtual ~StrokeScorer() = default;
    virtual double score(const SessionTemplate& tmpl, std::span<const SwipeFeatureVector> verify) const = 0;
};

/// exp(-mean_k |mean_verify_k - mean_k| / max(std_k, eps)).
class ZDistanceScorer final : public StrokeScorer {
public:
    explicit ZDistanceScorer(double std_floor = 1e-6) : std_floor_(std_floor) {}
    double score(const SessionTemplate& tmpl, std::span<const SwipeFeatureVector> verify) const override;

private:
    double std_floor_;
};

double template_score(const SessionTemplate& tmpl, std::span<const SwipeFeatureVector> verify);

/// Per-event or per-gesture feature vectors consumed by the soft-DTW matcher.
///   keystroke: [dt1, dt2, dt3, ascii/255] for each event with a third difference
///   reading, gallery: [displacement, mean velocity, down->up, up->next down]
///   tapping: [down->up, up->next down, x, y]
/// Throws InsufficientEvents for keystroke sessions with fewer than 4 presses.
std::vector<std::vector<double>> build_dtw_sequence(const Session& session, TaskKind task);

inline constexpr std::size_t kDtwFeatureDim = 4;

}  // namespace bbauth::touch
