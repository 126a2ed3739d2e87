#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bbauth/dataset.hpp"

namespace bbauth::softdtw {

using Sequence = std::vector<std::vector<double>>;

/// -gamma * log(sum exp(-v / gamma)), shifted by the minimum for stability.
double softmin(double a, double b, double c, double gamma);

/// Accumulated soft alignment cost with squared Euclidean local cost.
/// Throws EmptySequence, DimensionMismatch, InvalidArgument (gamma <= 0).
double soft_dtw(const Sequence& x, const Sequence& y, double gamma);

/// Hard-min recursion over the same local cost.
double dtw(const Sequence& x, const Sequence& y);

/// Affine per-feature scaling to [0, 1] learned from training sequences.
struct FeatureScaler {
    std::vector<double> lo;
    std::vector<double> hi;

    static FeatureScaler fit(std::span<const Sequence> sequences);
    Sequence apply(const Sequence& s) const;
};

struct SoftDtwModel {
    TaskKind task = TaskKind::Keystroke;
    double gamma = 0.1;
    double tau = 1.0;  // median genuine distance on the training split
    FeatureScaler scaler;
};

/// Fits the scaler and calibrates tau: every training subject's first two
/// sessions enroll, the remaining sessions verify.
SoftDtwModel calibrate(const DatasetSplit& train, TaskKind task, double gamma = 0.1);

/// Minimum soft-DTW distance from the verification sequence to any enrollment sequence, floored at 0.
double min_distance(std::span<const Sequence> enroll, const Sequence& verify, double gamma);

/// exp(-d / tau) with d = min_distance(...).
double softdtw_score(std::span<const Session* const> enroll, const Session& verify, const SoftDtwModel& model);

double score_from_distance(double d, double tau);

}  // namespace bbauth::softdtw
