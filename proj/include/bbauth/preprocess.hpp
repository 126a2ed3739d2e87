#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bbauth/dataset.hpp"

namespace bbauth {

/// Fixed-length multichannel series, row-major (rows = time, cols = channels).
class UniformSeries {
public:
    UniformSeries() = default;
    UniformSeries(std::size_t rows, std::size_t cols, std::vector<std::string> channels = {});

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::vector<double> column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const double> v);

    const std::vector<std::string>& channels() const { return channels_; }

    friend bool operator==(const UniformSeries&, const UniformSeries&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::string> channels_;
};

/// Piecewise-linear resampling onto target_len equally spaced instants over
/// [t_first, t_last]. Endpoints are reproduced exactly. Throws EmptySeries.
std::vector<double> resample_linear(std::span<const double> times, std::span<const double> values,
                                    std::size_t target_len);

UniformSeries resample_linear_series(std::span<const double> times, std::span<const double> values,
                                     std::size_t target_len, std::string channel = "value");

/// Per-channel (v - min) / (max - min); constant channels become 0.5.
UniformSeries minmax_normalize(const UniformSeries& series);
void minmax_normalize_inplace(std::span<double> channel);

UniformSeries pad_or_truncate(const UniformSeries& series, std::size_t length);

struct StackOptions {
    /// Append touch x/y channels after the background sensors.
    bool include_touch = false;
};

/// Resamples, normalizes and concatenates the background sensor channels of
/// a session (accelerometer, gyroscope, magnetometer, linear accelerometer,
/// gravity; x, y, z each). Throws MissingModality.
UniformSeries stack_modalities(const Session& session, TaskKind task, std::size_t per_modality_len,
                               const StackOptions& options = {});

/// Per-task fixed length: mean background-sensor event count over the
/// training split, rounded, floored at 8.
std::map<TaskKind, std::size_t> compute_target_lengths(const DatasetSplit& train);

}  // namespace bbauth
