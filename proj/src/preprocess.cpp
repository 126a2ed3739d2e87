#include "bbauth/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "bbauth/error.hpp"

namespace bbauth {

UniformSeries::UniformSeries(std::size_t rows, std::size_t cols, std::vector<std::string> channels)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0), channels_(std::move(channels)) {
    channels_.resize(cols);
}

std::vector<double> UniformSeries::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
}

void UniformSeries::set_column(std::size_t c, std::span<const double> v) {
    for (std::size_t r = 0; r < rows_ && r < v.size(); ++r) at(r, c) = v[r];
}

std::vector<double> resample_linear(std::span<const double> times, std::span<const double> values,
                                    std::size_t target_len) {
    if (values.empty() || times.size() != values.size()) {
        throw Error(ErrorCode::EmptySeries, "resampling needs at least one timestamped sample");
    }
    if (target_len == 0) throw Error(ErrorCode::InvalidArgument, "target length must be positive");

    std::vector<double> out(target_len);
    const double t0 = times.front();
    const double t1 = times.back();
    if (values.size() == 1 || t1 <= t0) {
        std::fill(out.begin(), out.end(), values.front());
        return out;
    }
    std::size_t seg = 0;
    for (std::size_t k = 0; k < target_len; ++k) {
        if (k + 1 == target_len && target_len > 1) {
            out[k] = values.back();
            break;
        }
        const double t = target_len == 1
                             ? t0
                             : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(target_len - 1);
        while (seg + 2 < times.size() && times[seg + 1] <= t) ++seg;
        const double ta = times[seg];
        const double tb = times[seg + 1];
        if (tb <= ta) {
            out[k] = values[seg + 1];
            continue;
        }
        const double w = (t - ta) / (tb - ta);
        out[k] = values[seg] + (values[seg + 1] - values[seg]) * w;
    }
    return out;
}

UniformSeries resample_linear_series(std::span<const double> times, std::span<const double> values,
                                     std::size_t target_len, std::string channel) {
    auto v = resample_linear(times, values, target_len);
    UniformSeries s(target_len, 1, {std::move(channel)});
    s.set_column(0, v);
    return s;
}

void minmax_normalize_inplace(std::span<double> channel) {
    if (channel.empty()) return;
    const auto [lo_it, hi_it] = std::minmax_element(channel.begin(), channel.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    // Ranges at rounding-noise level count as constant.
    const double scale = std::max({1.0, std::fabs(lo), std::fabs(hi)});
    if (!(hi - lo > 1e-12 * scale)) {
        std::fill(channel.begin(), channel.end(), 0.5);
        return;
    }
    const double inv = 1.0 / (hi - lo);
    for (double& v : channel) v = (v - lo) * inv;
    *lo_it = 0.0;
    *hi_it = 1.0;
}

UniformSeries minmax_normalize(const UniformSeries& series) {
    UniformSeries out = series;
    for (std::size_t c = 0; c < out.cols(); ++c) {
        auto col = out.column(c);
        minmax_normalize_inplace(col);
        out.set_column(c, col);
    }
    return out;
}

UniformSeries pad_or_truncate(const UniformSeries& series, std::size_t length) {
    UniformSeries out(length, series.cols(), series.channels());
    const std::size_t keep = std::min(length, series.rows());
    for (std::size_t r = 0; r < keep; ++r) {
        for (std::size_t c = 0; c < series.cols(); ++c) out.at(r, c) = series.at(r, c);
    }
    return out;
}

UniformSeries stack_modalities(const Session& session, TaskKind task, std::size_t per_modality_len,
                               const StackOptions& options) {
    if (session.task != task) {
        throw Error(ErrorCode::InvalidArgument, "session " + session.session_id + " is not a " +
                                                    std::string(to_string(task)) + " session");
    }
    std::vector<std::string> names;
    for (ModalityKind m : kBackgroundSensors) {
        for (const char* axis : {"x", "y", "z"}) names.push_back(std::string(to_string(m)) + "." + axis);
    }
    if (options.include_touch) {
        names.emplace_back("touch.x");
        names.emplace_back("touch.y");
    }
    UniformSeries out(per_modality_len, names.size(), names);

    std::size_t col = 0;
    std::vector<double> t;
    std::vector<double> v;
    for (ModalityKind m : kBackgroundSensors) {
        auto it = session.streams.sensors.find(m);
        if (it == session.streams.sensors.end() || it->second.empty()) {
            throw Error(ErrorCode::MissingModality, std::string(to_string(m)));
        }
        const auto& samples = it->second;
        t.resize(samples.size());
        v.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) t[i] = static_cast<double>(samples[i].timestamp);
        for (int axis = 0; axis < 3; ++axis) {
            for (std::size_t i = 0; i < samples.size(); ++i) {
                v[i] = axis == 0 ? samples[i].x : axis == 1 ? samples[i].y : samples[i].z;
            }
            auto r = resample_linear(t, v, per_modality_len);
            minmax_normalize_inplace(r);
            out.set_column(col++, r);
        }
    }
    if (options.include_touch) {
        if (!session.streams.touch || session.streams.touch->empty()) {
            throw Error(ErrorCode::MissingModality, "touch");
        }
        const auto& ev = *session.streams.touch;
        t.resize(ev.size());
        v.resize(ev.size());
        for (std::size_t i = 0; i < ev.size(); ++i) t[i] = static_cast<double>(ev[i].timestamp);
        for (int axis = 0; axis < 2; ++axis) {
            for (std::size_t i = 0; i < ev.size(); ++i) v[i] = axis == 0 ? ev[i].x : ev[i].y;
            auto r = resample_linear(t, v, per_modality_len);
            minmax_normalize_inplace(r);
            out.set_column(col++, r);
        }
    }
    return out;
}

std::map<TaskKind, std::size_t> compute_target_lengths(const DatasetSplit& train) {
    std::map<TaskKind, std::pair<double, std::size_t>> acc;
    for (const auto& s : train.sessions) {
        for (const auto& [m, samples] : s.streams.sensors) {
            auto& [sum, n] = acc[s.task];
            sum += static_cast<double>(samples.size());
            ++n;
        }
    }
    std::map<TaskKind, std::size_t> out;
    for (TaskKind task : kAllTasks) {
        std::size_t len = 8;
        if (auto it = acc.find(task); it != acc.end() && it->second.second > 0) {
            const double mean = it->second.first / static_cast<double>(it->second.second);
            len = std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(mean)));
        }
        out[task] = len;
    }
    return out;
}

}  // namespace bbauth
