#include "bbauth/touch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bbauth/error.hpp"

namespace bbauth::touch {

std::string_view feature_name(Feature f) {
    static constexpr std::string_view kNames[kFeatureCount] = {
        "start_x", "start_y", "end_x", "end_y", "max_dev_x", "max_dev_y",
        "dev_p20", "dev_p50", "dev_p80", "vel_p20", "vel_p50", "vel_p80",
        "acc_p20", "acc_p50", "acc_p80", "median_vel_last3", "mean_acc_first5",
        "disp_sum", "euclid_start_end", "straightness_ratio", "duration_ms", "mean_velocity",
    };
    return kNames[static_cast<std::size_t>(f)];
}

double percentile(std::vector<double> sample, double p) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sample[lo] + (sample[hi] - sample[lo]) * frac;
}

std::pair<double, double> mean_point(std::span<const Stroke> strokes) {
    double sx = 0.0;
    double sy = 0.0;
    std::size_t n = 0;
    for (const auto& s : strokes) {
        for (const auto& e : s.events) {
            sx += e.x;
            sy += e.y;
            ++n;
        }
    }
    if (n == 0) return {0.0, 0.0};
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

SwipeFeatureVector swipe_features(const Stroke& stroke, std::pair<double, double> session_mean_xy) {
    const auto& ev = stroke.events;
    if (ev.size() < 2 || ev.back().timestamp <= ev.front().timestamp) {
        throw Error(ErrorCode::DegenerateStroke, "stroke needs two distinct timestamps");
    }
    const auto [mx, my] = session_mean_xy;
    SwipeFeatureVector f;
    f[Feature::StartX] = ev.front().x;
    f[Feature::StartY] = ev.front().y;
    f[Feature::EndX] = ev.back().x;
    f[Feature::EndY] = ev.back().y;

    std::vector<double> dev;
    dev.reserve(ev.size());
    double max_dx = 0.0;
    double max_dy = 0.0;
    for (const auto& e : ev) {
        const double dx = e.x - mx;
        const double dy = e.y - my;
        max_dx = std::max(max_dx, std::fabs(dx));
        max_dy = std::max(max_dy, std::fabs(dy));
        dev.push_back(std::hypot(dx, dy));
    }
    f[Feature::MaxDevX] = max_dx;
    f[Feature::MaxDevY] = max_dy;
    f[Feature::DevP20] = percentile(dev, 0.2);
    f[Feature::DevP50] = percentile(dev, 0.5);
    f[Feature::DevP80] = percentile(dev, 0.8);

    // Velocities carry the midpoint time of their interval so accelerations
    // divide by the spacing between velocity samples.
    std::vector<double> vel;
    std::vector<double> vel_time;
    double disp_sum = 0.0;
    for (std::size_t i = 1; i < ev.size(); ++i) {
        const double d = std::hypot(ev[i].x - ev[i - 1].x, ev[i].y - ev[i - 1].y);
        disp_sum += d;
        const auto dt = static_cast<double>(ev[i].timestamp - ev[i - 1].timestamp);
        if (dt <= 0.0) continue;
        vel.push_back(d / dt);
        vel_time.push_back(0.5 * static_cast<double>(ev[i].timestamp + ev[i - 1].timestamp));
    }
    std::vector<double> acc;
    for (std::size_t k = 1; k < vel.size(); ++k) {
        const double dt = vel_time[k] - vel_time[k - 1];
        acc.push_back(std::fabs(vel[k] - vel[k - 1]) / dt);
    }
    f[Feature::VelP20] = percentile(vel, 0.2);
    f[Feature::VelP50] = percentile(vel, 0.5);
    f[Feature::VelP80] = percentile(vel, 0.8);
    f[Feature::AccP20] = percentile(acc, 0.2);
    f[Feature::AccP50] = percentile(acc, 0.5);
    f[Feature::AccP80] = percentile(acc, 0.8);

    const std::size_t last = std::min<std::size_t>(3, vel.size());
    f[Feature::MedianVelLast3] = percentile(std::vector<double>(vel.end() - static_cast<std::ptrdiff_t>(last), vel.end()), 0.5);
    const std::size_t first = std::min<std::size_t>(5, acc.size());
    f[Feature::MeanAccFirst5] =
        first == 0 ? 0.0 : std::accumulate(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(first), 0.0) /
                               static_cast<double>(first);

    const double euclid = std::hypot(ev.back().x - ev.front().x, ev.back().y - ev.front().y);
    const auto duration = static_cast<double>(ev.back().timestamp - ev.front().timestamp);
    f[Feature::DispSum] = disp_sum;
    f[Feature::EuclidStartEnd] = euclid;
    f[Feature::StraightnessRatio] = disp_sum > 0.0 ? std::min(1.0, euclid / disp_sum) : 0.0;
    f[Feature::DurationMs] = duration;
    f[Feature::MeanVelocity] = disp_sum / duration;
    return f;
}

std::vector<SwipeFeatureVector> session_swipe_features(const Session& session) {
    std::vector<SwipeFeatureVector> out;
    if (!session.streams.touch) return out;
    const auto sliced = slice_strokes(*session.streams.touch);
    const auto mean_xy = mean_point(sliced.strokes);
    for (const auto& s : sliced.strokes) {
        if (s.events.back().timestamp <= s.events.front().timestamp) continue;
        out.push_back(swipe_features(s, mean_xy));
    }
    return out;
}

SessionTemplate build_template(std::span<const SwipeFeatureVector> strokes) {
    if (strokes.empty()) throw Error(ErrorCode::NoStrokes, "template needs at least one stroke");
    SessionTemplate t;
    t.count = strokes.size();
    const auto n = static_cast<double>(strokes.size());
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        double sum = 0.0;
        for (const auto& s : strokes) sum += s.values[k];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& s : strokes) ss += (s.values[k] - mean) * (s.values[k] - mean);
        t.mean[k] = mean;
        t.stddev[k] = std::sqrt(ss / n);
    }
    return t;
}

double ZDistanceScorer::score(const SessionTemplate& tmpl, std::span<const SwipeFeatureVector> verify) const {
    if (verify.empty()) throw Error(ErrorCode::NoStrokes, "no verification strokes");
    const auto n = static_cast<double>(verify.size());
    double total = 0.0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        double sum = 0.0;
        for (const auto& s : verify) sum += s.values[k];
        const double vm = sum / n;
        total += std::fabs(vm - tmpl.mean[k]) / std::max(tmpl.stddev[k], std_floor_);
    }
    return std::exp(-total / static_cast<double>(kFeatureCount));
}

double template_score(const SessionTemplate& tmpl, std::span<const SwipeFeatureVector> verify) {
    return ZDistanceScorer{}.score(tmpl, verify);
}

std::vector<std::vector<double>> build_dtw_sequence(const Session& session, TaskKind task) {
    if (session.task != task) {
        throw Error(ErrorCode::InvalidArgument, "session " + session.session_id + " is not a " +
                                                    std::string(to_string(task)) + " session");
    }
    std::vector<std::vector<double>> seq;
    if (task == TaskKind::Keystroke) {
        const auto* ev = session.streams.keystroke ? &*session.streams.keystroke : nullptr;
        if (ev == nullptr || ev->size() < 4) {
            throw Error(ErrorCode::InsufficientEvents,
                        "third-order differences need at least 4 key presses in " + session.session_id);
        }
        std::vector<double> d1(ev->size(), 0.0);
        std::vector<double> d2(ev->size(), 0.0);
        for (std::size_t i = 1; i < ev->size(); ++i) d1[i] = static_cast<double>((*ev)[i].timestamp - (*ev)[i - 1].timestamp);
        for (std::size_t i = 2; i < ev->size(); ++i) d2[i] = d1[i] - d1[i - 1];
        for (std::size_t i = 3; i < ev->size(); ++i) {
            const double d3 = d2[i] - d2[i - 1];
            seq.push_back({d1[i], d2[i], d3, static_cast<double>((*ev)[i].ascii_code) / 255.0});
        }
        return seq;
    }

    if (!session.streams.touch) return seq;
    const auto strokes = slice_strokes(*session.streams.touch).strokes;
    for (std::size_t i = 0; i < strokes.size(); ++i) {
        const auto& ev = strokes[i].events;
        const auto hold = static_cast<double>(ev.back().timestamp - ev.front().timestamp);
        const double gap = i + 1 < strokes.size()
                               ? static_cast<double>(strokes[i + 1].events.front().timestamp - ev.back().timestamp)
                               : 0.0;
        if (task == TaskKind::Tapping) {
            seq.push_back({hold, gap, ev.front().x, ev.front().y});
        } else {
            double disp = 0.0;
            for (std::size_t k = 1; k < ev.size(); ++k) disp += std::hypot(ev[k].x - ev[k - 1].x, ev[k].y - ev[k - 1].y);
            seq.push_back({disp, hold > 0.0 ? disp / hold : 0.0, hold, gap});
        }
    }
    return seq;
}

}  // namespace bbauth::touch
