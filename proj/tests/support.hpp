#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bbauth/dataset.hpp"
#include "bbauth/rng.hpp"

namespace testing {

using namespace bbauth;

inline std::vector<SensorSample> sensor_ramp(std::size_t n, double phase, std::int64_t step = 50) {
    std::vector<SensorSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        out.push_back({static_cast<std::int64_t>(i) * step, std::sin(0.3 * t + phase), std::cos(0.2 * t + phase),
                       0.01 * t + phase});
    }
    return out;
}

inline void add_sensors(Session& s, std::size_t n, double phase = 0.0) {
    double p = phase;
    for (ModalityKind m : kBackgroundSensors) {
        s.streams.sensors[m] = sensor_ramp(n, p);
        p += 0.7;
    }
}

/// Key presses of `text` with the given inter-key latencies (cycled).
inline std::vector<KeystrokeEvent> typed(const std::string& text, const std::vector<std::int64_t>& latencies,
                                         std::int64_t start = 0) {
    std::vector<KeystrokeEvent> out;
    std::int64_t t = start;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i > 0) t += latencies[(i - 1) % latencies.size()];
        out.push_back({t, static_cast<unsigned char>(text[i])});
    }
    return out;
}

inline Session keystroke_session(std::string id, const std::string& text, const std::vector<std::int64_t>& latencies,
                                 std::int64_t start = 0) {
    Session s;
    s.session_id = std::move(id);
    s.device_id = "dev";
    s.task = TaskKind::Keystroke;
    s.role = SessionRole::Unlabeled;
    s.streams.keystroke = typed(text, latencies, start);
    return s;
}

/// Brute-force Mann-Whitney: 2 per win, 1 per tie, over 2 |G| |I|.
inline std::pair<std::uint64_t, std::uint64_t> brute_auc(const std::vector<double>& g, const std::vector<double>& i) {
    std::uint64_t num = 0;
    for (double a : g) {
        for (double b : i) num += a > b ? 2 : (a == b ? 1 : 0);
    }
    return {num, 2 * g.size() * i.size()};
}

}  // namespace testing
