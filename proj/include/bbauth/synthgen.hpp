#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bbauth/dataset.hpp"
#include "bbauth/protocol.hpp"

namespace bbauth::synth {

inline constexpr std::size_t kDigramClasses = 64;
inline constexpr std::size_t kMotionBasis = 4;
inline constexpr std::size_t kTapPattern = 4;

/// Class of the digram (a, b); latency offsets are shared within a class.
constexpr std::size_t digram_class(int a, int b) {
    return static_cast<std::size_t>((a * 31 + b) % static_cast<int>(kDigramClasses));
}

struct SwipeStyle {
    double start_along = 0.0;   // start position along the swipe axis
    double start_across = 0.0;  // start position across it
    double log_length = 0.0;
    double angle = 0.0;         // deviation from the task axis, radians
    double curvature = 0.0;
    double log_duration = 0.0;  // ms
    double easing = 0.0;        // exponent of the progress curve, log scale
    double log_gap = 0.0;       // ms between swipes
};

struct TapStyle {
    std::array<double, kTapPattern> x{};
    std::array<double, kTapPattern> y{};
    std::array<double, kTapPattern> log_hold{};
    std::array<double, kTapPattern> log_gap{};
};

/// Behavioural parameters of one simulated person. All fields are in an
/// unconstrained space so that blending two profiles stays valid.
struct UserProfile {
    std::uint64_t seed = 0;
    std::array<double, kDigramClasses> digram_offset{};  // ms
    SwipeStyle reading;
    SwipeStyle gallery;
    TapStyle tapping;
    /// Sensor x axis x basis coefficients of the slow motion trajectory.
    std::array<std::array<std::array<double, kMotionBasis>, 3>, 5> motion{};
    std::array<std::array<double, 3>, 5> posture{};

    // Dispersion (all > 0).
    double latency_sd = 28.0;         // per keystroke, ms
    double session_drift = 1.0;       // scale of session-to-session variation
    double stroke_noise = 0.5;        // scale of stroke-to-stroke variation
    double tremor = 0.12;             // sensor noise relative to motion amplitude

    /// (1 - alpha) * this + alpha * target, for every location parameter.
    UserProfile blend(const UserProfile& target, double alpha) const;
    void validate() const;
};

struct DeviceProfile {
    std::array<std::array<double, 3>, 5> bias{};
    std::array<double, 5> gain{1, 1, 1, 1, 1};
    double jitter = 0.0;  // relative sd of the sampling interval

    static DeviceProfile neutral() { return {}; }
    void validate() const;
};

struct GenConfig {
    std::size_t users = 8;         // devices in validation and evaluation
    std::size_t train_users = 0;   // 0 = same as users
    double separability = 3.0;     // between-user / within-user spread
    double alpha = 0.5;            // skilled imitation strength
    double beta = 0.2;             // device bias magnitude
    std::size_t words_per_session = 30;
    std::size_t swipes_per_session = 12;
    std::size_t tap_repeats = 10;
    double sensor_rate_hz = 20.0;
    std::uint64_t seed = 42;
    protocol::RandomPolicy random_policy = protocol::RandomPolicy::all();

    std::size_t effective_train_users() const { return train_users == 0 ? users : train_users; }
    /// Throws ConfigInvalid.
    void validate() const;
    std::map<std::string, std::string> describe() const;
};

struct Population {
    std::array<double, kDigramClasses> digram_base{};
};

Population make_population(std::uint64_t seed);
UserProfile make_user(const Population& population, double separability, std::uint64_t seed);
DeviceProfile make_device(double beta, std::uint64_t seed);

/// Renders one session. Deterministic in (user, device, task, session_seed).
Session generate_session(const UserProfile& user, const DeviceProfile& device, TaskKind task,
                         std::uint64_t session_seed, const GenConfig& config);

struct TaskProtocol {
    protocol::ComparisonList comparisons;
    protocol::KeyFile key;
};

struct GeneratedData {
    DatasetSplit train;
    DatasetSplit validation;
    DatasetSplit evaluation;
    std::map<TaskKind, TaskProtocol> validation_protocol;
    std::map<TaskKind, TaskProtocol> evaluation_protocol;
};

/// Throws ConfigInvalid. `threads` only affects speed, never output.
GeneratedData generate_dataset(const GenConfig& config, std::size_t threads = 1);

/// Writes the three split documents, comparison lists, key files and a
/// manifest into `dir`. Refuses to overwrite existing files unless `force`.
/// Returns the written file names. Throws Io.
std::vector<std::string> write_dataset(const GeneratedData& data, const GenConfig& config, const std::string& dir,
                                       bool force);

std::string manifest_json(const GeneratedData& data, const GenConfig& config);

}  // namespace bbauth::synth
