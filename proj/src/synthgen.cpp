#include "bbauth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "bbauth/error.hpp"
#include "bbauth/parallel.hpp"
#include "bbauth/rng.hpp"

namespace bbauth::synth {

namespace {

constexpr const char* kWords[] = {
    "the",   "and",   "that",  "have",  "for",   "not",   "with",  "you",   "this",  "but",   "his",
    "from",  "they",  "say",   "her",   "she",   "will",  "one",   "all",   "would", "there", "their",
    "what",  "out",   "about", "who",   "get",   "which", "when",  "make",  "can",   "like",  "time",
    "just",  "him",   "know",  "take",  "people", "into", "year",  "your",  "good",  "some",  "could",
    "them",  "see",   "other", "than",  "then",  "now",   "look",  "only",  "come",  "its",   "over",
    "think", "also",  "back",  "after", "use",   "two",   "how",   "our",   "work",  "first", "well",
};

// Within-user spread of each parameter; between-user spread is
// separability times these.
constexpr double kDigramSd = 14.0;
constexpr double kMotionSd = 0.25;
constexpr double kPostureSd = 0.3;
constexpr double kTapPosSd = 0.03;
constexpr double kTapLogHoldSd = 0.1;
constexpr double kTapLogGapSd = 0.12;
const SwipeStyle kSwipeSd{0.04, 0.05, 0.08, 0.06, 0.05, 0.1, 0.1, 0.12};

const SwipeStyle kReadingMean{0.72, 0.5, -1.05, 0.0, 0.0, 5.4, 0.0, 6.8};
const SwipeStyle kGalleryMean{0.78, 0.5, -0.8, 0.0, 0.0, 5.2, 0.0, 6.6};
constexpr double kTapX[kTapPattern] = {0.3, 0.7, 0.3, 0.7};
constexpr double kTapY[kTapPattern] = {0.4, 0.4, 0.7, 0.7};
constexpr double kTapLogHold = 4.5;  // ~90 ms
constexpr double kTapLogGap = 5.85;  // ~350 ms

// Per sensor: resting level per axis and motion amplitude.
constexpr double kSensorLevel[5][3] = {
    {0.0, 4.0, 9.0}, {0.0, 0.0, 0.0}, {20.0, -10.0, 40.0}, {0.0, 0.0, 0.0}, {0.0, 4.0, 9.0}};
constexpr double kSensorAmp[5] = {0.6, 0.2, 3.0, 0.3, 0.5};
constexpr double kBiasScale[5] = {0.5, 0.05, 5.0, 0.1, 0.5};

constexpr double kTouchIntervalMs = 16.0;

std::string hex_id(char prefix, std::uint64_t v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*llx", prefix, digits,
                  static_cast<unsigned long long>(v & ((digits >= 16) ? ~0ULL : ((1ULL << (4 * digits)) - 1))));
    return buf;
}

double lerp(double a, double b, double t) { return (1.0 - t) * a + t * b; }

template <std::size_t N>
std::array<double, N> lerp(const std::array<double, N>& a, const std::array<double, N>& b, double t) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = lerp(a[i], b[i], t);
    return out;
}

SwipeStyle lerp(const SwipeStyle& a, const SwipeStyle& b, double t) {
    return {lerp(a.start_along, b.start_along, t), lerp(a.start_across, b.start_across, t),
            lerp(a.log_length, b.log_length, t),   lerp(a.angle, b.angle, t),
            lerp(a.curvature, b.curvature, t),     lerp(a.log_duration, b.log_duration, t),
            lerp(a.easing, b.easing, t),           lerp(a.log_gap, b.log_gap, t)};
}

SwipeStyle perturb(const SwipeStyle& mean, double scale, Rng& rng) {
    return {mean.start_along + scale * kSwipeSd.start_along * rng.normal(),
            mean.start_across + scale * kSwipeSd.start_across * rng.normal(),
            mean.log_length + scale * kSwipeSd.log_length * rng.normal(),
            mean.angle + scale * kSwipeSd.angle * rng.normal(),
            mean.curvature + scale * kSwipeSd.curvature * rng.normal(),
            mean.log_duration + scale * kSwipeSd.log_duration * rng.normal(),
            mean.easing + scale * kSwipeSd.easing * rng.normal(),
            mean.log_gap + scale * kSwipeSd.log_gap * rng.normal()};
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::int64_t ms(double v) { return static_cast<std::int64_t>(std::llround(v)); }

void render_keystrokes(const UserProfile& user, const GenConfig& config, Rng& rng, Streams& streams,
                       std::int64_t& end_time) {
    std::array<double, kDigramClasses> drift{};
    for (auto& d : drift) d = user.session_drift * kDigramSd * rng.normal();

    std::string text;
    for (std::size_t w = 0; w < config.words_per_session; ++w) {
        if (w > 0) text += ' ';
        text += kWords[rng.below(std::size(kWords))];
    }
    // Population base latencies live in the user's offsets via make_user.
    std::vector<KeystrokeEvent> keys;
    double t = 400.0 + rng.uniform(0.0, 200.0);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int code = static_cast<unsigned char>(text[i]);
        if (i > 0) {
            const std::size_t c = digram_class(static_cast<unsigned char>(text[i - 1]), code);
            t += std::max(25.0, user.digram_offset[c] + drift[c] + user.latency_sd * rng.normal());
        }
        keys.push_back({ms(t), code});
    }

    std::vector<TouchEvent> touch;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const int code = keys[i].ascii_code;
        const double x = 0.05 + 0.1 * static_cast<double>((code * 37) % 10);
        const double y = 0.75 + 0.07 * static_cast<double>(code % 3);
        const std::int64_t next = i + 1 < keys.size() ? keys[i + 1].timestamp : keys[i].timestamp + 200;
        const std::int64_t hold = std::max<std::int64_t>(0, std::min<std::int64_t>(80, (next - keys[i].timestamp) / 2));
        touch.push_back({keys[i].timestamp, x, y, 0});
        touch.push_back({keys[i].timestamp + hold, x, y, 1});
    }
    end_time = touch.back().timestamp;
    streams.keystroke = std::move(keys);
    streams.touch = std::move(touch);
}

void render_swipes(const SwipeStyle& style, bool vertical, const UserProfile& user, const DeviceProfile& device,
                   const GenConfig& config, Rng& rng, Rng& jitter_rng, Streams& streams, std::int64_t& end_time) {
    const SwipeStyle session = perturb(style, user.session_drift, rng);
    std::vector<TouchEvent> touch;
    double t = 300.0 + rng.uniform(0.0, 200.0);
    for (std::size_t s = 0; s < config.swipes_per_session; ++s) {
        const SwipeStyle p = perturb(session, user.stroke_noise, rng);
        const double length = std::exp(p.log_length);
        const double duration = std::max(40.0, std::exp(p.log_duration));
        const double easing = std::exp(p.easing);
        const auto n = static_cast<std::size_t>(std::max(3.0, std::round(duration / kTouchIntervalMs))) + 1;
        double tj = t;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = static_cast<double>(j) / static_cast<double>(n - 1);
            const double prog = std::pow(u, easing);
            const double along = p.start_along - length * prog * std::cos(p.angle);
            const double across = p.start_across + length * prog * std::sin(p.angle) +
                                  4.0 * p.curvature * length * prog * (1.0 - prog) + 0.002 * rng.normal();
            const double x = vertical ? across : along;
            const double y = vertical ? along : across;
            const int action = j == 0 ? 0 : (j + 1 == n ? 1 : 2);
            touch.push_back({ms(tj), clamp01(x), clamp01(y), action});
            if (j + 1 < n) {
                const double step = duration / static_cast<double>(n - 1);
                tj += std::max(1.0, step * (1.0 + device.jitter * jitter_rng.normal()));
            }
        }
        t = tj + std::exp(p.log_gap);
    }
    end_time = touch.back().timestamp;
    streams.touch = std::move(touch);
}

void render_taps(const TapStyle& style, const UserProfile& user, const GenConfig& config, Rng& rng, Streams& streams,
                 std::int64_t& end_time) {
    TapStyle session = style;
    for (std::size_t k = 0; k < kTapPattern; ++k) {
        session.x[k] += user.session_drift * kTapPosSd * rng.normal();
        session.y[k] += user.session_drift * kTapPosSd * rng.normal();
        session.log_hold[k] += user.session_drift * kTapLogHoldSd * rng.normal();
        session.log_gap[k] += user.session_drift * kTapLogGapSd * rng.normal();
    }
    std::vector<TouchEvent> touch;
    double t = 300.0 + rng.uniform(0.0, 200.0);
    for (std::size_t r = 0; r < config.tap_repeats; ++r) {
        for (std::size_t k = 0; k < kTapPattern; ++k) {
            const double x = clamp01(session.x[k] + user.stroke_noise * kTapPosSd * rng.normal());
            const double y = clamp01(session.y[k] + user.stroke_noise * kTapPosSd * rng.normal());
            const double hold = std::max(15.0, std::exp(session.log_hold[k] + user.stroke_noise * kTapLogHoldSd * rng.normal()));
            const double gap = std::max(20.0, std::exp(session.log_gap[k] + user.stroke_noise * kTapLogGapSd * rng.normal()));
            touch.push_back({ms(t), x, y, 0});
            touch.push_back({ms(t + hold), x, y, 1});
            t += hold + gap;
        }
    }
    end_time = touch.back().timestamp;
    streams.touch = std::move(touch);
}

void render_sensors(const UserProfile& user, const DeviceProfile& device, const GenConfig& config,
                    std::int64_t end_time, Rng& rng, Rng& jitter_rng, Streams& streams) {
    std::array<std::array<std::array<double, kMotionBasis>, 3>, 5> motion = user.motion;
    std::array<std::array<double, 3>, 5> posture = user.posture;
    for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t a = 0; a < 3; ++a) {
            posture[m][a] += user.session_drift * kPostureSd * rng.normal();
            for (auto& c : motion[m][a]) c += user.session_drift * kMotionSd * rng.normal();
        }
    }
    const double period = 1000.0 / config.sensor_rate_hz;
    const double duration = static_cast<double>(end_time) + 500.0;
    std::vector<std::int64_t> times;
    for (double t = 0.0; t <= duration;) {
        times.push_back(ms(t));
        t += std::max(1.0, period * (1.0 + device.jitter * jitter_rng.normal()));
    }
    for (std::size_t m = 0; m < 5; ++m) {
        std::vector<SensorSample> samples(times.size());
        std::array<double, 3> ar{};
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double u = static_cast<double>(times[i]) / duration;
            std::array<double, 3> v{};
            for (std::size_t a = 0; a < 3; ++a) {
                double slow = 0.0;
                for (std::size_t k = 0; k < kMotionBasis; ++k) {
                    slow += motion[m][a][k] * std::cos(std::numbers::pi * static_cast<double>(k + 1) * u);
                }
                ar[a] = 0.7 * ar[a] + std::sqrt(1.0 - 0.49) * rng.normal();
                const double raw = kSensorLevel[m][a] + kSensorAmp[m] * (posture[m][a] + slow + user.tremor * ar[a]);
                v[a] = device.gain[m] * raw + device.bias[m][a];
            }
            samples[i] = {times[i], v[0], v[1], v[2]};
        }
        streams.sensors[kBackgroundSensors[m]] = std::move(samples);
    }
}

}  // namespace

UserProfile UserProfile::blend(const UserProfile& target, double alpha) const {
    UserProfile out;
    out.seed = seed;
    out.digram_offset = lerp(digram_offset, target.digram_offset, alpha);
    out.reading = lerp(reading, target.reading, alpha);
    out.gallery = lerp(gallery, target.gallery, alpha);
    out.tapping.x = lerp(tapping.x, target.tapping.x, alpha);
    out.tapping.y = lerp(tapping.y, target.tapping.y, alpha);
    out.tapping.log_hold = lerp(tapping.log_hold, target.tapping.log_hold, alpha);
    out.tapping.log_gap = lerp(tapping.log_gap, target.tapping.log_gap, alpha);
    for (std::size_t m = 0; m < 5; ++m) {
        out.posture[m] = lerp(posture[m], target.posture[m], alpha);
        for (std::size_t a = 0; a < 3; ++a) out.motion[m][a] = lerp(motion[m][a], target.motion[m][a], alpha);
    }
    out.latency_sd = lerp(latency_sd, target.latency_sd, alpha);
    out.session_drift = lerp(session_drift, target.session_drift, alpha);
    out.stroke_noise = lerp(stroke_noise, target.stroke_noise, alpha);
    out.tremor = lerp(tremor, target.tremor, alpha);
    return out;
}

void UserProfile::validate() const {
    if (!(latency_sd > 0 && session_drift > 0 && stroke_noise > 0 && tremor > 0)) {
        throw Error(ErrorCode::ConfigInvalid, "user profile dispersion parameters must be positive");
    }
}

void DeviceProfile::validate() const {
    for (double g : gain) {
        if (!(g > 0)) throw Error(ErrorCode::ConfigInvalid, "device gains must be positive");
    }
    if (!(jitter >= 0)) throw Error(ErrorCode::ConfigInvalid, "device jitter must be non-negative");
}

void GenConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigInvalid, m); };
    if (users < 2) fail("users must be at least 2 (skilled impostors need a second person)");
    if (effective_train_users() < 1) fail("train_users must be at least 1");
    if (!(separability >= 0) || !std::isfinite(separability)) fail("separability must be finite and >= 0");
    if (!(alpha >= 0 && alpha <= 1)) fail("alpha must lie in [0,1]");
    if (!(beta >= 0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
    if (words_per_session < 1 || swipes_per_session < 1 || tap_repeats < 1) fail("session counts must be >= 1");
    if (!(sensor_rate_hz > 0 && sensor_rate_hz <= 1000)) fail("sensor_rate_hz must lie in (0, 1000]");
    if (random_policy.sample && random_policy.k == 0) fail("random policy sample size must be >= 1");
}

std::map<std::string, std::string> GenConfig::describe() const {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    return {{"users", std::to_string(users)},
            {"train_users", std::to_string(effective_train_users())},
            {"separability", num(separability)},
            {"alpha", num(alpha)},
            {"beta", num(beta)},
            {"words_per_session", std::to_string(words_per_session)},
            {"swipes_per_session", std::to_string(swipes_per_session)},
            {"tap_repeats", std::to_string(tap_repeats)},
            {"sensor_rate_hz", num(sensor_rate_hz)},
            {"seed", std::to_string(seed)},
            {"random_policy", random_policy.sample ? "sample:" + std::to_string(random_policy.k) : "all"}};
}

Population make_population(std::uint64_t seed) {
    Rng rng(seed);
    Population p;
    for (auto& b : p.digram_base) b = 170.0 + 35.0 * rng.normal();
    return p;
}

UserProfile make_user(const Population& population, double separability, std::uint64_t seed) {
    Rng rng(seed);
    const double s = separability;
    UserProfile u;
    u.seed = seed;
    for (std::size_t c = 0; c < kDigramClasses; ++c) {
        u.digram_offset[c] = population.digram_base[c] + s * kDigramSd * rng.normal();
    }
    u.reading = perturb(kReadingMean, s, rng);
    u.gallery = perturb(kGalleryMean, s, rng);
    for (std::size_t k = 0; k < kTapPattern; ++k) {
        u.tapping.x[k] = kTapX[k] + s * kTapPosSd * rng.normal();
        u.tapping.y[k] = kTapY[k] + s * kTapPosSd * rng.normal();
        u.tapping.log_hold[k] = kTapLogHold + s * kTapLogHoldSd * rng.normal();
        u.tapping.log_gap[k] = kTapLogGap + s * kTapLogGapSd * rng.normal();
    }
    for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t a = 0; a < 3; ++a) {
            u.posture[m][a] = s * kPostureSd * rng.normal();
            for (auto& c : u.motion[m][a]) c = s * kMotionSd * rng.normal();
        }
    }
    return u;
}

DeviceProfile make_device(double beta, std::uint64_t seed) {
    Rng rng(seed);
    DeviceProfile d;
    for (std::size_t m = 0; m < 5; ++m) {
        d.gain[m] = std::exp(0.5 * beta * rng.normal());
        for (auto& b : d.bias[m]) b = beta * kBiasScale[m] * rng.normal();
    }
    d.jitter = 0.5 * beta;
    return d;
}

Session generate_session(const UserProfile& user, const DeviceProfile& device, TaskKind task,
                         std::uint64_t session_seed, const GenConfig& config) {
    Rng rng(session_seed);
    Rng jitter_rng(derive_seed(session_seed, hash_string("jitter")));
    Rng sensor_rng(derive_seed(session_seed, hash_string("sensors")));
    Session s;
    s.task = task;
    std::int64_t end_time = 0;
    switch (task) {
        case TaskKind::Keystroke: render_keystrokes(user, config, rng, s.streams, end_time); break;
        case TaskKind::TextReading:
            render_swipes(user.reading, true, user, device, config, rng, jitter_rng, s.streams, end_time);
            break;
        case TaskKind::GallerySwiping:
            render_swipes(user.gallery, false, user, device, config, rng, jitter_rng, s.streams, end_time);
            break;
        case TaskKind::Tapping: render_taps(user.tapping, user, config, rng, s.streams, end_time); break;
    }
    render_sensors(user, device, config, end_time, sensor_rng, jitter_rng, s.streams);
    return s;
}

namespace {

struct Job {
    const UserProfile* user;
    UserProfile blended;  // used when `user` is null
    const DeviceProfile* device;
    TaskKind task;
    std::uint64_t seed;
    std::string session_id;
    std::optional<std::string> subject_id;
    std::string device_id;
    SessionRole role;
};

struct Cohort {
    std::vector<UserProfile> users;
    std::vector<DeviceProfile> devices;
    std::vector<std::string> device_ids;
    std::vector<std::string> subject_ids;
};

Cohort make_cohort(const Population& pop, const GenConfig& config, std::size_t n, std::uint64_t split_seed) {
    Cohort c;
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t user_seed = derive_seed(split_seed, hash_string("user") + k);
        const std::uint64_t device_seed = derive_seed(split_seed, hash_string("device") + k);
        c.users.push_back(make_user(pop, config.separability, user_seed));
        c.devices.push_back(make_device(config.beta, device_seed));
        c.device_ids.push_back(hex_id('d', mix64(device_seed), 10));
        c.subject_ids.push_back(hex_id('u', mix64(user_seed), 10));
    }
    return c;
}

DatasetSplit render(std::vector<Job>& jobs, SplitKind kind, const GenConfig& config, std::size_t threads) {
    DatasetSplit split;
    split.split_kind = kind;
    split.sessions.resize(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const Job& j = jobs[i];
        Session s = generate_session(j.user ? *j.user : j.blended, *j.device, j.task, j.seed, config);
        s.session_id = j.session_id;
        s.subject_id = j.subject_id;
        s.device_id = j.device_id;
        s.role = j.role;
        split.sessions[i] = std::move(s);
    });
    return split;
}

std::string session_id(std::uint64_t seed) { return hex_id('s', mix64(seed ^ 0x5e55), 16); }

}  // namespace

GeneratedData generate_dataset(const GenConfig& config, std::size_t threads) {
    config.validate();
    const Population pop = make_population(derive_seed(config.seed, hash_string("population")));
    GeneratedData out;

    {
        const std::uint64_t split_seed = derive_seed(config.seed, hash_string("train"));
        const Cohort c = make_cohort(pop, config, config.effective_train_users(), split_seed);
        std::vector<Job> jobs;
        for (std::size_t u = 0; u < c.users.size(); ++u) {
            for (TaskKind task : kAllTasks) {
                for (std::size_t r = 0; r < 4; ++r) {
                    const std::uint64_t seed =
                        derive_seed(split_seed, (u << 16) ^ (static_cast<std::uint64_t>(task) << 8) ^ r);
                    jobs.push_back({&c.users[u], {}, &c.devices[u], task, seed, session_id(seed), c.subject_ids[u],
                                    c.device_ids[u], r < 2 ? SessionRole::GenuineEnroll : SessionRole::GenuineVerify});
                }
            }
        }
        out.train = render(jobs, SplitKind::Train, config, threads);
    }

    auto labeled_split = [&](SplitKind kind, std::string_view name, std::map<TaskKind, TaskProtocol>& protocols) {
        const std::uint64_t split_seed = derive_seed(config.seed, hash_string(name));
        const Cohort c = make_cohort(pop, config, config.users, split_seed);
        Rng pick(derive_seed(split_seed, hash_string("impostors")));
        std::vector<Job> jobs;
        for (std::size_t d = 0; d < c.users.size(); ++d) {
            const std::size_t impostor = (d + 1 + pick.below(c.users.size() - 1)) % c.users.size();
            const UserProfile skilled = c.users[impostor].blend(c.users[d], config.alpha);
            for (TaskKind task : kAllTasks) {
                for (std::size_t r = 0; r < 6; ++r) {
                    const std::uint64_t seed =
                        derive_seed(split_seed, (d << 16) ^ (static_cast<std::uint64_t>(task) << 8) ^ r);
                    const SessionRole role = r < 2   ? SessionRole::GenuineEnroll
                                             : r < 4 ? SessionRole::GenuineVerify
                                                     : SessionRole::SkilledImpostor;
                    Job job{role == SessionRole::SkilledImpostor ? nullptr : &c.users[d],
                            {},
                            &c.devices[d],
                            task,
                            seed,
                            session_id(seed),
                            std::nullopt,
                            c.device_ids[d],
                            role};
                    if (!job.user) job.blended = skilled;
                    jobs.push_back(std::move(job));
                }
            }
        }
        DatasetSplit split = render(jobs, kind, config, threads);
        for (TaskKind task : kAllTasks) {
            auto [list, key] = protocol::build_comparisons(
                split, task, derive_seed(split_seed, hash_string("comparisons")), config.random_policy);
            protocols[task] = {std::move(list), std::move(key)};
        }
        return split;
    };
    out.validation = labeled_split(SplitKind::Validation, "validation", out.validation_protocol);
    out.evaluation = labeled_split(SplitKind::Evaluation, "evaluation", out.evaluation_protocol);
    return out;
}

std::string manifest_json(const GeneratedData& data, const GenConfig& config) {
    nlohmann::ordered_json root;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : config.describe()) cfg[k] = v;
    root["generator"] = "bbauth-synth 1";
    root["config"] = cfg;
    root["sessions"] = {{"train", data.train.sessions.size()},
                        {"validation", data.validation.sessions.size()},
                        {"evaluation", data.evaluation.sessions.size()}};
    nlohmann::ordered_json comparisons;
    for (const auto& [task, p] : data.evaluation_protocol) {
        comparisons[std::string(to_string(task))] = p.comparisons.comparisons.size();
    }
    root["comparisons_per_task"] = comparisons;
    return root.dump(1);
}

std::vector<std::string> write_dataset(const GeneratedData& data, const GenConfig& config, const std::string& dir,
                                       bool force) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("train.json", serialize_dataset(data.train));
    files.emplace_back("validation.json", serialize_dataset(data.validation));
    files.emplace_back("evaluation.json", serialize_dataset(data.evaluation));
    auto add_protocol = [&](std::string_view split, const std::map<TaskKind, TaskProtocol>& protocols) {
        for (const auto& [task, p] : protocols) {
            const std::string suffix = std::string(split) + "_" + std::string(to_string(task)) + ".json";
            files.emplace_back("comparisons_" + suffix, protocol::comparison_list_to_json(p.comparisons));
            files.emplace_back("keys_" + suffix, protocol::key_file_to_json(p.key));
        }
    };
    add_protocol("validation", data.validation_protocol);
    add_protocol("evaluation", data.evaluation_protocol);
    files.emplace_back("manifest.json", manifest_json(data, config));

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir + ": " + ec.message());
    if (!force) {
        for (const auto& [name, _] : files) {
            if (fs::exists(fs::path(dir) / name)) {
                throw Error(ErrorCode::Io, (fs::path(dir) / name).string() + " exists; pass --force to overwrite");
            }
        }
    }
    std::vector<std::string> written;
    for (const auto& [name, content] : files) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
        written.push_back(name);
    }
    return written;
}

}  // namespace bbauth::synth
