#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bbauth {

enum class TaskKind { Keystroke, TextReading, GallerySwiping, Tapping };

inline constexpr TaskKind kAllTasks[] = {TaskKind::Keystroke, TaskKind::TextReading,
                                         TaskKind::GallerySwiping, TaskKind::Tapping};

enum class ModalityKind {
    Keystroke,
    Touch,
    Accelerometer,
    Gyroscope,
    Magnetometer,
    LinearAccelerometer,
    Gravity,
};

/// Background sensors in the fixed channel order used for fusion and images.
inline constexpr ModalityKind kBackgroundSensors[] = {
    ModalityKind::Accelerometer, ModalityKind::Gyroscope, ModalityKind::Magnetometer,
    ModalityKind::LinearAccelerometer, ModalityKind::Gravity};

enum class SessionRole { GenuineEnroll, GenuineVerify, SkilledImpostor, Unlabeled };

enum class SplitKind { Train, Validation, Evaluation };

std::string_view to_string(TaskKind task);
std::string_view to_string(ModalityKind modality);
std::string_view to_string(SessionRole role);
std::string_view to_string(SplitKind split);

std::optional<TaskKind> parse_task(std::string_view s);
std::optional<ModalityKind> parse_modality(std::string_view s);
std::optional<SessionRole> parse_role(std::string_view s);
std::optional<SplitKind> parse_split(std::string_view s);

bool is_background_sensor(ModalityKind modality);
/// Task/modality matrix: keystroke only for the keystroke task; touch and
/// the five background sensors for every task.
bool modality_valid_for_task(ModalityKind modality, TaskKind task);

struct KeystrokeEvent {
    std::int64_t timestamp = 0;  // ms
    int ascii_code = 0;

    friend bool operator==(const KeystrokeEvent&, const KeystrokeEvent&) = default;
};

enum class TouchAction : int { Down = 0, Up = 1, Move = 2 };

struct TouchEvent {
    std::int64_t timestamp = 0;  // ms
    double x = 0.0;              // fraction of screen width
    double y = 0.0;              // fraction of screen height
    int action = 0;              // raw code; see TouchAction

    friend bool operator==(const TouchEvent&, const TouchEvent&) = default;
};

struct SensorSample {
    std::int64_t timestamp = 0;  // ms
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

struct Streams {
    std::optional<std::vector<KeystrokeEvent>> keystroke;
    std::optional<std::vector<TouchEvent>> touch;
    std::map<ModalityKind, std::vector<SensorSample>> sensors;

    bool has(ModalityKind modality) const;
    std::size_t event_count(ModalityKind modality) const;

    friend bool operator==(const Streams&, const Streams&) = default;
};

struct Session {
    std::string session_id;
    std::optional<std::string> subject_id;
    std::string device_id;
    TaskKind task = TaskKind::Keystroke;
    SessionRole role = SessionRole::Unlabeled;
    Streams streams;

    friend bool operator==(const Session&, const Session&) = default;
};

struct DatasetSplit {
    SplitKind split_kind = SplitKind::Train;
    std::vector<Session> sessions;
    /// Non-fatal diagnostics: unknown keys, session-count deviations.
    std::vector<std::string> warnings;

    const Session* find(std::string_view session_id) const;
    /// (device_id, task) -> session count.
    std::map<std::pair<std::string, TaskKind>, std::size_t> device_session_counts() const;

    /// Structural equality; warnings are not part of the data.
    bool same_data(const DatasetSplit& other) const {
        return split_kind == other.split_kind && sessions == other.sessions;
    }
};

// ---------------------------------------------------------------------------
// Validation

enum class FindingKind {
    NonMonotonicTimestamp,
    NegativeTimestamp,
    ModalityNotValidForTask,
    AsciiOutOfRange,
    CoordinateOutOfRange,
    ActionOutOfRange,
    NonFiniteValue,
};

std::string_view to_string(FindingKind kind);

struct Finding {
    FindingKind kind;
    ModalityKind modality;
    std::size_t index;  // event index within the stream; 0 for session-level findings
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

/// Lists every invariant violation of one session. Pure.
ValidationReport validate_session(const Session& session);

// ---------------------------------------------------------------------------
// Document I/O

struct ParseOptions {
    /// Session-count deviations from the split's expected structure raise
    /// InvariantViolation instead of being recorded as warnings.
    bool strict_counts = false;
};

/// Parses a dataset document. Throws Error with MalformedDocument,
/// SchemaViolation or InvariantViolation; the message names the session and
/// the JSON path of the offending value.
DatasetSplit parse_dataset(std::string_view document, SplitKind split_kind,
                           const ParseOptions& options = {});

std::string serialize_dataset(const DatasetSplit& split);

DatasetSplit load_dataset(const std::string& path, SplitKind split_kind,
                          const ParseOptions& options = {});
void save_dataset(const std::string& path, const DatasetSplit& split);

// ---------------------------------------------------------------------------
// Strokes

struct Stroke {
    std::vector<TouchEvent> events;
};

struct StrokeSlicing {
    std::vector<Stroke> strokes;
    std::size_t dropped_events = 0;
};

/// Splits a touch stream into down..up runs. Orphan and unterminated events
/// are dropped and counted.
StrokeSlicing slice_strokes(std::span<const TouchEvent> touch);

}  // namespace bbauth
