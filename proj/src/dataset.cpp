#include "bbauth/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bbauth/error.hpp"

namespace bbauth {

using nlohmann::json;

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::Keystroke: return "keystroke";
        case TaskKind::TextReading: return "reading";
        case TaskKind::GallerySwiping: return "gallery";
        case TaskKind::Tapping: return "tapping";
    }
    return "?";
}

std::string_view to_string(ModalityKind modality) {
    switch (modality) {
        case ModalityKind::Keystroke: return "keystroke";
        case ModalityKind::Touch: return "touch";
        case ModalityKind::Accelerometer: return "accelerometer";
        case ModalityKind::Gyroscope: return "gyroscope";
        case ModalityKind::Magnetometer: return "magnetometer";
        case ModalityKind::LinearAccelerometer: return "linear_accelerometer";
        case ModalityKind::Gravity: return "gravity";
    }
    return "?";
}

std::string_view to_string(SessionRole role) {
    switch (role) {
        case SessionRole::GenuineEnroll: return "enroll";
        case SessionRole::GenuineVerify: return "verify";
        case SessionRole::SkilledImpostor: return "skilled";
        case SessionRole::Unlabeled: return "unlabeled";
    }
    return "?";
}

std::string_view to_string(SplitKind split) {
    switch (split) {
        case SplitKind::Train: return "train";
        case SplitKind::Validation: return "validation";
        case SplitKind::Evaluation: return "evaluation";
    }
    return "?";
}

std::string_view to_string(FindingKind kind) {
    switch (kind) {
        case FindingKind::NonMonotonicTimestamp: return "non-monotonic timestamp";
        case FindingKind::NegativeTimestamp: return "negative timestamp";
        case FindingKind::ModalityNotValidForTask: return "modality not valid for task";
        case FindingKind::AsciiOutOfRange: return "ascii code out of range";
        case FindingKind::CoordinateOutOfRange: return "coordinate out of range";
        case FindingKind::ActionOutOfRange: return "touch action out of range";
        case FindingKind::NonFiniteValue: return "non-finite value";
    }
    return "?";
}

std::optional<TaskKind> parse_task(std::string_view s) {
    for (TaskKind t : kAllTasks) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::optional<ModalityKind> parse_modality(std::string_view s) {
    for (auto m : {ModalityKind::Keystroke, ModalityKind::Touch, ModalityKind::Accelerometer,
                   ModalityKind::Gyroscope, ModalityKind::Magnetometer,
                   ModalityKind::LinearAccelerometer, ModalityKind::Gravity}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::optional<SessionRole> parse_role(std::string_view s) {
    for (auto r : {SessionRole::GenuineEnroll, SessionRole::GenuineVerify,
                   SessionRole::SkilledImpostor, SessionRole::Unlabeled}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::optional<SplitKind> parse_split(std::string_view s) {
    for (auto k : {SplitKind::Train, SplitKind::Validation, SplitKind::Evaluation}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

bool is_background_sensor(ModalityKind modality) {
    return modality != ModalityKind::Keystroke && modality != ModalityKind::Touch;
}

bool modality_valid_for_task(ModalityKind modality, TaskKind task) {
    if (modality == ModalityKind::Keystroke) return task == TaskKind::Keystroke;
    return true;
}

bool Streams::has(ModalityKind modality) const {
    switch (modality) {
        case ModalityKind::Keystroke: return keystroke.has_value();
        case ModalityKind::Touch: return touch.has_value();
        default: return sensors.contains(modality);
    }
}

std::size_t Streams::event_count(ModalityKind modality) const {
    switch (modality) {
        case ModalityKind::Keystroke: return keystroke ? keystroke->size() : 0;
        case ModalityKind::Touch: return touch ? touch->size() : 0;
        default: {
            auto it = sensors.find(modality);
            return it == sensors.end() ? 0 : it->second.size();
        }
    }
}

const Session* DatasetSplit::find(std::string_view session_id) const {
    for (const auto& s : sessions) {
        if (s.session_id == session_id) return &s;
    }
    return nullptr;
}

std::map<std::pair<std::string, TaskKind>, std::size_t> DatasetSplit::device_session_counts() const {
    std::map<std::pair<std::string, TaskKind>, std::size_t> counts;
    for (const auto& s : sessions) ++counts[{s.device_id, s.task}];
    return counts;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

template <typename Event>
void check_timestamps(std::span<const Event> events, ModalityKind modality,
                      std::vector<Finding>& out) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].timestamp < 0) {
            out.push_back({FindingKind::NegativeTimestamp, modality, i,
                           "timestamp " + std::to_string(events[i].timestamp) + " < 0"});
        }
        if (i > 0 && events[i].timestamp < events[i - 1].timestamp) {
            out.push_back({FindingKind::NonMonotonicTimestamp, modality, i,
                           "timestamp " + std::to_string(events[i].timestamp) +
                               " precedes " + std::to_string(events[i - 1].timestamp)});
        }
    }
}

}  // namespace

ValidationReport validate_session(const Session& session) {
    ValidationReport report;
    auto& out = report.findings;
    const auto& st = session.streams;

    auto check_task = [&](ModalityKind m) {
        if (!modality_valid_for_task(m, session.task)) {
            out.push_back({FindingKind::ModalityNotValidForTask, m, 0,
                           std::string(to_string(m)) + " stream in a " +
                               std::string(to_string(session.task)) + " session"});
        }
    };

    if (st.keystroke) {
        check_task(ModalityKind::Keystroke);
        const auto& ev = *st.keystroke;
        check_timestamps<KeystrokeEvent>(ev, ModalityKind::Keystroke, out);
        for (std::size_t i = 0; i < ev.size(); ++i) {
            if (ev[i].ascii_code < 0 || ev[i].ascii_code > 255) {
                out.push_back({FindingKind::AsciiOutOfRange, ModalityKind::Keystroke, i,
                               "ascii code " + std::to_string(ev[i].ascii_code)});
            }
        }
    }
    if (st.touch) {
        check_task(ModalityKind::Touch);
        const auto& ev = *st.touch;
        check_timestamps<TouchEvent>(ev, ModalityKind::Touch, out);
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const auto& e = ev[i];
            if (!std::isfinite(e.x) || !std::isfinite(e.y)) {
                out.push_back({FindingKind::NonFiniteValue, ModalityKind::Touch, i, "x/y not finite"});
            } else if (e.x < 0.0 || e.x > 1.0 || e.y < 0.0 || e.y > 1.0) {
                std::ostringstream msg;
                msg << "(x, y) = (" << e.x << ", " << e.y << ") outside [0,1]";
                out.push_back({FindingKind::CoordinateOutOfRange, ModalityKind::Touch, i, msg.str()});
            }
            if (e.action < 0 || e.action > 2) {
                out.push_back({FindingKind::ActionOutOfRange, ModalityKind::Touch, i,
                               "action " + std::to_string(e.action) + " not in {0,1,2}"});
            }
        }
    }
    for (const auto& [m, samples] : st.sensors) {
        check_task(m);
        check_timestamps<SensorSample>(samples, m, out);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z)) {
                out.push_back({FindingKind::NonFiniteValue, m, i, "sample component not finite"});
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, where + ": " + what);
}

std::string session_label(const json& js, std::size_t index) {
    std::string label = "sessions[" + std::to_string(index) + "]";
    if (js.is_object()) {
        auto it = js.find("session_id");
        if (it != js.end() && it->is_string()) label += " (" + it->get<std::string>() + ")";
    }
    return label;
}

/// Location of one cell; only built when reporting an error.
struct Cell {
    const std::string& path;
    std::size_t row;
    int col;

    std::string str() const { return path + "[" + std::to_string(row) + "][" + std::to_string(col) + "]"; }
};

std::int64_t read_timestamp(const json& v, const Cell& at) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d)) return static_cast<std::int64_t>(d);
        schema_error(at.str(), "timestamp must be an integer number of milliseconds");
    }
    schema_error(at.str(), "timestamp must be a number");
}

double read_real(const json& v, const Cell& at) {
    if (!v.is_number()) schema_error(at.str(), "expected a number");
    return v.get<double>();
}

int read_int(const json& v, const Cell& at) {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d) && std::fabs(d) < 1e9) return static_cast<int>(d);
    }
    schema_error(at.str(), "expected an integer");
}

const json& row_at(const json& stream, std::size_t i, std::size_t width, const std::string& path) {
    const json& row = stream[i];
    if (!row.is_array() || row.size() != width) {
        schema_error(path + "[" + std::to_string(i) + "]",
                     "expected an array of " + std::to_string(width) + " numbers");
    }
    return row;
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
    if (!it->is_string()) schema_error(where + "." + key, "expected a string");
    return it->get<std::string>();
}

Session parse_session(const json& js, const std::string& where, std::vector<std::string>& warnings) {
    if (!js.is_object()) schema_error(where, "session must be an object");
    static const std::set<std::string> kKnown = {"session_id", "subject_id", "device_id",
                                                 "task",       "role",       "streams"};
    for (const auto& [key, value] : js.items()) {
        if (!kKnown.contains(key)) warnings.push_back(where + ": unknown field '" + key + "' ignored");
    }

    Session s;
    s.session_id = required_string(js, "session_id", where);
    s.device_id = required_string(js, "device_id", where);
    if (auto it = js.find("subject_id"); it != js.end() && !it->is_null()) {
        if (!it->is_string()) schema_error(where + ".subject_id", "expected a string");
        s.subject_id = it->get<std::string>();
    }
    const std::string task = required_string(js, "task", where);
    auto task_kind = parse_task(task);
    if (!task_kind) schema_error(where + ".task", "unknown task '" + task + "'");
    s.task = *task_kind;
    if (auto it = js.find("role"); it != js.end()) {
        if (!it->is_string()) schema_error(where + ".role", "expected a string");
        auto role = parse_role(it->get<std::string>());
        if (!role) schema_error(where + ".role", "unknown role '" + it->get<std::string>() + "'");
        s.role = *role;
    }

    auto streams_it = js.find("streams");
    if (streams_it == js.end()) schema_error(where, "missing field 'streams'");
    if (!streams_it->is_object()) schema_error(where + ".streams", "expected an object");

    for (const auto& [key, stream] : streams_it->items()) {
        const std::string path = where + ".streams." + key;
        auto modality = parse_modality(key);
        if (!modality) {
            warnings.push_back(path + ": unknown stream ignored");
            continue;
        }
        if (!stream.is_array()) schema_error(path, "expected an array of events");
        switch (*modality) {
            case ModalityKind::Keystroke: {
                std::vector<KeystrokeEvent> ev(stream.size());
                for (std::size_t i = 0; i < stream.size(); ++i) {
                    const json& row = row_at(stream, i, 2, path);
                    ev[i] = {read_timestamp(row[0], {path, i, 0}), read_int(row[1], {path, i, 1})};
                }
                s.streams.keystroke = std::move(ev);
                break;
            }
            case ModalityKind::Touch: {
                std::vector<TouchEvent> ev(stream.size());
                for (std::size_t i = 0; i < stream.size(); ++i) {
                    const json& row = row_at(stream, i, 4, path);
                    ev[i] = {read_timestamp(row[0], {path, i, 0}), read_real(row[1], {path, i, 1}),
                             read_real(row[2], {path, i, 2}), read_int(row[3], {path, i, 3})};
                }
                s.streams.touch = std::move(ev);
                break;
            }
            default: {
                std::vector<SensorSample> ev(stream.size());
                for (std::size_t i = 0; i < stream.size(); ++i) {
                    const json& row = row_at(stream, i, 4, path);
                    ev[i] = {read_timestamp(row[0], {path, i, 0}), read_real(row[1], {path, i, 1}),
                             read_real(row[2], {path, i, 2}), read_real(row[3], {path, i, 3})};
                }
                s.streams.sensors[*modality] = std::move(ev);
                break;
            }
        }
    }
    return s;
}

void check_counts(DatasetSplit& split, const ParseOptions& options) {
    std::vector<std::string> deviations;
    if (split.split_kind == SplitKind::Train) {
        std::map<std::pair<std::string, TaskKind>, std::size_t> per_user;
        for (const auto& s : split.sessions) ++per_user[{s.subject_id.value_or(""), s.task}];
        for (const auto& [key, n] : per_user) {
            if (n != 4) {
                deviations.push_back("subject " + key.first + ", task " +
                                     std::string(to_string(key.second)) + ": " + std::to_string(n) +
                                     " sessions (expected 4 genuine)");
            }
        }
    } else {
        std::map<std::pair<std::string, TaskKind>, std::pair<std::size_t, std::size_t>> per_device;
        for (const auto& s : split.sessions) {
            auto& [genuine, skilled] = per_device[{s.device_id, s.task}];
            if (s.role == SessionRole::SkilledImpostor) {
                ++skilled;
            } else {
                ++genuine;
            }
        }
        for (const auto& [key, c] : per_device) {
            const bool labeled_ok = c.first == 4 && c.second == 2;
            const bool unlabeled_ok = c.first == 6 && c.second == 0;
            if (!labeled_ok && !unlabeled_ok) {
                deviations.push_back("device " + key.first + ", task " +
                                     std::string(to_string(key.second)) + ": " +
                                     std::to_string(c.first + c.second) +
                                     " sessions (expected 4 genuine + 2 skilled)");
            }
        }
    }
    for (auto& d : deviations) {
        if (options.strict_counts) throw Error(ErrorCode::InvariantViolation, d);
        split.warnings.push_back("session count: " + d);
    }
}

}  // namespace

DatasetSplit parse_dataset(std::string_view document, SplitKind split_kind,
                           const ParseOptions& options) {
    json root;
    try {
        root = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
    if (!root.is_object()) schema_error("$", "document must be an object");

    DatasetSplit split;
    split.split_kind = split_kind;

    auto split_it = root.find("split");
    if (split_it == root.end()) schema_error("$", "missing field 'split'");
    if (!split_it->is_string()) schema_error("$.split", "expected a string");
    auto declared = parse_split(split_it->get<std::string>());
    if (!declared) schema_error("$.split", "unknown split '" + split_it->get<std::string>() + "'");
    if (*declared != split_kind) {
        schema_error("$.split", "document declares '" + std::string(to_string(*declared)) +
                                    "' but '" + std::string(to_string(split_kind)) + "' was requested");
    }
    for (const auto& [key, value] : root.items()) {
        if (key != "split" && key != "sessions") split.warnings.push_back("$: unknown field '" + key + "' ignored");
    }

    auto sessions_it = root.find("sessions");
    if (sessions_it == root.end()) schema_error("$", "missing field 'sessions'");
    if (!sessions_it->is_array()) schema_error("$.sessions", "expected an array");

    std::set<std::string> seen_ids;
    split.sessions.reserve(sessions_it->size());
    for (std::size_t i = 0; i < sessions_it->size(); ++i) {
        const json& js = (*sessions_it)[i];
        const std::string where = session_label(js, i);
        Session s = parse_session(js, where, split.warnings);

        if (!seen_ids.insert(s.session_id).second) {
            throw Error(ErrorCode::InvariantViolation, where + ": duplicate session_id");
        }
        if (split_kind == SplitKind::Train && !s.subject_id) {
            schema_error(where, "missing field 'subject_id' (required in the train split)");
        }
        if (split_kind != SplitKind::Train && s.subject_id) {
            throw Error(ErrorCode::InvariantViolation,
                        where + ".subject_id: sessions are pseudonymized outside the train split");
        }
        const auto report = validate_session(s);
        if (!report.ok()) {
            const Finding& f = report.findings.front();
            throw Error(ErrorCode::InvariantViolation,
                        where + ".streams." + std::string(to_string(f.modality)) + "[" +
                            std::to_string(f.index) + "]: " + std::string(to_string(f.kind)) + " (" +
                            f.message + ")");
        }
        split.sessions.push_back(std::move(s));
    }
    check_counts(split, options);
    return split;
}

namespace {

void put_string(std::string& out, std::string_view text) { out += json(text).dump(); }

void put_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void put_number(std::string& out, std::int64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

template <typename Event, typename Row>
void put_stream(std::string& out, std::string_view name, const std::vector<Event>& events, bool& first, Row row) {
    if (!first) out += ',';
    first = false;
    put_string(out, name);
    out += ":[";
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0) out += ',';
        out += '[';
        row(events[i]);
        out += ']';
    }
    out += ']';
}

}  // namespace

std::string serialize_dataset(const DatasetSplit& split) {
    std::string out;
    out += "{\"split\":";
    put_string(out, to_string(split.split_kind));
    out += ",\"sessions\":[";
    for (std::size_t si = 0; si < split.sessions.size(); ++si) {
        const Session& s = split.sessions[si];
        if (si > 0) out += ',';
        out += "{\"session_id\":";
        put_string(out, s.session_id);
        if (s.subject_id) {
            out += ",\"subject_id\":";
            put_string(out, *s.subject_id);
        }
        out += ",\"device_id\":";
        put_string(out, s.device_id);
        out += ",\"task\":";
        put_string(out, to_string(s.task));
        out += ",\"role\":";
        put_string(out, to_string(s.role));
        out += ",\"streams\":{";
        bool first = true;
        if (s.streams.keystroke) {
            put_stream(out, "keystroke", *s.streams.keystroke, first, [&](const KeystrokeEvent& e) {
                put_number(out, e.timestamp);
                out += ',';
                put_number(out, static_cast<std::int64_t>(e.ascii_code));
            });
        }
        if (s.streams.touch) {
            put_stream(out, "touch", *s.streams.touch, first, [&](const TouchEvent& e) {
                put_number(out, e.timestamp);
                out += ',';
                put_number(out, e.x);
                out += ',';
                put_number(out, e.y);
                out += ',';
                put_number(out, static_cast<std::int64_t>(e.action));
            });
        }
        for (const auto& [m, samples] : s.streams.sensors) {
            put_stream(out, to_string(m), samples, first, [&](const SensorSample& e) {
                put_number(out, e.timestamp);
                out += ',';
                put_number(out, e.x);
                out += ',';
                put_number(out, e.y);
                out += ',';
                put_number(out, e.z);
            });
        }
        out += "}}";
    }
    out += "]}";
    return out;
}

DatasetSplit load_dataset(const std::string& path, SplitKind split_kind, const ParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), split_kind, options);
}

void save_dataset(const std::string& path, const DatasetSplit& split) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << serialize_dataset(split) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

// ---------------------------------------------------------------------------
// Strokes

StrokeSlicing slice_strokes(std::span<const TouchEvent> touch) {
    StrokeSlicing out;
    std::vector<TouchEvent> current;
    bool open = false;
    for (const auto& e : touch) {
        switch (static_cast<TouchAction>(e.action)) {
            case TouchAction::Down:
                if (open) out.dropped_events += current.size();
                current.assign(1, e);
                open = true;
                break;
            case TouchAction::Move:
                if (open) {
                    current.push_back(e);
                } else {
                    ++out.dropped_events;
                }
                break;
            case TouchAction::Up:
                if (open) {
                    current.push_back(e);
                    out.strokes.push_back({std::move(current)});
                    current.clear();
                    open = false;
                } else {
                    ++out.dropped_events;
                }
                break;
            default:
                ++out.dropped_events;
                break;
        }
    }
    if (open) out.dropped_events += current.size();
    return out;
}

}  // namespace bbauth
