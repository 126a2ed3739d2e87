#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "bbauth/dataset.hpp"
#include "bbauth/error.hpp"
#include "bbauth/synthgen.hpp"
#include "support.hpp"

using namespace bbauth;

namespace {

const char* kMinimal = R"({"split": "validation", "sessions": [
  {"session_id": "s1", "device_id": "d1", "task": "keystroke", "role": "unlabeled",
   "streams": {"keystroke": [[0, 104], [120, 105]]}}]})";

ErrorCode code_of(const std::string& doc, SplitKind kind = SplitKind::Validation) {
    try {
        parse_dataset(doc, kind);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

std::string message_of(const std::string& doc, SplitKind kind = SplitKind::Validation) {
    try {
        parse_dataset(doc, kind);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::string touch_doc(const std::string& events) {
    return R"({"split": "validation", "sessions": [{"session_id": "s9", "device_id": "d", "task": "reading",
      "streams": {"touch": )" + events + "}}]}";
}

}  // namespace

TEST_CASE("minimal document parses to one session with two events") {
    const auto split = parse_dataset(kMinimal, SplitKind::Validation);
    REQUIRE(split.sessions.size() == 1);
    const auto& s = split.sessions[0];
    CHECK(s.session_id == "s1");
    CHECK(s.task == TaskKind::Keystroke);
    REQUIRE(s.streams.keystroke);
    CHECK(s.streams.keystroke->size() == 2);
    CHECK((*s.streams.keystroke)[1] == KeystrokeEvent{120, 105});
    CHECK_FALSE(s.subject_id);
}

TEST_CASE("touch action out of range names the event index") {
    const auto doc = touch_doc("[[0, 0.1, 0.1, 0], [10, 0.2, 0.2, 3]]");
    CHECK(code_of(doc) == ErrorCode::InvariantViolation);
    const auto msg = message_of(doc);
    CHECK(msg.find("touch[1]") != std::string::npos);
    CHECK(msg.find("s9") != std::string::npos);
}

TEST_CASE("malformed documents raise the documented error classes") {
    CHECK(code_of("{\"split\": \"validation\", \"sessions\": [") == ErrorCode::MalformedDocument);
    CHECK(code_of("not json") == ErrorCode::MalformedDocument);
    CHECK(code_of(R"({"sessions": []})") == ErrorCode::SchemaViolation);
    CHECK(code_of(R"({"split": "validation", "sessions": [{"device_id": "d", "task": "reading", "streams": {}}]})") ==
          ErrorCode::SchemaViolation);
    CHECK(code_of(R"({"split": "validation", "sessions": [{"session_id": "a", "device_id": "d", "task": "typing",
      "streams": {}}]})") == ErrorCode::SchemaViolation);
    CHECK(code_of(touch_doc("[[0, \"x\", 0.1, 0]]")) == ErrorCode::SchemaViolation);
    CHECK(code_of(touch_doc("[[0, 0.1, 0.1]]")) == ErrorCode::SchemaViolation);
    CHECK(code_of(touch_doc("[[0, 1.5, 0.1, 0]]")) == ErrorCode::InvariantViolation);
    CHECK(code_of(touch_doc("[[10, 0.1, 0.1, 0], [5, 0.1, 0.1, 1]]")) == ErrorCode::InvariantViolation);
    CHECK(code_of(touch_doc("[[-1, 0.1, 0.1, 0]]")) == ErrorCode::InvariantViolation);
    // split mismatch and pseudonymization
    CHECK(code_of(kMinimal, SplitKind::Evaluation) == ErrorCode::SchemaViolation);
    CHECK(code_of(R"({"split": "evaluation", "sessions": [{"session_id": "a", "subject_id": "u1", "device_id": "d",
      "task": "reading", "streams": {}}]})", SplitKind::Evaluation) == ErrorCode::InvariantViolation);
    CHECK(code_of(R"({"split": "train", "sessions": [{"session_id": "a", "device_id": "d",
      "task": "reading", "streams": {}}]})", SplitKind::Train) == ErrorCode::SchemaViolation);
    CHECK(code_of(R"({"split": "validation", "sessions": [
      {"session_id": "a", "device_id": "d", "task": "reading", "streams": {}},
      {"session_id": "a", "device_id": "d", "task": "reading", "streams": {}}]})") == ErrorCode::InvariantViolation);
    // keystroke stream inside a tapping session
    CHECK(code_of(R"({"split": "validation", "sessions": [{"session_id": "a", "device_id": "d", "task": "tapping",
      "streams": {"keystroke": [[0, 65]]}}]})") == ErrorCode::InvariantViolation);
    CHECK(code_of(R"({"split": "validation", "sessions": [{"session_id": "a", "device_id": "d", "task": "keystroke",
      "streams": {"keystroke": [[0, 300]]}}]})") == ErrorCode::InvariantViolation);
}

TEST_CASE("unknown keys are ignored with warnings") {
    const auto split = parse_dataset(R"({"split": "validation", "extra": 1, "sessions": [
      {"session_id": "a", "device_id": "d", "task": "reading", "colour": "red",
       "streams": {"gps": [[0, 1, 2, 3]]}}]})", SplitKind::Validation);
    CHECK(split.sessions.size() == 1);
    CHECK(split.warnings.size() >= 3);
}

TEST_CASE("session-count deviations warn by default and fail when strict") {
    const auto split = parse_dataset(kMinimal, SplitKind::Validation);
    CHECK_FALSE(split.warnings.empty());
    ParseOptions strict;
    strict.strict_counts = true;
    CHECK_THROWS_AS(parse_dataset(kMinimal, SplitKind::Validation, strict), Error);
}

TEST_CASE("validate_session reports findings as data") {
    Session s = testing::keystroke_session("k", "hello", {100});
    CHECK(validate_session(s).ok());

    Session bad = s;
    (*bad.streams.keystroke)[3].timestamp = 10;
    auto report = validate_session(bad);
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].kind == FindingKind::NonMonotonicTimestamp);
    CHECK(report.findings[0].index == 3);

    Session tap = s;
    tap.task = TaskKind::Tapping;
    report = validate_session(tap);
    REQUIRE_FALSE(report.ok());
    CHECK(report.findings[0].kind == FindingKind::ModalityNotValidForTask);

    Session equal_times = testing::keystroke_session("e", "aaa", {0});
    CHECK(validate_session(equal_times).ok());

    Session nan_sensor;
    nan_sensor.task = TaskKind::Tapping;
    nan_sensor.streams.sensors[ModalityKind::Gyroscope] = {{0, 0.0, std::nan(""), 0.0}};
    report = validate_session(nan_sensor);
    REQUIRE_FALSE(report.ok());
    CHECK(report.findings[0].kind == FindingKind::NonFiniteValue);
}

TEST_CASE("modality validity follows the task matrix") {
    for (TaskKind t : kAllTasks) {
        CHECK(modality_valid_for_task(ModalityKind::Touch, t));
        for (ModalityKind m : kBackgroundSensors) CHECK(modality_valid_for_task(m, t));
        CHECK(modality_valid_for_task(ModalityKind::Keystroke, t) == (t == TaskKind::Keystroke));
    }
}

TEST_CASE("slice_strokes examples") {
    auto ev = [](std::int64_t t, int a) { return TouchEvent{t, 0.5, 0.5, a}; };
    {
        const std::vector<TouchEvent> seq = {ev(0, 0), ev(1, 2), ev(2, 2), ev(3, 1)};
        const auto r = slice_strokes(seq);
        REQUIRE(r.strokes.size() == 1);
        CHECK(r.strokes[0].events.size() == 4);
        CHECK(r.dropped_events == 0);
    }
    {
        const std::vector<TouchEvent> seq = {ev(0, 2), ev(1, 1), ev(2, 0), ev(3, 2), ev(4, 1)};
        const auto r = slice_strokes(seq);
        REQUIRE(r.strokes.size() == 1);
        CHECK(r.strokes[0].events.front().timestamp == 2);
        CHECK(r.dropped_events == 2);
    }
    {
        const std::vector<TouchEvent> seq = {ev(0, 0), ev(1, 2)};
        const auto r = slice_strokes(seq);
        CHECK(r.strokes.empty());
        CHECK(r.dropped_events == 2);
    }
}

TEST_CASE("slice_strokes partitions retained events in order") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TouchEvent> seq;
        const auto n = rng.below(30);
        for (std::uint64_t i = 0; i < n; ++i) {
            seq.push_back({static_cast<std::int64_t>(i), 0.1, 0.2, static_cast<int>(rng.below(3))});
        }
        const auto r = slice_strokes(seq);
        std::size_t kept = 0;
        std::int64_t last = -1;
        for (const auto& s : r.strokes) {
            REQUIRE(s.events.size() >= 2);
            CHECK(s.events.front().action == 0);
            CHECK(s.events.back().action == 1);
            for (std::size_t i = 1; i + 1 < s.events.size(); ++i) CHECK(s.events[i].action == 2);
            for (const auto& e : s.events) {
                CHECK(e.timestamp > last);
                last = e.timestamp;
            }
            kept += s.events.size();
        }
        CHECK(kept + r.dropped_events == seq.size());
    }
}

TEST_CASE("round trip through serialize preserves the data") {
    const auto split = parse_dataset(kMinimal, SplitKind::Validation);
    const auto again = parse_dataset(serialize_dataset(split), SplitKind::Validation);
    CHECK(again.same_data(split));

    synth::GenConfig cfg;
    cfg.users = 3;
    const auto data = synth::generate_dataset(cfg);
    for (const DatasetSplit* s : {&data.train, &data.validation, &data.evaluation}) {
        const auto text = serialize_dataset(*s);
        ParseOptions strict;
        strict.strict_counts = true;
        const auto parsed = parse_dataset(text, s->split_kind, strict);
        CHECK(parsed.same_data(*s));
        CHECK(parsed.warnings.empty());
        CHECK(serialize_dataset(parsed) == text);
    }
}

TEST_CASE("synthetic evaluation split of 20 users has 480 sessions") {
    synth::GenConfig cfg;
    cfg.users = 20;
    cfg.train_users = 2;
    const auto data = synth::generate_dataset(cfg);
    CHECK(data.evaluation.sessions.size() == 480);
    for (const auto& [key, n] : data.evaluation.device_session_counts()) CHECK(n == 6);
}

TEST_CASE("malformed fixtures fail with the code in their file name") {
    const std::filesystem::path dir = std::filesystem::path(BBAUTH_FIXTURE_DIR) / "malformed";
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        const auto expected = name.substr(0, name.find('-'));
        CAPTURE(name);
        try {
            load_dataset(entry.path().string(), SplitKind::Validation);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(to_string(e.code()) == expected);
        }
        ++seen;
    }
    CHECK(seen >= 8);
    const auto minimal = load_dataset((std::filesystem::path(BBAUTH_FIXTURE_DIR) / "minimal_validation.json").string(),
                                      SplitKind::Validation);
    CHECK(parse_dataset(serialize_dataset(minimal), SplitKind::Validation).same_data(minimal));
}
