#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "bbauth/error.hpp"
#include "bbauth/protocol.hpp"
#include "support.hpp"

using namespace bbauth;
using namespace bbauth::protocol;

namespace {

DatasetSplit devices(std::size_t n, TaskKind task = TaskKind::TextReading) {
    DatasetSplit split;
    split.split_kind = SplitKind::Evaluation;
    const SessionRole roles[] = {SessionRole::GenuineEnroll,   SessionRole::GenuineEnroll,
                                 SessionRole::GenuineVerify,   SessionRole::GenuineVerify,
                                 SessionRole::SkilledImpostor, SessionRole::SkilledImpostor};
    for (std::size_t d = 0; d < n; ++d) {
        for (std::size_t r = 0; r < 6; ++r) {
            Session s;
            s.session_id = "s" + std::to_string(d) + "_" + std::to_string(r);
            s.device_id = "dev" + std::to_string(d);
            s.task = task;
            s.role = roles[r];
            split.sessions.push_back(s);
        }
    }
    return split;
}

std::size_t count(const KeyFile& key, Label label) {
    return static_cast<std::size_t>(
        std::count_if(key.labels.begin(), key.labels.end(), [&](const auto& kv) { return kv.second == label; }));
}

ScoreFile scores_for(const KeyFile& key, double genuine, double impostor) {
    ScoreFile f;
    for (const auto& [id, label] : key.labels) f.entries.emplace_back(id, label == Label::Genuine ? genuine : impostor);
    return f;
}

AucCounts counts(std::uint64_t num, std::uint64_t den) {
    AucCounts c;
    c.numerator = num;
    c.denominator = den;
    return c;
}

}  // namespace

TEST_CASE("auc worked examples") {
    CHECK(auc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.3}) == 1.0);
    CHECK(auc(std::vector<double>{0.6, 0.4}, std::vector<double>{0.5, 0.5}) == 0.5);
    CHECK(auc(std::vector<double>{0.7, 0.5}, std::vector<double>{0.5, 0.6}) == 0.625);
    CHECK(auc_counts(std::vector<double>{0.7, 0.5}, std::vector<double>{0.5, 0.6}) == counts(5, 8));
    CHECK_THROWS_AS(auc(std::vector<double>{}, std::vector<double>{0.1}), Error);
    CHECK_THROWS_AS(auc(std::vector<double>{0.1}, std::vector<double>{}), Error);
}

TEST_CASE("auc equals brute-force pair counting on random score sets") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto ng = 1 + rng.below(50), ni = 1 + rng.below(50);
        const bool coarse = trial % 2 == 0;
        std::vector<double> g(ng), im(ni);
        for (auto& v : g) v = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
        for (auto& v : im) v = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
        const auto c = auc_counts(g, im);
        const auto [num, den] = testing::brute_auc(g, im);
        CHECK(c.numerator == num);
        CHECK(c.denominator == den);
        const auto r = auc_counts(im, g);
        CHECK(c.numerator + r.numerator == c.denominator);
        std::vector<double> tg = g, ti = im;
        for (auto& v : tg) v = std::exp(3 * v) - 7;
        for (auto& v : ti) v = std::exp(3 * v) - 7;
        CHECK(auc_counts(tg, ti) == c);
    }
}

TEST_CASE("auc_greater compares exact fractions") {
    CHECK(auc_greater(counts(2, 3), counts(3, 5)));
    CHECK_FALSE(auc_greater(counts(2, 4), counts(1, 2)));
    CHECK_FALSE(auc_greater(counts(1, 2), counts(2, 4)));
    const std::uint64_t big = std::numeric_limits<std::uint64_t>::max() / 2;
    CHECK(auc_greater(counts(big, big + 1), counts(big - 1, big)));
}

TEST_CASE("build_comparisons counts") {
    for (auto [n, genuine, random] : {std::tuple{20u, 40u, 760u}, std::tuple{2u, 4u, 4u}}) {
        const auto split = devices(n);
        const auto [list, key] = build_comparisons(split, TaskKind::TextReading, 7);
        CHECK(count(key, Label::Genuine) == genuine);
        CHECK(count(key, Label::SkilledImpostor) == genuine);
        CHECK(count(key, Label::RandomImpostor) == random);
        CHECK(list.comparisons.size() == key.labels.size());
        CHECK(list.task == TaskKind::TextReading);
        std::set<std::string> ids;
        for (const auto& c : list.comparisons) {
            ids.insert(c.id);
            CHECK(key.labels.contains(c.id));
            CHECK(c.enroll[0] != c.enroll[1]);
            const auto* e0 = split.find(c.enroll[0]);
            const auto* e1 = split.find(c.enroll[1]);
            const auto* v = split.find(c.verify);
            REQUIRE(e0);
            REQUIRE(e1);
            REQUIRE(v);
            CHECK(e0->device_id == e1->device_id);
            CHECK(e0->role == SessionRole::GenuineEnroll);
            const Label l = key.labels.at(c.id);
            if (l == Label::RandomImpostor) {
                CHECK(v->device_id != e0->device_id);
                CHECK(v->role == SessionRole::GenuineVerify);
            } else {
                CHECK(v->device_id == e0->device_id);
                CHECK(v->role == (l == Label::Genuine ? SessionRole::GenuineVerify : SessionRole::SkilledImpostor));
            }
            CHECK(c.id.find("dev") == std::string::npos);
            CHECK(c.id.find("s") == std::string::npos);
        }
        CHECK(ids.size() == list.comparisons.size());
    }
}

TEST_CASE("build_comparisons determinism, sampling and completeness") {
    const auto split = devices(5);
    const auto a = build_comparisons(split, TaskKind::TextReading, 3);
    const auto b = build_comparisons(split, TaskKind::TextReading, 3);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    const auto c = build_comparisons(split, TaskKind::TextReading, 4);
    CHECK_FALSE(a.first == c.first);

    const auto sampled = build_comparisons(split, TaskKind::TextReading, 3, RandomPolicy::sample_k(3));
    CHECK(count(sampled.second, Label::RandomImpostor) == 15);
    CHECK(count(sampled.second, Label::Genuine) == 10);

    CHECK(RandomPolicy::parse("all").sample == false);
    CHECK(RandomPolicy::parse("sample:4").k == 4);
    CHECK_THROWS_AS(RandomPolicy::parse("some"), Error);
    CHECK_THROWS_AS(RandomPolicy::parse("sample:x"), Error);

    auto broken = split;
    broken.sessions.pop_back();
    try {
        build_comparisons(broken, TaskKind::TextReading, 1);
        FAIL("expected IncompleteDevice");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IncompleteDevice);
    }
    auto unlabeled = split;
    unlabeled.sessions[0].role = SessionRole::Unlabeled;
    CHECK_THROWS_AS(build_comparisons(unlabeled, TaskKind::TextReading, 1), Error);
}

TEST_CASE("grade examples") {
    const auto [list, key] = build_comparisons(devices(3), TaskKind::TextReading, 1);
    auto r = grade(scores_for(key, 1.0, 0.0), key, TaskKind::TextReading, "team");
    CHECK(r.auc_mixed() == 100.0);
    CHECK(r.auc_random() == 100.0);
    CHECK(r.auc_skilled() == 100.0);
    CHECK(r.genuine_count == 6);
    CHECK(r.random_count == 12);
    CHECK(r.skilled_count == 6);

    r = grade(scores_for(key, 0.4, 0.4), key, TaskKind::TextReading);
    CHECK(r.auc_mixed() == 50.0);
    CHECK(r.auc_random() == 50.0);
    CHECK(r.auc_skilled() == 50.0);

    Rng rng(4);
    ScoreFile f;
    for (const auto& [id, label] : key.labels) f.entries.emplace_back(id, rng.uniform());
    r = grade(f, key, TaskKind::TextReading);
    CHECK(r.mixed.numerator == r.random.numerator + r.skilled.numerator);
    CHECK(r.mixed.denominator == r.random.denominator + r.skilled.denominator);

    ScoreFile shuffled = f;
    rng.shuffle(std::span(shuffled.entries));
    const auto rs = grade(shuffled, key, TaskKind::TextReading);
    CHECK(rs.mixed == r.mixed);
    CHECK(rs.random == r.random);
    CHECK(rs.skilled == r.skilled);
    CHECK(grade_report_to_json(rs) == grade_report_to_json(r));
}

TEST_CASE("grade errors and diagnostics") {
    const auto [list, key] = build_comparisons(devices(2), TaskKind::TextReading, 1);
    auto f = scores_for(key, 0.9, 0.1);
    const auto missing_id = f.entries.back().first;
    auto missing = f;
    missing.entries.pop_back();
    try {
        grade(missing, key, TaskKind::TextReading);
        FAIL("expected MissingScore");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingScore);
        CHECK(std::string(e.what()).find(missing_id) != std::string::npos);
    }
    auto dup = f;
    dup.entries.push_back(dup.entries.front());
    CHECK_THROWS_AS(grade(dup, key, TaskKind::TextReading), Error);
    auto nan = f;
    nan.entries[0].second = std::nan("");
    CHECK_THROWS_AS(grade(nan, key, TaskKind::TextReading), Error);
    auto extra = f;
    extra.entries.emplace_back("cffffffffffff", 0.5);
    const auto r = grade(extra, key, TaskKind::TextReading);
    CHECK(r.auc_mixed() == 100.0);
    CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("score file parsing") {
    const auto f = parse_score_file("comparison_id,score\r\na,0.5\n\nb,1.5\nc,-0.2\n");
    REQUIRE(f.entries.size() == 3);
    CHECK(f.entries[0].second == 0.5);
    CHECK(f.entries[1].second == 1.0);
    CHECK(f.entries[2].second == 0.0);
    CHECK(f.warnings.size() == 2);

    auto code = [](std::string_view text) {
        try {
            parse_score_file(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    CHECK(code("id,score\na,0.5\n") == ErrorCode::MalformedScoreFile);
    CHECK(code("comparison_id,score\na\n") == ErrorCode::MalformedScoreFile);
    CHECK(code("comparison_id,score\na,abc\n") == ErrorCode::MalformedScoreFile);
    CHECK(code("comparison_id,score\na,nan\n") == ErrorCode::NonFiniteScore);
    CHECK(code("comparison_id,score\na,inf\n") == ErrorCode::NonFiniteScore);
    CHECK(code("") == ErrorCode::MalformedScoreFile);

    Rng rng(5);
    std::vector<std::pair<std::string, double>> entries;
    for (int i = 0; i < 50; ++i) entries.emplace_back("c" + std::to_string(i), rng.uniform());
    entries.emplace_back("z", 0.1 + 0.2);
    const auto back = parse_score_file(write_score_file(entries));
    CHECK(back.entries == entries);
}

TEST_CASE("ranking and table") {
    GradeReport a;
    a.team = "alpha";
    a.mixed = counts(6637, 10000);
    a.random = counts(6477, 10000);
    a.skilled = counts(6791, 10000);
    GradeReport b = a;
    b.team = "beta";
    b.mixed = counts(5125, 10000);
    GradeReport c = a;
    c.team = "aardvark";
    c.skilled = counts(1, 10000);
    GradeReport other = a;
    other.team = "elsewhere";
    other.task = TaskKind::Tapping;
    other.mixed = counts(1, 1);

    const GradeReport reports[] = {b, a, other, c};
    const auto board = rank(reports, TaskKind::Keystroke);
    REQUIRE(board.size() == 3);
    CHECK(board[0].team == "aardvark");
    CHECK(board[1].team == "alpha");
    CHECK(board[2].team == "beta");
    CHECK(board[2].position == 3);

    const auto table = format_table(TaskKind::Keystroke, board);
    CHECK(table.find("Task 1 - Keystroke") != std::string::npos);
    CHECK(table.find("Mixed AUC [%]") != std::string::npos);
    CHECK(table.find("66.37") != std::string::npos);
    CHECK(table.find("64.77") != std::string::npos);
    CHECK(table.find("67.91") != std::string::npos);
    CHECK(table.find("51.25") != std::string::npos);

    const GradeReport single[] = {a};
    CHECK(rank(single, TaskKind::Keystroke).size() == 1);
    CHECK(GradeReport::percent(counts(2, 3)) == 66.67);
}

TEST_CASE("json round trips") {
    const auto [list, key] = build_comparisons(devices(3, TaskKind::GallerySwiping), TaskKind::GallerySwiping, 2);
    CHECK(comparison_list_from_json(comparison_list_to_json(list)) == list);
    CHECK(key_file_from_json(key_file_to_json(key)) == key);
    const auto r = grade(scores_for(key, 0.7, 0.2), key, TaskKind::GallerySwiping, "t");
    const auto back = grade_report_from_json(grade_report_to_json(r));
    CHECK(back.team == "t");
    CHECK(back.task == TaskKind::GallerySwiping);
    CHECK(back.mixed == r.mixed);
    CHECK(back.skilled == r.skilled);
    CHECK(back.genuine_count == r.genuine_count);
    CHECK(comparison_list_to_json(list).find("\"labels\"") == std::string::npos);
    CHECK_THROWS_AS(comparison_list_from_json("{\"task\": 3}"), Error);
}
