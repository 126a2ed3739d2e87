#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bbauth/dataset.hpp"

namespace bbauth::protocol {

enum class Label { Genuine, RandomImpostor, SkilledImpostor };

std::string_view to_string(Label label);

struct Comparison {
    std::string id;
    TaskKind task = TaskKind::Keystroke;
    std::array<std::string, 2> enroll;
    std::string verify;

    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct ComparisonList {
    TaskKind task = TaskKind::Keystroke;
    std::vector<Comparison> comparisons;

    friend bool operator==(const ComparisonList&, const ComparisonList&) = default;
};

struct KeyFile {
    std::map<std::string, Label> labels;

    friend bool operator==(const KeyFile&, const KeyFile&) = default;
};

struct RandomPolicy {
    bool sample = false;
    std::size_t k = 0;

    static RandomPolicy all() { return {}; }
    static RandomPolicy sample_k(std::size_t k) { return {true, k}; }
    /// "all" or "sample:<k>". Throws ConfigInvalid.
    static RandomPolicy parse(std::string_view text);
};

/// Per device: enrollment pair vs. each verification session (genuine), vs.
/// each skilled session (skilled), and vs. other devices' verification
/// sessions (random). Ids are random tokens; list order is shuffled.
/// Throws IncompleteDevice.
std::pair<ComparisonList, KeyFile> build_comparisons(const DatasetSplit& split, TaskKind task, std::uint64_t seed,
                                                     RandomPolicy policy = RandomPolicy::all());

// ---------------------------------------------------------------------------
// AUC

/// Mann-Whitney counts: wins count 2, ties 1, over 2 * |G| * |I|.
struct AucCounts {
    std::uint64_t numerator = 0;    // 2 * #(g > i) + #(g == i)
    std::uint64_t denominator = 0;  // 2 * |G| * |I|

    double value() const {
        return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    friend bool operator==(const AucCounts&, const AucCounts&) = default;
};

/// Exact pair counting in O((n + m) log(n + m)). Throws EmptyDistribution.
AucCounts auc_counts(std::span<const double> genuine, std::span<const double> impostor);
double auc(std::span<const double> genuine, std::span<const double> impostor);

/// True when a's AUC is strictly greater than b's (exact rational compare).
bool auc_greater(const AucCounts& a, const AucCounts& b);

// ---------------------------------------------------------------------------
// Score files and grading

struct ScoreFile {
    std::vector<std::pair<std::string, double>> entries;
    std::vector<std::string> warnings;
};

/// CSV with header "comparison_id,score". Out-of-range scores are clamped to
/// [0,1] with a warning. Throws MalformedScoreFile, NonFiniteScore.
ScoreFile parse_score_file(std::string_view text);
std::string write_score_file(std::span<const std::pair<std::string, double>> entries);

struct GradeReport {
    std::string team;
    TaskKind task = TaskKind::Keystroke;
    AucCounts mixed;
    AucCounts random;
    AucCounts skilled;
    std::size_t genuine_count = 0;
    std::size_t random_count = 0;
    std::size_t skilled_count = 0;
    std::vector<std::string> diagnostics;

    static double percent(const AucCounts& c);
    double auc_mixed() const { return percent(mixed); }
    double auc_random() const { return percent(random); }
    double auc_skilled() const { return percent(skilled); }
};

/// Throws MissingScore (listing ids), DuplicateScore, NonFiniteScore,
/// EmptyDistribution. Unknown ids are reported in diagnostics.
GradeReport grade(const ScoreFile& scores, const KeyFile& key, TaskKind task, std::string team = "submission");

struct LeaderboardRow {
    std::size_t position = 0;
    std::string team;
    GradeReport report;
};

/// Descending mixed AUC; ties by team name. Only reports for `task` are ranked.
std::vector<LeaderboardRow> rank(std::span<const GradeReport> reports, TaskKind task);

std::string task_title(TaskKind task);

/// Aligned text table with the columns #, Team, Mixed, Random, Skilled AUC [%].
std::string format_table(TaskKind task, std::span<const LeaderboardRow> rows);

// ---------------------------------------------------------------------------
// JSON files

std::string comparison_list_to_json(const ComparisonList& list);
ComparisonList comparison_list_from_json(std::string_view text);
std::string key_file_to_json(const KeyFile& key);
KeyFile key_file_from_json(std::string_view text);
std::string grade_report_to_json(const GradeReport& report);
GradeReport grade_report_from_json(std::string_view text);

}  // namespace bbauth::protocol
