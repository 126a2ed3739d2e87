#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "bbauth/dataset.hpp"

namespace bbauth::keystroke {

using Ngram = std::vector<int>;

struct NgramStats {
    std::size_t occurrences = 0;
    double total_duration = 0.0;  // ms, summed over occurrences

    double mean_duration() const {
        return occurrences == 0 ? 0.0 : total_duration / static_cast<double>(occurrences);
    }
};

/// Occurrence count and mean typing time per distinct n-gram. `sessions`
/// counts how many sessions were pooled into the table.
struct NgramTable {
    int n = 2;
    std::size_t sessions = 1;
    std::map<Ngram, NgramStats> entries;

    bool empty() const { return entries.empty(); }
    /// Occurrences per pooled session.
    double rate(const Ngram& g) const;
};

using OrderedNgramList = std::vector<Ngram>;

/// Every window of n consecutive key presses; duration = last - first stamp.
NgramTable extract_ngrams(std::span<const KeystrokeEvent> events, int n);

/// Merges per-session tables without forming windows across session borders.
NgramTable pool_tables(std::span<const NgramTable> tables);

/// Ascending mean duration, then descending occurrences, then code order.
OrderedNgramList order_ngrams(const NgramTable& table);

/// Restricts `list` to the n-grams present in `keep`, preserving order.
OrderedNgramList restrict_to(const OrderedNgramList& list, const std::vector<Ngram>& keep);

/// Normalized rank displacement between two orderings of the same set.
/// Throws EmptyIntersection for empty lists, InvalidArgument if the sets differ.
double degree_of_disorder(const OrderedNgramList& a, const OrderedNgramList& b);

/// Shared n-grams with combined per-session occurrence >= min_occurrences,
/// over the union of n-grams. Throws BothEmpty.
double availability(const NgramTable& enroll, const NgramTable& verify, double min_occurrences = 3.0);

struct ScoreOptions {
    /// Keep only the top_k shared n-grams by combined occurrence; 0 keeps all.
    std::size_t top_k = 0;
    double min_occurrences = 3.0;
};

struct ScoreBreakdown {
    double similarity[2] = {0.0, 0.0};    // n = 2, 3
    double availability[2] = {0.0, 0.0};  // n = 2, 3
    double score = 0.0;
};

ScoreBreakdown keystroke_score_detail(std::span<const Session* const> enroll, const Session& verify,
                                      const ScoreOptions& options = {});

/// Mean over n in {2,3} of (1 - disorder + availability) / 2. Throws NoKeystrokeData.
double keystroke_score(std::span<const Session* const> enroll, const Session& verify,
                       const ScoreOptions& options = {});

}  // namespace bbauth::keystroke
