#include "bbauth/keystroke.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "bbauth/error.hpp"

namespace bbauth::keystroke {

double NgramTable::rate(const Ngram& g) const {
    auto it = entries.find(g);
    if (it == entries.end()) return 0.0;
    return static_cast<double>(it->second.occurrences) / static_cast<double>(std::max<std::size_t>(1, sessions));
}

NgramTable extract_ngrams(std::span<const KeystrokeEvent> events, int n) {
    if (n != 2 && n != 3) throw Error(ErrorCode::InvalidArgument, "n-gram order must be 2 or 3");
    NgramTable table;
    table.n = n;
    const auto width = static_cast<std::size_t>(n);
    if (events.size() < width) return table;
    Ngram key(width);
    for (std::size_t i = 0; i + width <= events.size(); ++i) {
        for (std::size_t k = 0; k < width; ++k) key[k] = events[i + k].ascii_code;
        auto& stats = table.entries[key];
        ++stats.occurrences;
        stats.total_duration += static_cast<double>(events[i + width - 1].timestamp - events[i].timestamp);
    }
    return table;
}

NgramTable pool_tables(std::span<const NgramTable> tables) {
    NgramTable out;
    if (tables.empty()) return out;
    out.n = tables.front().n;
    out.sessions = 0;
    for (const auto& t : tables) {
        out.sessions += t.sessions;
        for (const auto& [g, s] : t.entries) {
            auto& dst = out.entries[g];
            dst.occurrences += s.occurrences;
            dst.total_duration += s.total_duration;
        }
    }
    return out;
}

OrderedNgramList order_ngrams(const NgramTable& table) {
    struct Item {
        const Ngram* g;
        double mean;
        std::size_t count;
    };
    std::vector<Item> items;
    items.reserve(table.entries.size());
    for (const auto& [g, s] : table.entries) items.push_back({&g, s.mean_duration(), s.occurrences});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.mean != b.mean) return a.mean < b.mean;
        if (a.count != b.count) return a.count > b.count;
        return *a.g < *b.g;
    });
    OrderedNgramList out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(*it.g);
    return out;
}

OrderedNgramList restrict_to(const OrderedNgramList& list, const std::vector<Ngram>& keep) {
    const std::set<Ngram> wanted(keep.begin(), keep.end());
    OrderedNgramList out;
    for (const auto& g : list) {
        if (wanted.contains(g)) out.push_back(g);
    }
    return out;
}

double degree_of_disorder(const OrderedNgramList& a, const OrderedNgramList& b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyIntersection, "no common n-grams");
    if (a.size() != b.size()) {
        throw Error(ErrorCode::InvalidArgument, "orderings must cover the same n-gram set");
    }
    std::map<Ngram, std::size_t> rank_b;
    for (std::size_t i = 0; i < b.size(); ++i) rank_b.emplace(b[i], i);
    if (rank_b.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "duplicate n-gram in ordering");

    const std::size_t v = a.size();
    std::size_t disorder = 0;
    for (std::size_t i = 0; i < v; ++i) {
        auto it = rank_b.find(a[i]);
        if (it == rank_b.end()) {
            throw Error(ErrorCode::InvalidArgument, "orderings must cover the same n-gram set");
        }
        disorder += i > it->second ? i - it->second : it->second - i;
    }
    if (v == 1) return 0.0;
    const std::size_t max_disorder = v % 2 == 0 ? v * v / 2 : (v * v - 1) / 2;
    return static_cast<double>(disorder) / static_cast<double>(max_disorder);
}

double availability(const NgramTable& enroll, const NgramTable& verify, double min_occurrences) {
    if (enroll.empty() && verify.empty()) throw Error(ErrorCode::BothEmpty, "both n-gram tables are empty");
    std::size_t union_size = enroll.entries.size();
    std::size_t common = 0;
    for (const auto& [g, s] : verify.entries) {
        auto it = enroll.entries.find(g);
        if (it == enroll.entries.end()) {
            ++union_size;
            continue;
        }
        if (enroll.rate(g) + verify.rate(g) >= min_occurrences) ++common;
    }
    return static_cast<double>(common) / static_cast<double>(union_size);
}

namespace {

std::vector<Ngram> shared_ngrams(const NgramTable& a, const NgramTable& b, std::size_t top_k) {
    std::vector<std::pair<double, Ngram>> shared;
    for (const auto& [g, s] : a.entries) {
        if (b.entries.contains(g)) shared.emplace_back(a.rate(g) + b.rate(g), g);
    }
    if (top_k > 0 && shared.size() > top_k) {
        std::stable_sort(shared.begin(), shared.end(),
                         [](const auto& x, const auto& y) { return x.first > y.first; });
        shared.resize(top_k);
    }
    std::vector<Ngram> out;
    out.reserve(shared.size());
    for (auto& [rate, g] : shared) out.push_back(std::move(g));
    return out;
}

}  // namespace

ScoreBreakdown keystroke_score_detail(std::span<const Session* const> enroll, const Session& verify,
                                      const ScoreOptions& options) {
    auto has_keys = [](const Session& s) { return s.streams.keystroke && !s.streams.keystroke->empty(); };
    if (enroll.empty()) throw Error(ErrorCode::NoKeystrokeData, "no enrollment sessions");
    for (const Session* s : enroll) {
        if (!has_keys(*s)) throw Error(ErrorCode::NoKeystrokeData, "session " + s->session_id);
    }
    if (!has_keys(verify)) throw Error(ErrorCode::NoKeystrokeData, "session " + verify.session_id);

    ScoreBreakdown out;
    double total = 0.0;
    for (int n : {2, 3}) {
        std::vector<NgramTable> per_session;
        per_session.reserve(enroll.size());
        for (const Session* s : enroll) per_session.push_back(extract_ngrams(*s->streams.keystroke, n));
        const NgramTable e = pool_tables(per_session);
        const NgramTable v = extract_ngrams(*verify.streams.keystroke, n);

        const std::size_t idx = static_cast<std::size_t>(n - 2);
        double sim = 0.0;
        const auto shared = shared_ngrams(e, v, options.top_k);
        if (!shared.empty()) {
            sim = 1.0 - degree_of_disorder(restrict_to(order_ngrams(e), shared),
                                           restrict_to(order_ngrams(v), shared));
        }
        double avail = 0.0;
        if (!e.empty() || !v.empty()) avail = availability(e, v, options.min_occurrences);
        out.similarity[idx] = sim;
        out.availability[idx] = avail;
        total += 0.5 * (sim + avail);
    }
    out.score = total / 2.0;
    return out;
}

double keystroke_score(std::span<const Session* const> enroll, const Session& verify,
                       const ScoreOptions& options) {
    return keystroke_score_detail(enroll, verify, options).score;
}

}  // namespace bbauth::keystroke
