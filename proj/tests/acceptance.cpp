// Acceptance runner: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbauth/dataset.hpp"
#include "bbauth/dwt.hpp"
#include "bbauth/error.hpp"
#include "bbauth/keystroke.hpp"
#include "bbauth/pipeline.hpp"
#include "bbauth/protocol.hpp"
#include "bbauth/rng.hpp"
#include "bbauth/siamese.hpp"
#include "bbauth/softdtw.hpp"
#include "bbauth/synthgen.hpp"

using namespace bbauth;

namespace {

struct Failure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome = Outcome::Pass;
    std::string detail;
};

Verdict pass(std::string detail = {}) { return {Outcome::Pass, std::move(detail)}; }
Verdict skip(std::string detail) { return {Outcome::Skip, std::move(detail)}; }

// ---------------------------------------------------------------------------
// 1. AUC

/// Pair counting over every (genuine, impostor) pair; wins count 2, ties 1.
std::pair<std::uint64_t, std::uint64_t> brute_pairs(const std::vector<double>& g, const std::vector<double>& i) {
    std::uint64_t num = 0;
    for (double a : g) {
        for (double b : i) num += a > b ? 2 : (a == b ? 1 : 0);
    }
    return {num, 2 * static_cast<std::uint64_t>(g.size()) * i.size()};
}

std::vector<double> random_scores(Rng& rng, std::size_t n, bool coarse) {
    std::vector<double> v(n);
    // coarse grids force ties
    for (auto& x : v) x = coarse ? static_cast<double>(rng.below(6)) / 5.0 : rng.uniform(0, 1);
    return v;
}

Verdict criterion_auc() {
    struct Example {
        std::vector<double> g, i;
        double want;
    };
    const std::vector<Example> examples = {
        {{0.9, 0.8}, {0.2, 0.3}, 1.0},
        {{0.6, 0.4}, {0.5, 0.5}, 0.5},
        {{0.7, 0.5}, {0.5, 0.6}, 0.625},
    };
    for (const auto& e : examples) require(protocol::auc(e.g, e.i) == e.want, "worked example");

    Rng rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto g = random_scores(rng, 1 + rng.below(50), trial % 2 == 0);
        const auto i = random_scores(rng, 1 + rng.below(50), trial % 2 == 0);
        const auto c = protocol::auc_counts(g, i);
        const auto [num, den] = brute_pairs(g, i);
        require(c.numerator == num && c.denominator == den, "pair counts differ on trial " + std::to_string(trial));
    }
    return pass("1000 random sets and 3 examples");
}

// ---------------------------------------------------------------------------
// 2. Grading

Verdict criterion_grading() {
    Rng rng(2002);
    for (int trial = 0; trial < 100; ++trial) {
        protocol::KeyFile key;
        protocol::ScoreFile scores;
        const std::size_t n = 3 + rng.below(60);
        for (std::size_t k = 0; k < n; ++k) {
            const std::string id = "c" + std::to_string(k);
            // the first three cover every label
            const auto label = static_cast<protocol::Label>(k < 3 ? k : rng.below(3));
            key.labels[id] = label;
            scores.entries.emplace_back(id, static_cast<double>(rng.below(11)) / 10.0);
        }
        const auto rep = protocol::grade(scores, key, TaskKind::Tapping);
        require(rep.mixed.numerator == rep.random.numerator + rep.skilled.numerator, "mixed numerator");
        require(rep.mixed.denominator == rep.random.denominator + rep.skilled.denominator, "mixed denominator");
    }

    protocol::KeyFile key;
    protocol::ScoreFile perfect, ties;
    for (int k = 0; k < 12; ++k) {
        const std::string id = "c" + std::to_string(k);
        const auto label = static_cast<protocol::Label>(k % 3);
        key.labels[id] = label;
        perfect.entries.emplace_back(id, label == protocol::Label::Genuine ? 0.9 : 0.1 + 0.01 * k);
        ties.entries.emplace_back(id, 0.5);
    }
    const auto top = protocol::grade(perfect, key, TaskKind::Keystroke);
    const auto flat = protocol::grade(ties, key, TaskKind::Keystroke);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", top.auc_mixed());
    require(std::string(buf) == "100.00", "perfect separation gives " + std::string(buf));
    std::snprintf(buf, sizeof buf, "%.2f", flat.auc_mixed());
    require(std::string(buf) == "50.00", "all ties give " + std::string(buf));
    return pass("100 random key files, 100.00 and 50.00");
}

// ---------------------------------------------------------------------------
// 3. Degree of disorder

int displacement(const std::vector<int>& p) {
    int sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(static_cast<int>(i) - p[i]);
    return sum;
}

Verdict criterion_disorder() {
    using keystroke::OrderedNgramList;
    auto list = [](const std::string& s) {
        OrderedNgramList out;
        for (char c : s) out.push_back({c});
        return out;
    };
    require(keystroke::degree_of_disorder(list("ABC"), list("ABC")) == 0.0, "identical lists");
    require(keystroke::degree_of_disorder(list("ABCD"), list("DCBA")) == 1.0, "reversed list");
    require(keystroke::degree_of_disorder(list("ABCD"), list("BADC")) == 0.5, "swapped pairs");

    std::size_t checked = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        int max_d = 0;
        do max_d = std::max(max_d, displacement(perm));
        while (std::next_permutation(perm.begin(), perm.end()));

        OrderedNgramList base;
        for (std::size_t i = 0; i < n; ++i) base.push_back({static_cast<int>(i)});
        do {
            OrderedNgramList other(n);
            for (std::size_t i = 0; i < n; ++i) other[static_cast<std::size_t>(perm[i])] = base[i];
            const double want = max_d == 0 ? 0.0 : static_cast<double>(displacement(perm)) / max_d;
            require(keystroke::degree_of_disorder(base, other) == want, "permutation mismatch at n=" + std::to_string(n));
            ++checked;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return pass(std::to_string(checked) + " permutations");
}

// ---------------------------------------------------------------------------
// 4. DWT

Verdict criterion_dwt() {
    const auto& filter = dwt::coif1();
    Rng rng(4004);
    double worst_energy = 0, worst_rec = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 8 + rng.below(505);
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-1, 1);
        const auto pair = dwt::dwt_level1(x, filter);
        double ex = 0, ec = 0;
        for (double v : x) ex += v * v;
        for (double v : pair.approx) ec += v * v;
        for (double v : pair.detail) ec += v * v;
        worst_energy = std::max(worst_energy, std::abs(ex - ec));
        const auto back = dwt::idwt_level1(pair, filter, n);
        require(back.size() == n, "reconstruction length");
        for (std::size_t i = 0; i < n; ++i) worst_rec = std::max(worst_rec, std::abs(back[i] - x[i]));
    }
    require(worst_energy < 1e-9, "energy error " + std::to_string(worst_energy));
    require(worst_rec < 1e-9, "reconstruction error " + std::to_string(worst_rec));

    double worst_detail = 0;
    // periodic extension is exact only for even lengths; odd lengths get one zero sample
    for (std::size_t n : {4u, 8u, 34u, 64u, 250u, 512u}) {
        const std::vector<double> c(n, 3.7);
        for (double d : dwt::dwt_level1(c, filter).detail) worst_detail = std::max(worst_detail, std::abs(d));
    }
    require(worst_detail < 1e-10, "constant detail " + std::to_string(worst_detail));
    char buf[128];
    std::snprintf(buf, sizeof buf, "energy %.1e, reconstruction %.1e, constant detail %.1e", worst_energy, worst_rec,
                  worst_detail);
    return pass(buf);
}

// ---------------------------------------------------------------------------
// 5. Soft-DTW

using softdtw::Sequence;

double local_cost(const std::vector<double>& a, const std::vector<double>& b) {
    double c = 0;
    for (std::size_t k = 0; k < a.size(); ++k) c += (a[k] - b[k]) * (a[k] - b[k]);
    return c;
}

void walk(const Sequence& x, const Sequence& y, std::size_t i, std::size_t j, double acc, double& best) {
    acc += local_cost(x[i], y[j]);
    if (acc >= best) return;
    if (i + 1 == x.size() && j + 1 == y.size()) {
        best = acc;
        return;
    }
    if (i + 1 < x.size() && j + 1 < y.size()) walk(x, y, i + 1, j + 1, acc, best);
    if (i + 1 < x.size()) walk(x, y, i + 1, j, acc, best);
    if (j + 1 < y.size()) walk(x, y, i, j + 1, acc, best);
}

/// Minimum cost over every monotone alignment path.
double exhaustive_dtw(const Sequence& x, const Sequence& y) {
    double best = std::numeric_limits<double>::infinity();
    walk(x, y, 0, 0, 0.0, best);
    return best;
}

Sequence parse_sequence(const nlohmann::json& j) {
    Sequence s;
    for (const auto& row : j) s.push_back(row.get<std::vector<double>>());
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Failure{"cannot read " + p.string()};
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Verdict criterion_softdtw() {
    Rng rng(5005);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t dim = 1 + rng.below(3);
        auto make = [&](std::size_t len) {
            Sequence s(len, std::vector<double>(dim));
            for (auto& v : s) {
                for (auto& x : v) x = rng.normal();
            }
            return s;
        };
        const auto x = make(1 + rng.below(8));
        const auto y = make(1 + rng.below(8));
        const double hard = softdtw::dtw(x, y);
        for (double gamma : {1.0, 0.1, 0.01}) {
            require(softdtw::soft_dtw(x, y, gamma) <= hard, "soft above hard on trial " + std::to_string(trial));
        }
    }

    const auto doc = nlohmann::json::parse(slurp(std::filesystem::path(BBAUTH_FIXTURE_DIR) / "dtw_pairs.json"));
    double worst_limit = 0;
    for (const auto& p : doc.at("pairs")) {
        const auto x = parse_sequence(p.at("x"));
        const auto y = parse_sequence(p.at("y"));
        worst_limit = std::max(worst_limit, std::abs(softdtw::soft_dtw(x, y, 1e-3) - softdtw::dtw(x, y)));
    }
    require(worst_limit < 1e-2, "gamma 1e-3 gap " + std::to_string(worst_limit));

    std::vector<Sequence> all;
    for (std::size_t len = 1; len <= 5; ++len) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i) total *= 3;
        for (std::size_t code = 0; code < total; ++code) {
            Sequence s;
            for (std::size_t i = 0, c = code; i < len; ++i, c /= 3) s.push_back({static_cast<double>(c % 3)});
            all.push_back(std::move(s));
        }
    }
    for (const auto& x : all) {
        for (const auto& y : all) require(softdtw::dtw(x, y) == exhaustive_dtw(x, y), "dtw differs from enumeration");
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "500 random pairs, fixture gap %.1e, %zu exhaustive pairs", worst_limit,
                  all.size() * all.size());
    return pass(buf);
}

// ---------------------------------------------------------------------------
// 6. Gradient gate

Verdict criterion_gradient() {
    const std::vector<std::size_t> layers = {5, 4};
    siamese::TrainConfig cfg;
    double worst = 0, caught = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto params = siamese::init_network(3, seed, layers);
        // fixed gate configuration, shared with the unit suite
        Rng rng(seed + 10);
        siamese::PairSet batch;
        for (int i = 0; i < 4; ++i) {
            std::vector<double> a(3), b(3);
            for (auto& v : a) v = rng.normal();
            for (auto& v : b) v = rng.normal();
            batch.push_back({a, b, i % 2});
        }
        worst = std::max(worst, siamese::grad_check(params, batch, cfg));
        siamese::GradCheckOptions corrupt;
        corrupt.corrupt_sign = true;
        caught = std::min(caught, siamese::grad_check(params, batch, cfg, corrupt));
    }
    require(worst < 1e-4, "max relative error " + std::to_string(worst));
    require(caught > 0.1, "corrupted gradient error " + std::to_string(caught));
    char buf[96];
    std::snprintf(buf, sizeof buf, "max relative error %.1e, corrupted %.2f", worst, caught);
    return pass(buf);
}

// ---------------------------------------------------------------------------
// 7 and 8. Synthetic benchmark

struct Run {
    pipeline::MatcherKind matcher;
    TaskKind task;
};

protocol::GradeReport benchmark(const synth::GeneratedData& data, const Run& r, std::uint64_t seed,
                                std::vector<std::pair<std::string, double>>* scores_out = nullptr) {
    const auto& proto = data.evaluation_protocol.at(r.task);
    auto matcher = pipeline::make_matcher(r.matcher, r.task, pipeline::MatcherParams{}, seed);
    const auto run = pipeline::run_matcher(*matcher, data.train, data.evaluation, proto.comparisons);
    if (scores_out) *scores_out = run.scores;
    protocol::ScoreFile file;
    file.entries = run.scores;
    return protocol::grade(file, proto.key, r.task, std::string(pipeline::to_string(r.matcher)));
}

Verdict criterion_benchmark() {
    const synth::GenConfig cfg;
    const auto data = synth::generate_dataset(cfg);
    const auto again = synth::generate_dataset(cfg);
    for (auto pair : {std::pair{&data.train, &again.train}, std::pair{&data.evaluation, &again.evaluation}}) {
        require(serialize_dataset(*pair.first) == serialize_dataset(*pair.second), "regenerated data differs");
    }
    using pipeline::MatcherKind;
    struct Target {
        Run run;
        double floor;
    };
    const std::vector<Target> targets = {
        {{MatcherKind::KeystrokeNgram, TaskKind::Keystroke}, 75.0},
        {{MatcherKind::Siamese, TaskKind::TextReading}, 65.0},
        {{MatcherKind::SwipeTemplate, TaskKind::GallerySwiping}, 65.0},
        {{MatcherKind::DwtDistance, TaskKind::GallerySwiping}, 65.0},
        {{MatcherKind::SoftDtw, TaskKind::Tapping}, 65.0},
    };
    std::ostringstream detail;
    for (const auto& t : targets) {
        std::vector<std::pair<std::string, double>> first, second;
        const auto rep = benchmark(data, t.run, cfg.seed, &first);
        benchmark(again, t.run, cfg.seed, &second);
        const std::string name = std::string(pipeline::to_string(t.run.matcher)) + "/" + std::string(to_string(t.run.task));
        require(first == second, name + " rerun is not bitwise identical");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s %.2f", name.c_str(), rep.auc_mixed());
        detail << (detail.tellp() > 0 ? ", " : "") << buf;
        require(rep.auc_mixed() >= t.floor, name + " mixed AUC below floor: " + buf);
    }
    return pass(detail.str());
}

Verdict criterion_asymmetry() {
    using pipeline::MatcherKind;
    const std::vector<Run> designated = {
        {MatcherKind::KeystrokeNgram, TaskKind::Keystroke},
        {MatcherKind::Siamese, TaskKind::TextReading},
        {MatcherKind::DwtDistance, TaskKind::GallerySwiping},
        {MatcherKind::SoftDtw, TaskKind::Tapping},
    };
    std::map<TaskKind, double> random_sum, skilled_sum;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synth::GenConfig cfg;
        cfg.seed = seed;
        const auto data = synth::generate_dataset(cfg);
        for (const auto& r : designated) {
            const auto rep = benchmark(data, r, seed);
            random_sum[r.task] += rep.auc_random();
            skilled_sum[r.task] += rep.auc_skilled();
        }
    }
    std::size_t holds = 0;
    std::ostringstream detail;
    for (const auto& r : designated) {
        const double ra = random_sum[r.task] / 5.0, sa = skilled_sum[r.task] / 5.0;
        holds += ra >= sa ? 1 : 0;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s random %.2f skilled %.2f", std::string(to_string(r.task)).c_str(), ra, sa);
        detail << (detail.tellp() > 0 ? ", " : "") << buf;
    }
    require(holds >= 3, "random >= skilled on only " + std::to_string(holds) + " tasks: " + detail.str());
    return pass(std::to_string(holds) + "/4 tasks; " + detail.str());
}

// ---------------------------------------------------------------------------
// 9. Format compliance

Verdict criterion_format() {
    const std::filesystem::path fixtures(BBAUTH_FIXTURE_DIR);
    const auto minimal = load_dataset((fixtures / "minimal_validation.json").string(), SplitKind::Validation);
    require(minimal.sessions.size() == 1, "minimal document session count");
    require(parse_dataset(serialize_dataset(minimal), SplitKind::Validation).same_data(minimal), "minimal round trip");

    synth::GenConfig cfg;
    cfg.users = 2;
    const auto data = synth::generate_dataset(cfg);
    const std::pair<const DatasetSplit*, SplitKind> splits[] = {
        {&data.train, SplitKind::Train}, {&data.validation, SplitKind::Validation}, {&data.evaluation, SplitKind::Evaluation}};
    ParseOptions strict;
    strict.strict_counts = true;
    for (const auto& [split, kind] : splits) {
        const auto text = serialize_dataset(*split);
        const auto back = parse_dataset(text, kind, strict);
        require(back.same_data(*split), "synthetic round trip");
        require(back.warnings.empty(), "synthetic round trip warnings");
        require(serialize_dataset(back) == text, "reserialization differs");
    }

    std::size_t malformed = 0;
    for (const auto& entry : std::filesystem::directory_iterator(fixtures / "malformed")) {
        const auto name = entry.path().filename().string();
        const auto expected = name.substr(0, name.find('-'));
        bool raised = false;
        try {
            load_dataset(entry.path().string(), SplitKind::Validation);
        } catch (const Error& e) {
            raised = true;
            require(to_string(e.code()) == expected, name + " raised " + std::string(to_string(e.code())));
        }
        require(raised, name + " was accepted");
        ++malformed;
    }
    require(malformed >= 8, "malformed fixtures missing");
    return pass("minimal and synthetic round trips, " + std::to_string(malformed) + " malformed fixtures");
}

// ---------------------------------------------------------------------------
// 10. Real data

Verdict criterion_real_data() {
    const char* dir = std::getenv("BBAUTH_REAL_DATA_DIR");
    if (dir == nullptr || *dir == '\0' || !std::filesystem::exists(std::filesystem::path(dir) / "train.json")) {
        return skip("real dataset not present (set BBAUTH_REAL_DATA_DIR)");
    }
    const std::filesystem::path root(dir);
    const auto train = load_dataset((root / "train.json").string(), SplitKind::Train);
    const auto validation = load_dataset((root / "validation.json").string(), SplitKind::Validation);
    for (const DatasetSplit* split : {&train, &validation}) {
        for (const auto& s : split->sessions) require(validate_session(s).ok(), "invariant finding in " + s.session_id);
    }
    const auto [list, key] = protocol::build_comparisons(validation, TaskKind::Keystroke, 1);
    auto matcher = pipeline::make_matcher(pipeline::MatcherKind::KeystrokeNgram, TaskKind::Keystroke, {}, 1);
    const auto run = pipeline::run_matcher(*matcher, train, validation, list);
    protocol::ScoreFile file;
    file.entries = run.scores;
    const auto rep = protocol::grade(file, key, TaskKind::Keystroke);
    require(rep.genuine_count > 0 && rep.random_count > 0 && rep.skilled_count > 0, "incomplete grade report");
    const auto back = protocol::grade_report_from_json(protocol::grade_report_to_json(rep));
    require(back.mixed == rep.mixed, "grade report round trip");
    char buf[64];
    std::snprintf(buf, sizeof buf, "keystroke mixed AUC %.2f", rep.auc_mixed());
    return pass(buf);
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        double budget_seconds;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria = {
        {1, "AUC oracle equivalence", 5, criterion_auc},
        {2, "grader semantics", 5, criterion_grading},
        {3, "degree-of-disorder oracle", 1, criterion_disorder},
        {4, "DWT numerical identities", 2, criterion_dwt},
        {5, "soft-DTW limits", 10, criterion_softdtw},
        {6, "gradient gate", 5, criterion_gradient},
        {7, "end-to-end synthetic benchmark", 120, criterion_benchmark},
        {8, "random vs skilled asymmetry", 600, criterion_asymmetry},
        {9, "format compliance", 1, criterion_format},
        {10, "real-data smoke test", 600, criterion_real_data},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const Failure& f) {
            v = {Outcome::Fail, f.what};
        } catch (const std::exception& e) {
            v = {Outcome::Fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (v.outcome == Outcome::Pass && secs >= c.budget_seconds) {
            v = {Outcome::Fail, "over time budget; " + v.detail};
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Skip ? "SKIP" : "FAIL";
        std::printf("[%s] %2d %s (%.2f s / %.0f s): %s\n", tag, c.number, c.name, secs, c.budget_seconds,
                    v.detail.c_str());
        std::fflush(stdout);
        failures += v.outcome == Outcome::Fail ? 1 : 0;
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
