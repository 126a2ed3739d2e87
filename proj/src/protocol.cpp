#include "bbauth/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bbauth/error.hpp"
#include "bbauth/rng.hpp"

namespace bbauth::protocol {

using nlohmann::json;

std::string_view to_string(Label label) {
    switch (label) {
        case Label::Genuine: return "genuine";
        case Label::RandomImpostor: return "random";
        case Label::SkilledImpostor: return "skilled";
    }
    return "?";
}

RandomPolicy RandomPolicy::parse(std::string_view text) {
    if (text == "all") return all();
    constexpr std::string_view prefix = "sample:";
    if (text.starts_with(prefix)) {
        const auto digits = text.substr(prefix.size());
        std::size_t k = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && k > 0) return sample_k(k);
    }
    throw Error(ErrorCode::ConfigInvalid, "random policy must be 'all' or 'sample:<k>', got '" + std::string(text) + "'");
}

namespace {

std::string token(Rng& rng, std::set<std::string>& used) {
    for (;;) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "c%012llx",
                      static_cast<unsigned long long>(rng.next_u64() & 0xffffffffffffULL));
        if (used.insert(buf).second) return buf;
    }
}

}  // namespace

std::pair<ComparisonList, KeyFile> build_comparisons(const DatasetSplit& split, TaskKind task, std::uint64_t seed,
                                                     RandomPolicy policy) {
    struct DeviceSessions {
        std::vector<const Session*> enroll, verify, skilled;
    };
    std::map<std::string, DeviceSessions> devices;
    for (const auto& s : split.sessions) {
        if (s.task != task) continue;
        auto& d = devices[s.device_id];
        switch (s.role) {
            case SessionRole::GenuineEnroll: d.enroll.push_back(&s); break;
            case SessionRole::GenuineVerify: d.verify.push_back(&s); break;
            case SessionRole::SkilledImpostor: d.skilled.push_back(&s); break;
            case SessionRole::Unlabeled:
                throw Error(ErrorCode::IncompleteDevice,
                            "device " + s.device_id + ": session " + s.session_id + " has no role label");
        }
    }
    for (const auto& [id, d] : devices) {
        if (d.enroll.size() != 2 || d.verify.size() != 2 || d.skilled.size() != 2) {
            throw Error(ErrorCode::IncompleteDevice,
                        "device " + id + " has " + std::to_string(d.enroll.size()) + " enroll, " +
                            std::to_string(d.verify.size()) + " verify, " + std::to_string(d.skilled.size()) +
                            " skilled sessions for task " + std::string(to_string(task)) + " (expected 2/2/2)");
        }
    }

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(task) + 1));
    struct Pending {
        Comparison c;
        Label label;
    };
    std::vector<Pending> pending;
    for (const auto& [id, d] : devices) {
        const std::array<std::string, 2> enroll = {d.enroll[0]->session_id, d.enroll[1]->session_id};
        for (const Session* v : d.verify) pending.push_back({{"", task, enroll, v->session_id}, Label::Genuine});
        for (const Session* v : d.skilled) pending.push_back({{"", task, enroll, v->session_id}, Label::SkilledImpostor});

        std::vector<const Session*> others;
        for (const auto& [other_id, od] : devices) {
            if (other_id == id) continue;
            others.insert(others.end(), od.verify.begin(), od.verify.end());
        }
        if (policy.sample && policy.k < others.size()) {
            rng.shuffle(std::span<const Session*>(others));
            others.resize(policy.k);
            std::sort(others.begin(), others.end(),
                      [](const Session* a, const Session* b) { return a->session_id < b->session_id; });
        }
        for (const Session* v : others) pending.push_back({{"", task, enroll, v->session_id}, Label::RandomImpostor});
    }
    rng.shuffle(std::span<Pending>(pending));

    ComparisonList list;
    list.task = task;
    KeyFile key;
    std::set<std::string> used;
    for (auto& p : pending) {
        p.c.id = token(rng, used);
        key.labels[p.c.id] = p.label;
        list.comparisons.push_back(std::move(p.c));
    }
    return {std::move(list), std::move(key)};
}

// ---------------------------------------------------------------------------
// AUC

AucCounts auc_counts(std::span<const double> genuine, std::span<const double> impostor) {
    if (genuine.empty() || impostor.empty()) {
        throw Error(ErrorCode::EmptyDistribution, "AUC needs non-empty genuine and impostor scores");
    }
    std::vector<double> sorted(impostor.begin(), impostor.end());
    std::sort(sorted.begin(), sorted.end());
    AucCounts c;
    for (double g : genuine) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), g);
        const auto hi = std::upper_bound(lo, sorted.end(), g);
        c.numerator += 2 * static_cast<std::uint64_t>(lo - sorted.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    c.denominator = 2 * static_cast<std::uint64_t>(genuine.size()) * static_cast<std::uint64_t>(impostor.size());
    return c;
}

double auc(std::span<const double> genuine, std::span<const double> impostor) {
    return auc_counts(genuine, impostor).value();
}

bool auc_greater(const AucCounts& a, const AucCounts& b) {
    using u128 = unsigned __int128;
    return static_cast<u128>(a.numerator) * b.denominator > static_cast<u128>(b.numerator) * a.denominator;
}

// ---------------------------------------------------------------------------
// Score files

ScoreFile parse_score_file(std::string_view text) {
    ScoreFile out;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "comparison_id,score") {
                throw Error(ErrorCode::MalformedScoreFile, "line 1: expected header 'comparison_id,score'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || comma == 0) {
            throw Error(ErrorCode::MalformedScoreFile, "line " + std::to_string(line_no) + ": expected 'id,score'");
        }
        const std::string id(line.substr(0, comma));
        std::string value(line.substr(comma + 1));
        const auto first = value.find_first_not_of(" \t");
        const auto last = value.find_last_not_of(" \t");
        value = first == std::string::npos ? "" : value.substr(first, last - first + 1);
        double score = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), score);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw Error(ErrorCode::MalformedScoreFile,
                        "line " + std::to_string(line_no) + ": score '" + value + "' is not a number");
        }
        if (!std::isfinite(score)) {
            throw Error(ErrorCode::NonFiniteScore, "line " + std::to_string(line_no) + ": id " + id);
        }
        if (score < 0.0 || score > 1.0) {
            out.warnings.push_back("score for " + id + " outside [0,1] clamped");
            score = std::clamp(score, 0.0, 1.0);
        }
        out.entries.emplace_back(id, score);
    }
    if (!header_seen) throw Error(ErrorCode::MalformedScoreFile, "missing header");
    return out;
}

std::string write_score_file(std::span<const std::pair<std::string, double>> entries) {
    std::string out = "comparison_id,score\n";
    char buf[64];
    for (const auto& [id, score] : entries) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, score);
        out += id;
        out += ',';
        out.append(buf, ptr);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grading

double GradeReport::percent(const AucCounts& c) {
    return std::round(c.value() * 10000.0) / 100.0;
}

GradeReport grade(const ScoreFile& scores, const KeyFile& key, TaskKind task, std::string team) {
    GradeReport report;
    report.team = std::move(team);
    report.task = task;
    report.diagnostics = scores.warnings;

    std::map<std::string, double> by_id;
    for (const auto& [id, score] : scores.entries) {
        if (!std::isfinite(score)) throw Error(ErrorCode::NonFiniteScore, "comparison " + id);
        if (!by_id.emplace(id, score).second) throw Error(ErrorCode::DuplicateScore, "comparison " + id);
        if (!key.labels.contains(id)) report.diagnostics.push_back("unknown comparison id " + id + " ignored");
    }

    std::vector<double> genuine, random, skilled;
    std::vector<std::string> missing;
    for (const auto& [id, label] : key.labels) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            missing.push_back(id);
            continue;
        }
        switch (label) {
            case Label::Genuine: genuine.push_back(it->second); break;
            case Label::RandomImpostor: random.push_back(it->second); break;
            case Label::SkilledImpostor: skilled.push_back(it->second); break;
        }
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " comparison(s) without a score:";
        for (const auto& id : missing) msg += " " + id;
        throw Error(ErrorCode::MissingScore, msg);
    }

    report.genuine_count = genuine.size();
    report.random_count = random.size();
    report.skilled_count = skilled.size();
    report.random = auc_counts(genuine, random);
    report.skilled = auc_counts(genuine, skilled);
    std::vector<double> pooled = random;
    pooled.insert(pooled.end(), skilled.begin(), skilled.end());
    report.mixed = auc_counts(genuine, pooled);
    return report;
}

std::vector<LeaderboardRow> rank(std::span<const GradeReport> reports, TaskKind task) {
    std::vector<LeaderboardRow> rows;
    for (const auto& r : reports) {
        if (r.task == task) rows.push_back({0, r.team, r});
    }
    std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
        if (auc_greater(a.report.mixed, b.report.mixed)) return true;
        if (auc_greater(b.report.mixed, a.report.mixed)) return false;
        return a.team < b.team;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].position = i + 1;
    return rows;
}

std::string task_title(TaskKind task) {
    switch (task) {
        case TaskKind::Keystroke: return "Task 1 - Keystroke";
        case TaskKind::TextReading: return "Task 2 - Text Reading";
        case TaskKind::GallerySwiping: return "Task 3 - Gallery Swiping";
        case TaskKind::Tapping: return "Task 4 - Tapping";
    }
    return "?";
}

std::string format_table(TaskKind task, std::span<const LeaderboardRow> rows) {
    std::size_t team_w = 4;
    for (const auto& r : rows) team_w = std::max(team_w, r.team.size());
    std::ostringstream out;
    out << task_title(task) << '\n';
    out << std::left << std::setw(3) << "#" << " | " << std::setw(static_cast<int>(team_w)) << "Team"
        << " | Mixed AUC [%] | Random AUC [%] | Skilled AUC [%]\n";
    out << std::string(3, '-') << "-+-" << std::string(team_w, '-') << "-+---------------+----------------+----------------\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(3) << r.position << " | " << std::setw(static_cast<int>(team_w)) << r.team
            << " | " << std::right << std::fixed << std::setprecision(2) << std::setw(13) << r.report.auc_mixed()
            << " | " << std::setw(14) << r.report.auc_random() << " | " << std::setw(15) << r.report.auc_skilled()
            << '\n'
            << std::left;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::SchemaViolation, what); }

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

TaskKind task_field(const json& root) {
    if (!root.contains("task") || !root["task"].is_string()) bad("missing string field 'task'");
    auto t = parse_task(root["task"].get<std::string>());
    if (!t) bad("unknown task '" + root["task"].get<std::string>() + "'");
    return *t;
}

}  // namespace

std::string comparison_list_to_json(const ComparisonList& list) {
    nlohmann::ordered_json root;
    root["task"] = to_string(list.task);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : list.comparisons) {
        nlohmann::ordered_json js;
        js["id"] = c.id;
        js["enroll"] = {c.enroll[0], c.enroll[1]};
        js["verify"] = c.verify;
        arr.push_back(std::move(js));
    }
    root["comparisons"] = std::move(arr);
    return root.dump(1);
}

ComparisonList comparison_list_from_json(std::string_view text) {
    const json root = parse_json(text);
    if (!root.is_object()) bad("comparison list must be an object");
    ComparisonList list;
    list.task = task_field(root);
    if (!root.contains("comparisons") || !root["comparisons"].is_array()) bad("missing array 'comparisons'");
    for (const auto& js : root["comparisons"]) {
        if (!js.is_object() || !js.contains("id") || !js.contains("enroll") || !js.contains("verify")) {
            bad("comparison entries need id, enroll, verify");
        }
        const auto& e = js["enroll"];
        if (!js["id"].is_string() || !js["verify"].is_string() || !e.is_array() || e.size() != 2 ||
            !e[0].is_string() || !e[1].is_string()) {
            bad("malformed comparison entry");
        }
        list.comparisons.push_back({js["id"].get<std::string>(), list.task,
                                    {e[0].get<std::string>(), e[1].get<std::string>()},
                                    js["verify"].get<std::string>()});
    }
    return list;
}

std::string key_file_to_json(const KeyFile& key) {
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [id, label] : key.labels) labels[id] = to_string(label);
    nlohmann::ordered_json root;
    root["labels"] = std::move(labels);
    return root.dump(1);
}

KeyFile key_file_from_json(std::string_view text) {
    const json root = parse_json(text);
    if (!root.is_object() || !root.contains("labels") || !root["labels"].is_object()) bad("missing object 'labels'");
    KeyFile key;
    for (const auto& [id, v] : root["labels"].items()) {
        if (!v.is_string()) bad("label for " + id + " must be a string");
        const auto s = v.get<std::string>();
        if (s == "genuine") {
            key.labels[id] = Label::Genuine;
        } else if (s == "random") {
            key.labels[id] = Label::RandomImpostor;
        } else if (s == "skilled") {
            key.labels[id] = Label::SkilledImpostor;
        } else {
            bad("unknown label '" + s + "' for " + id);
        }
    }
    return key;
}

std::string grade_report_to_json(const GradeReport& r) {
    nlohmann::ordered_json root;
    root["team"] = r.team;
    root["task"] = to_string(r.task);
    root["auc_mixed"] = r.auc_mixed();
    root["auc_random"] = r.auc_random();
    root["auc_skilled"] = r.auc_skilled();
    root["counts"] = {{"genuine", r.genuine_count}, {"random", r.random_count}, {"skilled", r.skilled_count}};
    root["pair_counts"] = {{"mixed", {r.mixed.numerator, r.mixed.denominator}},
                           {"random", {r.random.numerator, r.random.denominator}},
                           {"skilled", {r.skilled.numerator, r.skilled.denominator}}};
    root["diagnostics"] = r.diagnostics;
    return root.dump(1);
}

GradeReport grade_report_from_json(std::string_view text) {
    const json root = parse_json(text);
    if (!root.is_object()) bad("grade report must be an object");
    GradeReport r;
    r.task = task_field(root);
    if (!root.contains("team") || !root["team"].is_string()) bad("missing string field 'team'");
    r.team = root["team"].get<std::string>();
    auto counts = [&](const char* name) {
        const auto& pc = root.at("pair_counts").at(name);
        if (!pc.is_array() || pc.size() != 2) bad(std::string("pair_counts.") + name + " must be [num, den]");
        return AucCounts{pc[0].get<std::uint64_t>(), pc[1].get<std::uint64_t>()};
    };
    try {
        r.mixed = counts("mixed");
        r.random = counts("random");
        r.skilled = counts("skilled");
        if (root.contains("counts")) {
            r.genuine_count = root["counts"].value("genuine", std::size_t{0});
            r.random_count = root["counts"].value("random", std::size_t{0});
            r.skilled_count = root["counts"].value("skilled", std::size_t{0});
        }
        if (root.contains("diagnostics")) r.diagnostics = root["diagnostics"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        bad(std::string("grade report: ") + e.what());
    }
    return r;
}

}  // namespace bbauth::protocol
