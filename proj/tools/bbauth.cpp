#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbauth/error.hpp"
#include "bbauth/pipeline.hpp"
#include "bbauth/protocol.hpp"
#include "bbauth/run_config.hpp"
#include "bbauth/synthgen.hpp"

namespace {

using namespace bbauth;

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kConfig = 4, kGrading = 5 };

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return kUsage;
        case ErrorCode::ConfigInvalid:
        case ErrorCode::MatcherTaskMismatch: return kConfig;
        case ErrorCode::MissingScore:
        case ErrorCode::DuplicateScore:
        case ErrorCode::NonFiniteScore:
        case ErrorCode::MalformedScoreFile:
        case ErrorCode::EmptyDistribution: return kGrading;
        default: return kIo;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::string split_file(const std::string& dir, SplitKind split) {
    return (std::filesystem::path(dir) / (std::string(to_string(split)) + ".json")).string();
}

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::optional<std::size_t> threads;
    std::string format;
    std::vector<std::string> overrides;
};

RunConfig resolve(const Globals& g, const std::vector<std::pair<std::string, std::string>>& flags) {
    RunConfig cfg;
    if (const char* env = std::getenv("BBAUTH_DATA_DIR"); env && *env) cfg.data_dir = env;
    if (!g.config_path.empty()) cfg.load_file(g.config_path);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "--set expects key=value, got " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) cfg.set("seed", std::to_string(*g.seed));
    if (g.threads) cfg.set("threads", std::to_string(*g.threads));
    if (!g.format.empty()) cfg.set("format", g.format);
    for (const auto& [k, v] : flags) {
        if (!v.empty()) cfg.set(k, v);
    }
    cfg.validate();
    return cfg;
}

TaskKind require_task(const RunConfig& cfg) {
    if (!cfg.task) throw Error(ErrorCode::InvalidArgument, "a task is required (--task or task = ... in --config)");
    return *cfg.task;
}

SplitKind parse_split_arg(const std::string& s) {
    auto k = parse_split(s);
    if (!k || *k == SplitKind::Train) {
        throw Error(ErrorCode::InvalidArgument, "--split must be validation or evaluation");
    }
    return *k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioural biometrics benchmark: synthesize data, build comparisons, score, grade, rank"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--config", g.config_path, "Flat key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_option("--format", g.format, "Console output format")->check(CLI::IsMember({"json", "table"}));
    app.add_option("--set", g.overrides, "Override any configuration key (key=value)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with comparison lists and keys");
    std::string synth_out, users, train_users, separability, alpha, beta, policy;
    bool force = false;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--users", users, "Devices per validation/evaluation split");
    synth->add_option("--train-users", train_users, "Subjects in the training split");
    synth->add_option("--separability", separability, "Between-user / within-user spread");
    synth->add_option("--alpha", alpha, "Skilled imitation strength in [0,1]");
    synth->add_option("--beta", beta, "Device bias magnitude");
    synth->add_option("--random-policy", policy, "all | sample:<k>");
    synth->add_flag("--force", force, "Overwrite existing files");

    // comparisons
    auto* comparisons = app.add_subcommand("comparisons", "Build a comparison list and key file from a split");
    std::string cmp_task, cmp_split = "evaluation", cmp_data, cmp_out, cmp_key_out, cmp_policy;
    comparisons->add_option("--task", cmp_task, "keystroke | reading | gallery | tapping | 1-4");
    comparisons->add_option("--split", cmp_split, "validation | evaluation");
    comparisons->add_option("--data", cmp_data, "Dataset directory (default $BBAUTH_DATA_DIR)");
    comparisons->add_option("--out", cmp_out, "Comparison list output")->required();
    comparisons->add_option("--key-out", cmp_key_out, "Key file output")->required();
    comparisons->add_option("--random-policy", cmp_policy, "all | sample:<k>");

    // score
    auto* score = app.add_subcommand("score", "Run a matcher over a comparison list");
    std::string sc_task, sc_matcher, sc_split = "evaluation", sc_data, sc_list, sc_out;
    score->add_option("--task", sc_task, "keystroke | reading | gallery | tapping | 1-4");
    score->add_option("--matcher", sc_matcher,
                      "keystroke-ngram | swipe-template | dwt-distance | softdtw | siamese");
    score->add_option("--split", sc_split, "validation | evaluation");
    score->add_option("--data", sc_data, "Dataset directory (default $BBAUTH_DATA_DIR)");
    score->add_option("--comparisons", sc_list, "Comparison list")->required();
    score->add_option("--out", sc_out, "Score CSV output")->required();

    // grade
    auto* grade = app.add_subcommand("grade", "Grade a score file against a key file");
    std::string gr_scores, gr_key, gr_task, gr_team, gr_out, gr_table;
    grade->add_option("--scores", gr_scores, "Score CSV")->required();
    grade->add_option("--key", gr_key, "Key file")->required();
    grade->add_option("--task", gr_task, "Task of the comparison list");
    grade->add_option("--team", gr_team, "Team name in the report");
    grade->add_option("--out", gr_out, "Grade report JSON output");
    grade->add_option("--table-out", gr_table, "Text table output");

    // report
    auto* report = app.add_subcommand("report", "Rank grade reports into a leaderboard");
    std::vector<std::string> rp_inputs;
    std::string rp_task, rp_out;
    report->add_option("reports", rp_inputs, "Grade report JSON files");
    report->add_option("--task", rp_task, "Only rank this task");
    report->add_option("--out", rp_out, "Leaderboard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*synth) {
            const RunConfig cfg = resolve(g, {{"synth.users", users},
                                              {"synth.train_users", train_users},
                                              {"synth.separability", separability},
                                              {"synth.alpha", alpha},
                                              {"synth.beta", beta},
                                              {"synth.random_policy", policy}});
            const auto data = synth::generate_dataset(cfg.gen, cfg.threads);
            const auto files = synth::write_dataset(data, cfg.gen, synth_out, force);
            if (cfg.format == OutputFormat::Json) {
                std::cout << synth::manifest_json(data, cfg.gen) << '\n';
            } else {
                std::cout << "wrote " << files.size() << " files to " << synth_out << '\n';
                std::cout << "  train       " << data.train.sessions.size() << " sessions\n";
                std::cout << "  validation  " << data.validation.sessions.size() << " sessions\n";
                std::cout << "  evaluation  " << data.evaluation.sessions.size() << " sessions\n";
                for (const auto& [task, p] : data.evaluation_protocol) {
                    std::cout << "  " << protocol::task_title(task) << ": " << p.comparisons.comparisons.size()
                              << " comparisons per split\n";
                }
            }
            return kOk;
        }

        if (*comparisons) {
            const RunConfig cfg = resolve(g, {{"task", cmp_task}, {"data_dir", cmp_data}});
            const TaskKind task = require_task(cfg);
            const SplitKind split_kind = parse_split_arg(cmp_split);
            const auto split = load_dataset(split_file(cfg.data_dir, split_kind), split_kind);
            const auto rp = cmp_policy.empty() ? cfg.gen.random_policy : protocol::RandomPolicy::parse(cmp_policy);
            auto [list, key] = protocol::build_comparisons(split, task, cfg.seed, rp);
            write_file(cmp_out, protocol::comparison_list_to_json(list));
            write_file(cmp_key_out, protocol::key_file_to_json(key));
            std::cout << list.comparisons.size() << " comparisons written to " << cmp_out << '\n';
            return kOk;
        }

        if (*score) {
            RunConfig cfg = resolve(g, {{"task", sc_task}, {"matcher", sc_matcher}, {"data_dir", sc_data}});
            const auto list = protocol::comparison_list_from_json(read_file(sc_list));
            if (!cfg.task) cfg.task = list.task;
            if (*cfg.task != list.task) {
                throw Error(ErrorCode::MatcherTaskMismatch, "--task does not match the comparison list task " +
                                                                std::string(to_string(list.task)));
            }
            if (!cfg.matcher) throw Error(ErrorCode::InvalidArgument, "a matcher is required (--matcher)");
            cfg.validate();
            const SplitKind split_kind = parse_split_arg(sc_split);
            auto matcher = pipeline::make_matcher(*cfg.matcher, *cfg.task, cfg.params, cfg.seed);
            const auto train = load_dataset(split_file(cfg.data_dir, SplitKind::Train), SplitKind::Train);
            const auto split = load_dataset(split_file(cfg.data_dir, split_kind), split_kind);
            const auto run = pipeline::run_matcher(*matcher, train, split, list, cfg.threads);
            write_file(sc_out, protocol::write_score_file(run.scores));
            std::cerr << pipeline::to_string(*cfg.matcher) << " on " << to_string(*cfg.task) << ": "
                      << run.scores.size() << " scores, fit " << run.fit_seconds << " s, scoring "
                      << run.score_seconds << " s\n";
            return kOk;
        }

        if (*grade) {
            const RunConfig cfg = resolve(g, {{"task", gr_task}, {"team", gr_team}});
            const auto key = protocol::key_file_from_json(read_file(gr_key));
            const auto scores = protocol::parse_score_file(read_file(gr_scores));
            const TaskKind task = cfg.task.value_or(TaskKind::Keystroke);
            if (!cfg.task) std::cerr << "note: --task not given, labelling report as keystroke\n";
            const auto rep = protocol::grade(scores, key, task, cfg.team);
            for (const auto& d : rep.diagnostics) std::cerr << "warning: " << d << '\n';
            const protocol::LeaderboardRow row{1, rep.team, rep};
            const std::string table = protocol::format_table(task, std::span(&row, 1));
            if (!gr_out.empty()) write_file(gr_out, protocol::grade_report_to_json(rep) + "\n");
            if (!gr_table.empty()) write_file(gr_table, table);
            std::cout << (cfg.format == OutputFormat::Json ? protocol::grade_report_to_json(rep) + "\n" : table);
            return kOk;
        }

        if (*report) {
            const RunConfig cfg = resolve(g, {{"task", rp_task}});
            if (rp_inputs.empty()) {
                std::cerr << "report: no grade reports given\n" << report->help();
                return kUsage;
            }
            std::vector<protocol::GradeReport> reports;
            for (const auto& path : rp_inputs) reports.push_back(protocol::grade_report_from_json(read_file(path)));
            std::vector<TaskKind> tasks;
            for (TaskKind t : kAllTasks) {
                if (cfg.task && *cfg.task != t) continue;
                for (const auto& r : reports) {
                    if (r.task == t) {
                        tasks.push_back(t);
                        break;
                    }
                }
            }
            std::string out;
            if (cfg.format == OutputFormat::Json) {
                nlohmann::ordered_json root = nlohmann::ordered_json::array();
                for (TaskKind t : tasks) {
                    for (const auto& row : protocol::rank(reports, t)) {
                        root.push_back({{"task", to_string(t)},
                                        {"position", row.position},
                                        {"team", row.team},
                                        {"auc_mixed", row.report.auc_mixed()},
                                        {"auc_random", row.report.auc_random()},
                                        {"auc_skilled", row.report.auc_skilled()}});
                    }
                }
                out = root.dump(1) + "\n";
            } else {
                for (std::size_t i = 0; i < tasks.size(); ++i) {
                    if (i > 0) out += '\n';
                    out += protocol::format_table(tasks[i], protocol::rank(reports, tasks[i]));
                }
            }
            if (!rp_out.empty()) write_file(rp_out, out);
            std::cout << out;
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
