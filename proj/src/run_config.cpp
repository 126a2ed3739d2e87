#include "bbauth/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bbauth/error.hpp"

namespace bbauth {

namespace {

[[noreturn]] void invalid(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(ErrorCode::ConfigInvalid,
                std::string(key) + ": '" + std::string(value) + "' is not " + std::string(expected));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) invalid(key, value, "a number");
    return out;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
    return parse_number<std::size_t>(key, value);
}

double parse_real(std::string_view key, std::string_view value) {
    const double v = parse_number<double>(key, value);
    if (!std::isfinite(v)) invalid(key, value, "finite");
    return v;
}

TaskKind parse_task_value(std::string_view key, std::string_view value) {
    if (auto t = parse_task(value)) return *t;
    if (value == "1") return TaskKind::Keystroke;
    if (value == "2") return TaskKind::TextReading;
    if (value == "3") return TaskKind::GallerySwiping;
    if (value == "4") return TaskKind::Tapping;
    invalid(key, value, "a task (keystroke, reading, gallery, tapping or 1-4)");
}

}  // namespace

std::vector<std::string> RunConfig::known_keys() {
    return {"task",           "matcher",          "seed",          "threads",
            "format",         "data_dir",         "team",          "keystroke.top_k",
            "keystroke.min_occurrences",          "dwt.width",     "dwt.filter",
            "softdtw.gamma",  "siamese.epochs",   "siamese.learning_rate",
            "siamese.batch_size",                 "siamese.margin", "siamese.max_length",
            "siamese.layers", "siamese.pair_ratio", "length.keystroke", "length.reading",
            "length.gallery", "length.tapping",   "synth.users",   "synth.train_users",
            "synth.separability",                 "synth.alpha",   "synth.beta",
            "synth.words",    "synth.swipes",     "synth.taps",    "synth.sensor_rate",
            "synth.random_policy"};
}

void RunConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "task") {
        task = parse_task_value(key, value);
    } else if (key == "matcher") {
        matcher = pipeline::parse_matcher(value);
        if (!matcher) invalid(key, value, "a known matcher");
    } else if (key == "seed") {
        seed = parse_number<std::uint64_t>(key, value);
        gen.seed = seed;
    } else if (key == "threads") {
        threads = parse_count(key, value);
    } else if (key == "format") {
        if (value == "table") {
            format = OutputFormat::Table;
        } else if (value == "json") {
            format = OutputFormat::Json;
        } else {
            invalid(key, value, "json or table");
        }
    } else if (key == "data_dir") {
        data_dir = std::string(value);
    } else if (key == "team") {
        if (value.empty()) invalid(key, value, "a non-empty name");
        team = std::string(value);
    } else if (key == "keystroke.top_k") {
        params.ngram_top_k = parse_count(key, value);
    } else if (key == "keystroke.min_occurrences") {
        params.ngram_min_occurrences = parse_real(key, value);
    } else if (key == "dwt.width") {
        params.dwt_width = parse_count(key, value);
        if (params.dwt_width == 0) invalid(key, value, "positive");
    } else if (key == "dwt.filter") {
        params.dwt_filter = std::string(value);
    } else if (key == "softdtw.gamma") {
        params.softdtw_gamma = parse_real(key, value);
        if (!(params.softdtw_gamma > 0)) invalid(key, value, "positive");
    } else if (key == "siamese.epochs") {
        params.siamese_epochs = parse_count(key, value);
    } else if (key == "siamese.learning_rate") {
        params.siamese_learning_rate = parse_real(key, value);
    } else if (key == "siamese.batch_size") {
        params.siamese_batch_size = parse_count(key, value);
    } else if (key == "siamese.margin") {
        params.siamese_margin = parse_real(key, value);
    } else if (key == "siamese.max_length") {
        params.siamese_max_length = parse_count(key, value);
    } else if (key == "siamese.layers") {
        std::vector<std::size_t> layers;
        std::string_view rest = value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            const std::size_t n = parse_count(key, item);
            if (n == 0) invalid(key, value, "a list of positive layer sizes");
            layers.push_back(n);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        if (layers.empty()) invalid(key, value, "a list of positive layer sizes");
        params.siamese_layers = std::move(layers);
    } else if (key == "siamese.pair_ratio") {
        params.siamese_pair_ratio = parse_real(key, value);
    } else if (key.starts_with("length.")) {
        const auto t = parse_task(key.substr(7));
        if (!t) throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + std::string(key) + "'");
        const std::size_t n = parse_count(key, value);
        if (n < 2) invalid(key, value, "at least 2");
        params.target_lengths[*t] = n;
    } else if (key == "synth.users") {
        gen.users = parse_count(key, value);
    } else if (key == "synth.train_users") {
        gen.train_users = parse_count(key, value);
    } else if (key == "synth.separability") {
        gen.separability = parse_real(key, value);
    } else if (key == "synth.alpha") {
        gen.alpha = parse_real(key, value);
    } else if (key == "synth.beta") {
        gen.beta = parse_real(key, value);
    } else if (key == "synth.words") {
        gen.words_per_session = parse_count(key, value);
    } else if (key == "synth.swipes") {
        gen.swipes_per_session = parse_count(key, value);
    } else if (key == "synth.taps") {
        gen.tap_repeats = parse_count(key, value);
    } else if (key == "synth.sensor_rate") {
        gen.sensor_rate_hz = parse_real(key, value);
    } else if (key == "synth.random_policy") {
        gen.random_policy = protocol::RandomPolicy::parse(value);
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + std::string(key) + "'");
    }
}

void RunConfig::load_text(std::string_view text, const std::string& origin) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::ConfigInvalid, origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        try {
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(e.code(), origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
}

void RunConfig::validate() const {
    if (task && matcher && !pipeline::matcher_supports(*matcher, *task)) {
        throw Error(ErrorCode::MatcherTaskMismatch, "matcher " + std::string(pipeline::to_string(*matcher)) +
                                                        " is not valid for task " + std::string(to_string(*task)));
    }
}

}  // namespace bbauth
