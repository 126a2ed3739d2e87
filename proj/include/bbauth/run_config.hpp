#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbauth/dataset.hpp"
#include "bbauth/pipeline.hpp"
#include "bbauth/synthgen.hpp"

namespace bbauth {

enum class OutputFormat { Table, Json };

/// Settings shared by every command. Values come from defaults, then a flat
/// `key = value` file, then command-line flags, each overriding the last.
struct RunConfig {
    std::optional<TaskKind> task;
    std::optional<pipeline::MatcherKind> matcher;
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    OutputFormat format = OutputFormat::Table;
    std::string data_dir = ".";
    std::string team = "submission";
    pipeline::MatcherParams params;
    synth::GenConfig gen;

    /// Applies one setting. Throws ConfigInvalid for unknown keys or values.
    void set(std::string_view key, std::string_view value);
    /// Reads `key = value` lines; '#' starts a comment. Throws Io, ConfigInvalid.
    void load_file(const std::string& path);
    void load_text(std::string_view text, const std::string& origin = "<config>");
    /// Throws MatcherTaskMismatch when the matcher cannot run on the task.
    void validate() const;

    static std::vector<std::string> known_keys();
};

}  // namespace bbauth
