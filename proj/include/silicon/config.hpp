#pragma once
// Workspace configuration binding all resource paths together. Relative
// paths resolve against the config file's directory.

#include <filesystem>
#include <optional>
#include <string>

namespace silicon {

struct WorkspaceConfig {
    std::filesystem::path instrument;
    std::filesystem::path roster;
    std::filesystem::path prompt_template;
    std::filesystem::path providers;
    std::filesystem::path manifest;
    std::filesystem::path output_dir = "out";
    std::string encoding_id = "o200k_base";
    std::optional<std::filesystem::path> encoding_table;
    std::string log_level = "info";
    int workers = 1;
};

WorkspaceConfig load_config(const std::filesystem::path& path);

}  // namespace silicon
