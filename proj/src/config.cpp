#include "silicon/config.hpp"

#include <fstream>

#include "json.hpp"
#include "silicon/errors.hpp"

namespace silicon {

WorkspaceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config file not readable: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("config file " + path.string() +
                          " is not valid JSON: " + e.what());
    }

    const auto base = path.parent_path();
    auto resolve = [&](const std::string& rel) {
        const std::filesystem::path p(rel);
        return p.is_absolute() ? p : base / p;
    };

    WorkspaceConfig config;
    try {
        config.instrument = resolve(doc.at("instrument").get<std::string>());
        config.roster = resolve(doc.at("roster").get<std::string>());
        config.prompt_template = resolve(doc.at("template").get<std::string>());
        config.providers = resolve(doc.at("providers").get<std::string>());
        config.manifest = resolve(doc.at("manifest").get<std::string>());
        config.output_dir = resolve(doc.value("output_dir", "out"));
        config.encoding_id = doc.value("encoding", "o200k_base");
        if (doc.contains("encoding_table")) {
            config.encoding_table =
                resolve(doc.at("encoding_table").get<std::string>());
        }
        config.log_level = doc.value("log_level", "info");
        config.workers = doc.value("workers", 1);
    } catch (const std::exception& e) {
        throw ConfigError("config file " + path.string() + " is malformed: " +
                          e.what());
    }
    return config;
}

}  // namespace silicon
