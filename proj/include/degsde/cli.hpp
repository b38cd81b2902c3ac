#pragma once

#include "degsde/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace degsde::cli {

/// Flattened "section.key" -> value view of one config file.
class ScenarioConfig {
public:
    std::string source;
    std::map<std::string, std::string> entries;

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    std::string str(const std::string& key, const std::string& fallback) const;
    std::string str(const std::string& key) const;  ///< throws ConfigError when missing
    double num(const std::string& key, double fallback) const;
    long integer(const std::string& key, long fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::string> words(const std::string& key, std::vector<std::string> fallback) const;

    std::string scenario() const { return str("experiment.scenario"); }
    std::uint64_t seed() const;
    std::string output_dir() const;  ///< DEGSDE_OUTPUT_DIR wins over output.dir
    std::vector<std::string> formats() const;
};

/// Parses an INI file. Throws ConfigError naming the offending field.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Structural checks: scenario and families exist, budgets positive, seed present.
void validate_config(const ScenarioConfig& cfg);

/// Model and drift described by the [model] and [drift] sections.
model::Example build_model(const ScenarioConfig& cfg);

struct Anchor {
    std::string id;
    std::string statement;
};

/// Fixed table; summary lines cite only these ids.
const std::vector<Anchor>& anchors();
const Anchor& anchor(const std::string& id);

struct ScenarioInfo {
    std::string name;
    std::string anchor_id;
    std::string description;
};

const std::vector<ScenarioInfo>& scenarios();
std::string scenarios_csv();
std::string scenarios_text();

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> files;
    std::vector<std::string> summary;
    std::string message;
};

/// Runs the configured experiment and writes its files atomically at the end.
/// Exit codes: 0 ok, 1 runtime failure, 2 invalid config, 3 hypothesis violation.
RunResult run(const ScenarioConfig& cfg);
RunResult run_file(const std::string& path);

}  // namespace degsde::cli
