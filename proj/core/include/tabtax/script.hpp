#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "tabtax/commands.hpp"
#include "tabtax/error.hpp"
#include "tabtax/owl.hpp"

namespace tabtax {

/// Script document: either a bare command array or an object
///   {"data"?, "format"?, "seed"?, "root_label"?, "columns"?, "commands": [...]}
/// Besides the logged commands, scripts may use
///   discover {concept, policy: none|accept_all|accept_top_k, k?, config?}
///   export {path, include_individuals?, base_iri?}
///   stats {path}
struct Script {
    std::optional<std::string> data;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> root_label;
    nlohmann::json columns;  // column config, may be null
    nlohmann::json commands = nlohmann::json::array();
};

Script parse_script(const nlohmann::json& doc);

struct ScriptOptions {
    std::optional<std::uint64_t> seed;  // overrides every discovery seed
    ExportOptions export_options;
};

/// Thrown with the zero-based index of the failing command.
class ScriptError : public Error {
public:
    ScriptError(std::size_t index, const Error& cause);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Runs one script command; returns its result document.
nlohmann::json run_command(Workspace& ws, const nlohmann::json& command, const ScriptOptions& options);

using StepFn = std::function<void(std::size_t index, const nlohmann::json& command, const nlohmann::json& result)>;

void run_script(Workspace& ws, const nlohmann::json& commands, const ScriptOptions& options,
                const StepFn& on_step = {});

}  // namespace tabtax
