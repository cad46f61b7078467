#include "tabtax/script.hpp"

#include <fstream>

#include "tabtax/error.hpp"
#include "tabtax/stats.hpp"

namespace tabtax {

using nlohmann::json;

Script parse_script(const json& doc) {
    Script s;
    if (doc.is_array()) {
        s.commands = doc;
        return s;
    }
    if (!doc.is_object()) throw InvalidArgument("script must be an array or an object");
    try {
        if (doc.contains("data")) s.data = doc.at("data").get<std::string>();
        if (doc.contains("format")) s.format = doc.at("format").get<std::string>();
        if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("root_label")) s.root_label = doc.at("root_label").get<std::string>();
        if (doc.contains("columns")) s.columns = doc.at("columns");
        s.commands = doc.value("commands", json::array());
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad script: ") + e.what());
    }
    if (!s.commands.is_array()) throw InvalidArgument("'commands' must be an array");
    return s;
}

ScriptError::ScriptError(std::size_t index, const Error& cause)
    : Error(cause.category(), "command " + std::to_string(index) + ": " + cause.what()), index_(index) {}

namespace {

std::string path_of(const json& cmd) {
    if (!cmd.contains("path") || !cmd.at("path").is_string()) throw InvalidArgument("command needs a 'path'");
    return cmd.at("path").get<std::string>();
}

json discover_command(Workspace& ws, const json& cmd, const ScriptOptions& options) {
    if (!cmd.contains("concept")) throw InvalidArgument("discover needs a 'concept'");
    const ConceptId concept_id = ws.resolve_ref(cmd.at("concept"));
    DiscoveryConfig config = discovery_config_from_json(cmd.value("config", json(nullptr)));
    if (options.seed) config.train.seed = *options.seed;
    const std::string policy = cmd.value("policy", "accept_all");
    std::size_t accept = 0;
    auto proposals = propose_subconcepts(ws.taxonomy(), concept_id, config);
    if (policy == "accept_all") {
        accept = proposals.size();
    } else if (policy == "accept_top_k") {
        if (!cmd.contains("k") || !cmd.at("k").is_number_unsigned()) throw InvalidArgument("accept_top_k needs k");
        accept = std::min(proposals.size(), cmd.at("k").get<std::size_t>());
    } else if (policy != "none") {
        throw InvalidArgument("unknown discovery policy '" + policy + "'");
    }
    json accepted = json::array();
    json listed = json::array();
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (i < accept) accepted.push_back(*ws.resolve(proposals[i], true));
        listed.push_back(to_json(proposals[i], ws.table()));
    }
    return {{"proposals", std::move(listed)}, {"accepted", std::move(accepted)}};
}

}  // namespace

json run_command(Workspace& ws, const json& cmd, const ScriptOptions& options) {
    if (!cmd.is_object() || !cmd.contains("op") || !cmd.at("op").is_string()) {
        throw InvalidArgument("command must be an object with an 'op'");
    }
    const std::string op = cmd.at("op").get<std::string>();
    if (is_mutation_op(op)) return ws.apply(cmd);
    if (op == "discover") return discover_command(ws, cmd, options);
    if (op == "export") {
        ExportOptions eo = options.export_options;
        if (cmd.contains("include_individuals")) eo.include_individuals = cmd.at("include_individuals").get<bool>();
        if (cmd.contains("base_iri")) eo.base_iri = cmd.at("base_iri").get<std::string>();
        const std::string path = path_of(cmd);
        export_turtle_file(ws.taxonomy(), path, eo);
        return {{"path", path}};
    }
    if (op == "stats") {
        const std::string path = path_of(cmd);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(Error::Category::io, "cannot open '" + path + "' for writing");
        out << stats_csv(compute_stats(ws.taxonomy()));
        return {{"path", path}};
    }
    throw InvalidArgument("unknown command '" + op + "'");
}

void run_script(Workspace& ws, const json& commands, const ScriptOptions& options, const StepFn& on_step) {
    if (!commands.is_array()) throw InvalidArgument("commands must be an array");
    for (std::size_t i = 0; i < commands.size(); ++i) {
        json result;
        try {
            result = run_command(ws, commands[i], options);
        } catch (const Error& e) {
            throw ScriptError(i, e);
        } catch (const json::exception& e) {
            throw ScriptError(i, InvalidArgument(e.what()));
        }
        if (on_step) on_step(i, commands[i], result);
    }
}

}  // namespace tabtax
