#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabtax/error.hpp"
#include "tabtax/http_service.hpp"
#include "tabtax/script.hpp"
#include "tabtax/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tabtax::Error(tabtax::Error::Category::io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw tabtax::ParseError(std::string("'") + path + "': " + e.what(), 0, 0);
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tabtax::Error(tabtax::Error::Category::io, "cannot open '" + path + "' for writing");
    out << text;
}

struct RunArgs {
    std::string data;
    std::string script;
    std::string format;
    std::string columns;
    std::string out_owl;
    std::string out_stats;
    std::string out_log;
    std::string base_iri;
    std::optional<std::uint64_t> seed;
    bool no_individuals = false;
    bool quiet = false;
};

int run(const RunArgs& a) {
    const json doc = read_json_file(a.script);
    const tabtax::Script script = tabtax::parse_script(doc);

    std::string data = a.data;
    if (data.empty() && script.data) {
        const fs::path p(*script.data);
        data = p.is_absolute() ? p.string() : (fs::path(a.script).parent_path() / p).string();
    }
    if (data.empty()) throw tabtax::InvalidArgument("no dataset: pass --data or set \"data\" in the script");
    std::string format = a.format;
    if (format.empty()) format = script.format.value_or(fs::path(data).extension() == ".tsv" ? "tsv" : "csv");

    auto table = std::make_shared<tabtax::Table>(tabtax::load_table_file(data, tabtax::parse_table_format(format)));
    if (!script.columns.is_null()) tabtax::apply_column_config(*table, script.columns);
    if (!a.columns.empty()) tabtax::apply_column_config(*table, read_json_file(a.columns));

    tabtax::Workspace ws(table, script.root_label.value_or(""));
    tabtax::ScriptOptions options;
    options.seed = a.seed ? a.seed : script.seed;
    options.export_options.include_individuals = !a.no_individuals;
    options.export_options.base_iri = a.base_iri;

    try {
        tabtax::run_script(ws, script.commands, options, [&](std::size_t i, const json& cmd, const json& result) {
            if (!a.quiet) std::cerr << "[" << i << "] " << cmd.value("op", "?") << " " << result.dump() << "\n";
        });
    } catch (const tabtax::ScriptError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!a.out_log.empty()) write_file(a.out_log, ws.log().dump(2) + "\n");
        return 3;
    }

    if (!a.out_owl.empty()) tabtax::export_turtle_file(ws.taxonomy(), a.out_owl, options.export_options);
    const tabtax::TaxonomyStats stats = tabtax::compute_stats(ws.taxonomy());
    if (!a.out_stats.empty()) write_file(a.out_stats, tabtax::stats_csv(stats));
    if (!a.out_log.empty()) write_file(a.out_log, ws.log().dump(2) + "\n");
    if (!a.quiet) std::cout << tabtax::stats_text_table(stats);
    return 0;
}

tabtax::HttpService* g_service = nullptr;

void on_signal(int) {
    if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive taxonomy construction from tabular data"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Load a dataset, replay a command script, export Turtle and stats");
    run_cmd->add_option("--data", run_args.data, "CSV/TSV dataset (overrides the script's \"data\")");
    run_cmd->add_option("--script", run_args.script, "JSON command script")->required();
    run_cmd->add_option("--format", run_args.format, "csv or tsv (default: from the script or file extension)");
    run_cmd->add_option("--columns", run_args.columns, "JSON column config {name: {kind, included}}");
    run_cmd->add_option("--out-owl", run_args.out_owl, "Turtle output path");
    run_cmd->add_option("--out-stats", run_args.out_stats, "Stats CSV output path");
    run_cmd->add_option("--out-log", run_args.out_log, "Event log output path");
    run_cmd->add_option("--seed", run_args.seed, "Seed for every discovery command");
    run_cmd->add_option("--base-iri", run_args.base_iri, "Ontology base IRI");
    run_cmd->add_flag("--no-individuals", run_args.no_individuals, "Do not export rows as individuals");
    run_cmd->add_flag("-q,--quiet", run_args.quiet, "Only report errors");

    std::string ttl;
    bool csv = false;
    auto* stats_cmd = app.add_subcommand("stats", "Print taxonomy statistics of a Turtle file");
    stats_cmd->add_option("file", ttl, "Turtle file")->required();
    stats_cmd->add_flag("--csv", csv, "Print CSV instead of a text table");

    std::string inspect_data;
    std::string inspect_format;
    auto* inspect_cmd = app.add_subcommand("inspect", "Print the inferred column kinds and statistics");
    inspect_cmd->add_option("data", inspect_data, "CSV/TSV dataset")->required();
    inspect_cmd->add_option("--format", inspect_format, "csv or tsv");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_preview = 100;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP session service");
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--port", port, "Listen port");
    serve_cmd->add_option("--max-preview", max_preview, "Maximum preview rows per concept request");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return run(run_args);
        if (*stats_cmd) {
            const auto stats = tabtax::compute_stats(tabtax::import_turtle_file(ttl));
            std::cout << (csv ? tabtax::stats_csv(stats) : tabtax::stats_text_table(stats));
            return 0;
        }
        if (*inspect_cmd) {
            const std::string format =
                inspect_format.empty() ? (fs::path(inspect_data).extension() == ".tsv" ? "tsv" : "csv") : inspect_format;
            const auto table = tabtax::load_table_file(inspect_data, tabtax::parse_table_format(format));
            json cols = json::array();
            for (const auto& meta : table.columns()) cols.push_back(tabtax::column_to_json(meta));
            std::cout << json{{"name", table.name()}, {"rows", table.row_count()}, {"columns", cols}}.dump(2) << "\n";
            return 0;
        }
        if (*serve_cmd) {
            tabtax::ServiceOptions options;
            options.limits.max_preview_rows = max_preview;
            tabtax::HttpService service(options);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            service.run(host, port);
            g_service = nullptr;
            return 0;
        }
    } catch (const tabtax::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
