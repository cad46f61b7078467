#include "tabtax/session.hpp"

#include <chrono>
#include <random>

#include "tabtax/error.hpp"

namespace tabtax {

using nlohmann::json;

namespace {

struct Cancelled {};

std::string_view expr_kind(const ConceptExpr& expr) {
    switch (expr.index()) {
        case 0: return "root";
        case 1: return "restrict";
        case 2: return "union";
        case 3: return "intersection";
        default: return "complement";
    }
}

json concept_summary(const Concept& c) {
    return {{"id", c.id},
            {"label", c.label},
            {"kind", std::string(expr_kind(c.expr))},
            {"parents", c.parents},
            {"children", c.children},
            {"extension_size", c.extension.size()},
            {"empty_warning", c.empty_warning}};
}

}  // namespace

std::string_view to_string(JobStatus status) {
    switch (status) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "queued";
}

std::string random_session_id() {
    static std::mutex mu;
    static std::random_device rd;
    std::lock_guard lock(mu);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (int i = 0; i < 4; ++i) {
        std::uint32_t v = rd();
        for (int k = 0; k < 8; ++k) {
            out += digits[v & 0xF];
            v >>= 4;
        }
    }
    return out;
}

Session::Session(std::string id, std::shared_ptr<const Table> table, std::string root_label, SessionLimits limits)
    : id_(std::move(id)), limits_(limits), ws_(std::move(table), std::move(root_label)) {}

Session::~Session() {
    shutting_down_ = true;
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
}

std::uint64_t Session::version() const {
    std::lock_guard lock(mu_);
    return version_;
}

void Session::check_version(std::optional<std::uint64_t> expected) const {
    if (expected && *expected != version_) {
        throw Conflict("session is at version " + std::to_string(version_) + ", request expected " +
                       std::to_string(*expected));
    }
}

json Session::summary() const {
    std::lock_guard lock(mu_);
    const Taxonomy& tax = ws_.taxonomy();
    return {{"id", id_},
            {"version", version_},
            {"table", ws_.table().name()},
            {"rows", ws_.table().row_count()},
            {"columns", ws_.table().column_count()},
            {"root", tax.root()},
            {"concepts", tax.size()}};
}

json Session::columns() const {
    std::lock_guard lock(mu_);
    json cols = json::array();
    for (const auto& meta : ws_.table().columns()) cols.push_back(column_to_json(meta));
    return {{"columns", std::move(cols)}, {"version", version_}};
}

json Session::patch_columns(const json& patch, std::optional<std::uint64_t> expected) {
    const json& body = patch.contains("columns") ? patch.at("columns") : patch;
    if (!body.is_object()) throw InvalidArgument("column patch must be an object keyed by column name");
    {
        std::lock_guard lock(mu_);
        check_version(expected);
        // Applied on a copy so a failing column leaves the session untouched.
        Workspace next = ws_;
        for (const auto& [name, change] : body.items()) {
            if (!change.is_object()) throw InvalidArgument("column change for '" + name + "' must be an object");
            json cmd{{"op", "set_column"}, {"column", name}};
            if (change.contains("kind")) cmd["kind"] = change.at("kind");
            if (change.contains("included")) cmd["included"] = change.at("included");
            next.apply(cmd);
        }
        ws_ = std::move(next);
        ++version_;
    }
    return columns();
}

json Session::mutate(const json& command, std::optional<std::uint64_t> expected) {
    std::lock_guard lock(mu_);
    check_version(expected);
    if (!command.is_object() || !command.contains("op") || !command.at("op").is_string() ||
        !is_mutation_op(command.at("op").get<std::string>())) {
        throw InvalidArgument("command must be one of the taxonomy mutations");
    }
    json result = ws_.apply(command);
    ++version_;
    return {{"result", std::move(result)}, {"version", version_}};
}

json Session::concepts() const {
    std::lock_guard lock(mu_);
    const Taxonomy& tax = ws_.taxonomy();
    json list = json::array();
    for (ConceptId id : tax.ids()) list.push_back(concept_summary(tax.get(id)));
    return {{"root", tax.root()}, {"concepts", std::move(list)}, {"version", version_}};
}

json Session::concept_detail(const json& ref, std::size_t preview_rows) const {
    std::lock_guard lock(mu_);
    const Taxonomy& tax = ws_.taxonomy();
    const Table& table = ws_.table();
    const ConceptId id = ws_.resolve_ref(ref);
    const Concept& c = tax.get(id);
    json out = concept_summary(c);
    out["expr"] = expr_to_json(c.expr, table);
    out["intension"] = describe_intension(tax, id);
    json stats = json::array();
    for (std::size_t col = 0; col < table.column_count(); ++col) {
        ColumnMeta meta = table.column(col);
        meta.stats = column_stats(table, col, c.extension);
        stats.push_back(column_to_json(meta));
    }
    out["column_stats"] = std::move(stats);
    const std::size_t n = std::min({preview_rows, limits_.max_preview_rows, c.extension.size()});
    json names = json::array();
    for (std::size_t col = 0; col < table.column_count(); ++col) names.push_back(table.column(col).name);
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json row = json::array();
        for (std::size_t col = 0; col < table.column_count(); ++col) {
            if (table.is_missing(col, c.extension[i])) {
                row.push_back(nullptr);
            } else {
                row.push_back(table.text(col, c.extension[i]));
            }
        }
        rows.push_back({{"row", c.extension[i]}, {"values", std::move(row)}});
    }
    out["preview"] = {{"columns", std::move(names)}, {"rows", std::move(rows)}};
    out["version"] = version_;
    return out;
}

std::pair<std::string, bool> Session::start_discovery(const json& concept_ref, const json& config_json) {
    std::lock_guard lock(mu_);
    const ConceptId concept_id = ws_.resolve_ref(concept_ref);
    if (auto it = running_.find(concept_id); it != running_.end()) return {it->second, false};
    DiscoveryConfig config = discovery_config_from_json(config_json);
    auto job = std::make_shared<Job>();
    job->id = "job-" + std::to_string(next_job_++);
    job->concept_id = concept_id;
    job->config = config;
    jobs_[job->id] = job;
    running_[concept_id] = job->id;
    threads_.emplace_back(&Session::run_job, this, job, ws_.table_ptr(), ws_.taxonomy().extension(concept_id));
    return {job->id, true};
}

void Session::run_job(std::shared_ptr<Job> job, std::shared_ptr<const Table> table, RowSet rows) {
    job->status = static_cast<int>(JobStatus::running);
    auto progress = [&](double f) {
        if (shutting_down_) throw Cancelled{};
        double cur = job->progress.load();
        while (f > cur && !job->progress.compare_exchange_weak(cur, f)) {
        }
    };
    std::optional<DiscoveryResult> result;
    std::string error;
    try {
        result = discover(*table, rows, job->config, progress);
    } catch (const Cancelled&) {
        error = "cancelled";
    } catch (const std::exception& e) {
        error = e.what();
    }
    std::lock_guard lock(mu_);
    running_.erase(job->concept_id);
    if (!result) {
        job->error = error;
        job->status = static_cast<int>(JobStatus::failed);
        return;
    }
    for (auto& p : result->proposals) {
        p.id = next_proposal_++;
        p.parent = job->concept_id;
        job->proposals.push_back(p.id);
        proposals_[p.id] = std::move(p);
    }
    job->progress = 1.0;
    job->status = static_cast<int>(JobStatus::done);
}

json Session::job_json(const Job& job) const {
    const auto status = static_cast<JobStatus>(job.status.load());
    json out{{"id", job.id},
             {"kind", "discovery"},
             {"concept", job.concept_id},
             {"status", std::string(to_string(status))},
             {"progress", job.progress.load()},
             {"config", to_json(job.config)}};
    if (status == JobStatus::done) {
        json list = json::array();
        for (ProposalId id : job.proposals) list.push_back(to_json(proposals_.at(id), ws_.table()));
        out["proposals"] = std::move(list);
    }
    if (status == JobStatus::failed) out["error"] = job.error;
    return out;
}

json Session::job(const std::string& job_id) const {
    std::lock_guard lock(mu_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw NotFound("unknown job '" + job_id + "'");
    return job_json(*it->second);
}

json Session::proposals() const {
    std::lock_guard lock(mu_);
    json list = json::array();
    for (const auto& [id, p] : proposals_) list.push_back(to_json(p, ws_.table()));
    return {{"proposals", std::move(list)}};
}

json Session::resolve(ProposalId id, bool accept, std::optional<std::uint64_t> expected) {
    std::lock_guard lock(mu_);
    check_version(expected);
    const auto it = proposals_.find(id);
    if (it == proposals_.end()) throw NotFound("unknown proposal " + std::to_string(id));
    const auto concept_id = ws_.resolve(it->second, accept);
    ++version_;
    return {{"proposal", to_json(it->second, ws_.table())},
            {"concept", concept_id ? json(*concept_id) : json(nullptr)},
            {"version", version_}};
}

std::string Session::export_turtle(const ExportOptions& options) const {
    std::lock_guard lock(mu_);
    return tabtax::export_turtle(ws_.taxonomy(), options);
}

TaxonomyStats Session::stats() const {
    std::lock_guard lock(mu_);
    return compute_stats(ws_.taxonomy());
}

json Session::log() const {
    std::lock_guard lock(mu_);
    return {{"log", ws_.log()}, {"version", version_}};
}

json Session::document() const {
    std::lock_guard lock(mu_);
    json cols = json::object();
    for (const auto& meta : ws_.initial_table()->columns()) {
        cols[meta.name] = {{"kind", std::string(to_string(meta.kind))}, {"included", meta.included}};
    }
    json props = json::array();
    for (const auto& [id, p] : proposals_) props.push_back(to_json(p, ws_.table()));
    return {{"format", "tabtax-session"},
            {"version", 1},
            {"session", id_},
            {"table", ws_.table().name()},
            {"initial_columns", std::move(cols)},
            {"log", ws_.log()},
            {"taxonomy", ws_.taxonomy().to_json()},
            {"proposals", std::move(props)}};
}

void Session::wait_for_jobs() {
    for (;;) {
        {
            std::lock_guard lock(mu_);
            if (running_.empty()) return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

std::shared_ptr<Session> SessionRegistry::create(std::shared_ptr<const Table> table, std::string root_label) {
    auto session = std::make_shared<Session>(random_session_id(), std::move(table), std::move(root_label), limits_);
    std::lock_guard lock(mu_);
    sessions_[session->id()] = session;
    return session;
}

std::shared_ptr<Session> SessionRegistry::get(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
}

bool SessionRegistry::erase(const std::string& id) {
    std::shared_ptr<Session> victim;
    {
        std::lock_guard lock(mu_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) return false;
        victim = std::move(it->second);
        sessions_.erase(it);
    }
    return true;
}

std::size_t SessionRegistry::size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

}  // namespace tabtax
