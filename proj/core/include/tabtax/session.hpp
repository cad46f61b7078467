#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tabtax/commands.hpp"
#include "tabtax/owl.hpp"
#include "tabtax/stats.hpp"

namespace tabtax {

enum class JobStatus { queued, running, done, failed };

std::string_view to_string(JobStatus status);

struct SessionLimits {
    std::size_t max_preview_rows = 100;
};

/// One table, one taxonomy, its proposals and discovery jobs. Public methods
/// are thread-safe; mutations are serialized by the session lock. Discovery
/// runs on background threads over a copy of the concept's extension and
/// never touches the taxonomy.
class Session {
public:
    Session(std::string id, std::shared_ptr<const Table> table, std::string root_label = {},
            SessionLimits limits = {});
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const noexcept { return id_; }
    std::uint64_t version() const;

    nlohmann::json summary() const;
    nlohmann::json columns() const;
    /// {column: {kind?, included?}}; applied as logged set_column commands.
    nlohmann::json patch_columns(const nlohmann::json& patch, std::optional<std::uint64_t> expected_version = {});
    nlohmann::json mutate(const nlohmann::json& command, std::optional<std::uint64_t> expected_version = {});

    nlohmann::json concepts() const;
    nlohmann::json concept_detail(const nlohmann::json& ref, std::size_t preview_rows = 0) const;

    /// Returns {job, created}. A running job for the same concept is reused.
    std::pair<std::string, bool> start_discovery(const nlohmann::json& concept_ref, const nlohmann::json& config);
    nlohmann::json job(const std::string& job_id) const;
    nlohmann::json proposals() const;
    nlohmann::json resolve(ProposalId id, bool accept, std::optional<std::uint64_t> expected_version = {});

    std::string export_turtle(const ExportOptions& options = {}) const;
    TaxonomyStats stats() const;
    nlohmann::json log() const;
    /// Column config, event log, taxonomy and proposals.
    nlohmann::json document() const;

    /// Blocks until no job is queued or running.
    void wait_for_jobs();

private:
    struct Job {
        std::string id;
        ConceptId concept_id = 0;
        DiscoveryConfig config;
        std::atomic<int> status{static_cast<int>(JobStatus::queued)};
        std::atomic<double> progress{0.0};
        std::vector<ProposalId> proposals;  // guarded by the session lock
        std::string error;                  // guarded by the session lock
    };

    void check_version(std::optional<std::uint64_t> expected) const;
    nlohmann::json job_json(const Job& job) const;
    void run_job(std::shared_ptr<Job> job, std::shared_ptr<const Table> table, RowSet rows);

    std::string id_;
    SessionLimits limits_;
    mutable std::mutex mu_;
    Workspace ws_;
    std::uint64_t version_ = 0;
    std::map<ProposalId, ConceptProposal> proposals_;
    ProposalId next_proposal_ = 0;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::map<ConceptId, std::string> running_;
    std::uint64_t next_job_ = 0;
    std::vector<std::thread> threads_;
    std::atomic<bool> shutting_down_{false};
};

class SessionRegistry {
public:
    explicit SessionRegistry(SessionLimits limits = {}) : limits_(limits) {}

    std::shared_ptr<Session> create(std::shared_ptr<const Table> table, std::string root_label = {});
    /// Throws NotFound.
    std::shared_ptr<Session> get(const std::string& id) const;
    bool erase(const std::string& id);
    std::size_t size() const;

private:
    SessionLimits limits_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// 128 random bits as 32 hex digits.
std::string random_session_id();

}  // namespace tabtax
