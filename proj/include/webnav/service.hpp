#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "webnav/dataset.hpp"
#include "webnav/environment.hpp"
#include "webnav/error.hpp"
#include "webnav/graph.hpp"

namespace webnav {

// Machine-readable failure with the HTTP status it maps to.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& what)
      : Error(Kind::kRuntime, what), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

struct SessionLimits {
  int max_queries = 20;
  std::int64_t time_budget_seconds = 7200;
  int max_peeks = 4;
  std::optional<int> max_hops;  // dataset N_h when unset
};

enum class TrialOutcome { kSuccess, kFailure, kGaveUp, kTimeout };
std::string_view TrialOutcomeName(TrialOutcome outcome);

struct ActionRecord {
  std::string type;  // peek | move | stop | giveup
  std::optional<std::size_t> edge;
  std::int64_t at_ms = 0;
};

struct TrialRecord {
  std::size_t query_index = 0;  // into the dataset's test split
  TrialOutcome outcome = TrialOutcome::kFailure;
  int reward = 0;
  std::vector<ActionRecord> actions;
  std::vector<NodeId> visited;
};

struct SessionOptions {
  // Milliseconds since the epoch.
  std::function<std::int64_t()> clock;
  // Session token source. Defaults to 128 random bits in hex.
  std::function<std::string()> token;
  // Seeds the per-session query sample.
  std::uint64_t seed = 0;
};

std::string RandomToken();

// Human-trial sessions over one shared graph. Every session writes an
// append-only JSON-lines transcript under `store`; constructing a manager
// replays whatever transcripts are already there.
class SessionManager {
 public:
  SessionManager(const NavGraph& graph,
                 std::map<std::string, DatasetSplits> datasets,
                 std::filesystem::path store, SessionOptions options = {});
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  nlohmann::json Datasets() const;
  std::string CreateSession(const std::string& dataset,
                            const SessionLimits& limits);
  nlohmann::json GetObservation(const std::string& session);
  // `action` is {"type": "peek|move|stop|giveup", "edge": int?}.
  nlohmann::json Act(const std::string& session, const nlohmann::json& action);
  nlohmann::json Summary(const std::string& session);

  std::vector<std::string> SessionIds() const;
  std::filesystem::path TranscriptPath(const std::string& session) const;

  struct Session;

 private:
  std::shared_ptr<Session> Find(const std::string& id) const;
  void Replay(const std::filesystem::path& file);

  const NavGraph& graph_;
  std::map<std::string, DatasetSplits> datasets_;
  std::filesystem::path store_;
  SessionOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t created_ = 0;
};

// Summary recomputed from a transcript file alone, replaying every trial
// through a fresh episode. Throws DataError if a recorded outcome does not
// reproduce.
nlohmann::json ReplayTranscriptSummary(const NavGraph& graph,
                                       const DatasetSplits& dataset,
                                       const std::filesystem::path& transcript);

// Every subdirectory of `dir` holding a meta.json, keyed by directory name.
// Datasets built over a different graph are skipped with a warning.
std::map<std::string, DatasetSplits> LoadDatasetDirectory(
    const std::filesystem::path& dir, const NavGraph& graph);

}  // namespace webnav
