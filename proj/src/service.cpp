#include "webnav/service.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>

#include "webnav/log.hpp"
#include "webnav/text.hpp"

namespace webnav {

using nlohmann::json;

std::string_view TrialOutcomeName(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::kSuccess: return "success";
    case TrialOutcome::kFailure: return "failure";
    case TrialOutcome::kGaveUp: return "gave-up";
    case TrialOutcome::kTimeout: return "timeout";
  }
  return "?";
}

std::string RandomToken() {
  std::random_device device;
  std::string token;
  for (int i = 0; i < 4; ++i) {
    const std::uint32_t word = device();
    static constexpr char kHex[] = "0123456789abcdef";
    for (int shift = 28; shift >= 0; shift -= 4) token += kHex[(word >> shift) & 0xf];
  }
  return token;
}

namespace {

std::int64_t SystemMillis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

[[noreturn]] void BadRequest(const std::string& message) {
  throw ServiceError(400, "BadRequest", message);
}

}  // namespace

// Session state without locking or IO. Live calls and transcript replay both
// drive it through the same Apply* functions.
struct SessionManager::Session {
  std::mutex mutex;
  std::string id;
  std::string dataset;
  const DatasetSplits* data = nullptr;
  SessionLimits limits;
  EnvConfig env;
  std::vector<std::size_t> queries;
  std::size_t cursor = 0;
  std::optional<Episode> episode;
  std::vector<ActionRecord> pending;
  std::int64_t started_ms = 0;
  std::vector<TrialRecord> trials;
  bool closed = false;
  bool expired = false;
  std::filesystem::path file;
};

namespace {

using Session = SessionManager::Session;

void StartTrial(Session& s, const NavGraph& graph) {
  s.pending.clear();
  if (s.cursor < s.queries.size()) {
    s.episode.emplace(graph, s.data->test[s.queries[s.cursor]], s.env);
  } else {
    s.episode.reset();
    s.closed = true;
  }
}

void FinishTrial(Session& s, const NavGraph& graph, TrialOutcome outcome, int reward) {
  TrialRecord record;
  record.query_index = s.queries[s.cursor];
  record.outcome = outcome;
  record.reward = reward;
  record.actions = s.pending;
  record.visited = s.episode->Visited();
  s.trials.push_back(std::move(record));
  ++s.cursor;
  StartTrial(s, graph);
}

void ApplyTimeout(Session& s, const NavGraph& graph, std::int64_t at_ms) {
  (void)at_ms;
  if (s.episode) {
    FinishTrial(s, graph, TrialOutcome::kTimeout, 0);
  }
  s.episode.reset();
  s.closed = true;
  s.expired = true;
}

struct ParsedAction {
  std::string type;
  std::optional<std::size_t> edge;
};

ParsedAction ParseAction(const json& action) {
  if (!action.is_object()) BadRequest("action must be a JSON object");
  const auto type_it = action.find("type");
  if (type_it == action.end() || !type_it->is_string()) BadRequest("action needs a string \"type\"");
  ParsedAction parsed{type_it->get<std::string>(), std::nullopt};
  const bool needs_edge = parsed.type == "peek" || parsed.type == "move";
  if (!needs_edge && parsed.type != "stop" && parsed.type != "giveup") {
    BadRequest("unknown action type '" + parsed.type + "'");
  }
  if (needs_edge) {
    const auto edge_it = action.find("edge");
    if (edge_it == action.end() || !edge_it->is_number_integer()) {
      BadRequest(parsed.type + " needs an integer \"edge\"");
    }
    const auto edge = edge_it->get<std::int64_t>();
    if (edge < 0) throw EnvError(EnvErrorCode::kIndexError, "negative edge index");
    parsed.edge = static_cast<std::size_t>(edge);
  }
  return parsed;
}

// Returns the trial outcome when the action completed a trial.
std::optional<TrialRecord> ApplyAction(Session& s, const NavGraph& graph,
                                       const ParsedAction& action,
                                       std::int64_t at_ms) {
  if (s.expired) throw ServiceError(410, "SessionExpired", "session time budget is used up");
  if (s.closed || !s.episode) throw ServiceError(409, "SessionClosed", "session has no live trial");
  Episode& episode = *s.episode;
  if (action.type == "peek") {
    episode.Peek(*action.edge);
  } else if (action.type == "move") {
    episode.Move(*action.edge);
  } else if (action.type == "stop") {
    episode.Stop();
  } else {
    episode.GiveUp();
  }
  s.pending.push_back({action.type, action.edge, at_ms});
  if (!episode.Finished()) return std::nullopt;
  TrialOutcome outcome = TrialOutcome::kFailure;
  if (episode.GetOutcome() == Outcome::kGaveUp) outcome = TrialOutcome::kGaveUp;
  if (episode.GetOutcome() == Outcome::kStopped && episode.Reward() == 1) {
    outcome = TrialOutcome::kSuccess;
  }
  FinishTrial(s, graph, outcome, episode.GetOutcome() == Outcome::kStopped ? episode.Reward() : 0);
  return s.trials.back();
}

json ObservationJson(const Session& s, const NavGraph& graph, std::int64_t now_ms) {
  const Observation obs = s.episode->Observe();
  json peeked = json::array();
  for (const auto& [edge, neighbor] : obs.peeked) {
    peeked.push_back({{"edge", edge}, {"title", neighbor.title}, {"text", neighbor.text}});
  }
  (void)graph;
  const std::int64_t deadline = s.started_ms + s.limits.time_budget_seconds * 1000;
  return {
      {"session", s.id},
      {"dataset", s.dataset},
      {"trial", s.cursor},
      {"trials_total", s.queries.size()},
      {"query", obs.query},
      {"node", obs.node},
      {"title", obs.title},
      {"text", obs.text},
      {"links", obs.link_titles},
      {"peeked", peeked},
      {"remaining_peeks", obs.remaining_peeks},
      {"hops_taken", obs.hops_taken},
      {"max_hops", s.env.max_hops},
      {"remaining_seconds", std::max<std::int64_t>(0, deadline - now_ms) / 1000.0},
  };
}

json SummaryJson(const Session& s, const NavGraph& graph) {
  json records = json::array();
  std::size_t successes = 0;
  for (const auto& trial : s.trials) {
    if (trial.outcome == TrialOutcome::kSuccess) ++successes;
    json actions = json::array();
    for (const auto& a : trial.actions) {
      json entry = {{"type", a.type}, {"at_ms", a.at_ms}};
      if (a.edge) entry["edge"] = *a.edge;
      actions.push_back(entry);
    }
    const Example& example = s.data->test[trial.query_index];
    records.push_back({
        {"query_index", trial.query_index},
        {"query", example.query},
        {"target", graph.GetNode(example.target).title},
        {"outcome", TrialOutcomeName(trial.outcome)},
        {"reward", trial.reward},
        {"actions", actions},
        {"visited", trial.visited},
    });
  }
  const std::size_t trials = s.trials.size();
  return {
      {"session", s.id},
      {"dataset", s.dataset},
      {"status", s.expired ? "expired" : (s.closed ? "complete" : "live")},
      {"trials", trials},
      {"successes", successes},
      {"average_reward", trials == 0 ? 0.0 : static_cast<double>(successes) / trials},
      {"records", records},
  };
}

EnvConfig SessionEnv(const DatasetSplits& data, const SessionLimits& limits) {
  EnvConfig env;
  env.max_peeks = limits.max_peeks;
  env.max_hops = limits.max_hops ? *limits.max_hops
                                 : (data.meta.max_hops > 0 ? data.meta.max_hops : env.max_hops);
  env.query_size = data.meta.query_size;
  env.allow_blind_moves = false;
  return env;
}

json LimitsJson(const SessionLimits& limits, const EnvConfig& env) {
  return {{"max_queries", limits.max_queries},
          {"time_budget_seconds", limits.time_budget_seconds},
          {"max_peeks", env.max_peeks},
          {"max_hops", env.max_hops}};
}

void AppendLine(const std::filesystem::path& file, const json& record) {
  std::ofstream out(file, std::ios::app | std::ios::binary);
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw RuntimeFailure("cannot append to transcript " + file.string());
}

// Rebuilds a session from its transcript, checking each recorded result.
std::shared_ptr<Session> ReplaySession(
    const NavGraph& graph,
    const std::function<const DatasetSplits*(const std::string&)>& lookup,
    const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read transcript " + file.string());
  auto s = std::make_shared<Session>();
  s->file = file;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& message) {
    throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + message);
  };
  bool created = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      fail(std::string("bad JSON: ") + e.what());
    }
    const std::string event = record.value("event", "");
    try {
      if (event == "create") {
        if (created) fail("second create record");
        created = true;
        s->id = record.at("session").get<std::string>();
        s->dataset = record.at("dataset").get<std::string>();
        s->data = lookup(s->dataset);
        if (!s->data) fail("unknown dataset '" + s->dataset + "'");
        const json& limits = record.at("limits");
        s->limits.max_queries = limits.at("max_queries").get<int>();
        s->limits.time_budget_seconds = limits.at("time_budget_seconds").get<std::int64_t>();
        s->limits.max_peeks = limits.at("max_peeks").get<int>();
        s->limits.max_hops = limits.at("max_hops").get<int>();
        s->env = SessionEnv(*s->data, s->limits);
        s->queries = record.at("queries").get<std::vector<std::size_t>>();
        for (auto q : s->queries) {
          if (q >= s->data->test.size()) fail("query index out of range");
        }
        s->started_ms = record.at("at_ms").get<std::int64_t>();
        StartTrial(*s, graph);
      } else if (!created) {
        fail("transcript does not start with a create record");
      } else if (event == "action") {
        ParsedAction action{record.at("type").get<std::string>(), std::nullopt};
        if (record.contains("edge")) action.edge = record.at("edge").get<std::size_t>();
        const std::string expected_error = record.value("error", "");
        std::string got_error;
        std::optional<TrialRecord> finished;
        try {
          finished = ApplyAction(*s, graph, action, record.at("at_ms").get<std::int64_t>());
        } catch (const EnvError& e) {
          got_error = std::string(EnvErrorName(e.code()));
        } catch (const ServiceError& e) {
          got_error = e.code();
        }
        if (got_error != expected_error) {
          fail("replayed error '" + got_error + "' but transcript has '" + expected_error + "'");
        }
        const std::string expected_outcome = record.value("outcome", "");
        const std::string got_outcome =
            finished ? std::string(TrialOutcomeName(finished->outcome)) : "";
        if (got_outcome != expected_outcome) {
          fail("replayed outcome '" + got_outcome + "' but transcript has '" +
               expected_outcome + "'");
        }
      } else if (event == "timeout") {
        ApplyTimeout(*s, graph, record.at("at_ms").get<std::int64_t>());
      } else {
        fail("unknown event '" + event + "'");
      }
    } catch (const json::exception& e) {
      fail(std::string("malformed record: ") + e.what());
    }
  }
  if (!created) throw DataError(file.string() + ": empty transcript");
  return s;
}

}  // namespace

SessionManager::SessionManager(const NavGraph& graph,
                               std::map<std::string, DatasetSplits> datasets,
                               std::filesystem::path store, SessionOptions options)
    : graph_(graph),
      datasets_(std::move(datasets)),
      store_(std::move(store)),
      options_(std::move(options)) {
  if (!options_.clock) options_.clock = SystemMillis;
  if (!options_.token) options_.token = RandomToken;
  std::filesystem::create_directories(store_);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(store_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    try {
      Replay(file);
    } catch (const DataError& e) {
      Warn(std::string("skipping transcript: ") + e.what());
    }
  }
}

SessionManager::~SessionManager() = default;

void SessionManager::Replay(const std::filesystem::path& file) {
  auto session = ReplaySession(
      graph_,
      [this](const std::string& name) -> const DatasetSplits* {
        const auto it = datasets_.find(name);
        return it == datasets_.end() ? nullptr : &it->second;
      },
      file);
  std::lock_guard lock(mutex_);
  sessions_[session->id] = std::move(session);
  ++created_;
}

json SessionManager::Datasets() const {
  json out = json::array();
  for (const auto& [name, data] : datasets_) {
    out.push_back({{"id", name},
                   {"kind", data.meta.kind},
                   {"nh", data.meta.max_hops},
                   {"nq", data.meta.query_size},
                   {"train", data.train.size()},
                   {"valid", data.valid.size()},
                   {"test", data.test.size()}});
  }
  return out;
}

std::string SessionManager::CreateSession(const std::string& dataset,
                                          const SessionLimits& limits) {
  const auto it = datasets_.find(dataset);
  if (it == datasets_.end()) {
    throw ServiceError(404, "UnknownDataset", "no dataset named '" + dataset + "'");
  }
  if (limits.max_queries < 1) BadRequest("max_queries must be at least 1");
  if (limits.time_budget_seconds < 1) BadRequest("time_budget_seconds must be at least 1");
  if (limits.max_peeks < 1) BadRequest("N_n must be at least 1");
  if (limits.max_hops && *limits.max_hops < 1) BadRequest("N_h must be at least 1");
  const DatasetSplits& data = it->second;
  if (data.test.empty()) {
    throw ServiceError(409, "EmptyDataset", "dataset '" + dataset + "' has no test queries");
  }

  auto s = std::make_shared<Session>();
  std::uint64_t ordinal;
  {
    std::lock_guard lock(mutex_);
    ordinal = created_++;
    do {
      s->id = options_.token();
    } while (sessions_.count(s->id));
  }
  s->dataset = dataset;
  s->data = &data;
  s->limits = limits;
  s->env = SessionEnv(data, limits);
  s->limits.max_hops = s->env.max_hops;

  std::vector<std::size_t> order(data.test.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(options_.seed ^ (0x9e3779b97f4a7c15ULL * (ordinal + 1)));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[UniformIndex(rng, i)]);
  }
  order.resize(std::min<std::size_t>(order.size(), limits.max_queries));
  s->queries = order;
  s->started_ms = options_.clock();
  s->file = store_ / (s->id + ".jsonl");

  AppendLine(s->file, {{"event", "create"},
                       {"session", s->id},
                       {"dataset", dataset},
                       {"graph_checksum", ToHex(graph_.Checksum())},
                       {"limits", LimitsJson(s->limits, s->env)},
                       {"queries", s->queries},
                       {"at_ms", s->started_ms}});
  StartTrial(*s, graph_);
  std::lock_guard lock(mutex_);
  const std::string id = s->id;
  sessions_[id] = std::move(s);
  return id;
}

std::shared_ptr<SessionManager::Session> SessionManager::Find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "UnknownSession", "no such session");
  return it->second;
}

namespace {

// Records a lazily noticed timeout. Caller holds the session lock.
void CheckExpiry(Session& s, const NavGraph& graph, std::int64_t now_ms) {
  if (s.expired || s.closed) return;
  if (now_ms - s.started_ms < s.limits.time_budget_seconds * 1000) return;
  ApplyTimeout(s, graph, now_ms);
  AppendLine(s.file, {{"event", "timeout"}, {"at_ms", now_ms}});
}

}  // namespace

json SessionManager::GetObservation(const std::string& id) {
  auto s = Find(id);
  std::lock_guard lock(s->mutex);
  const std::int64_t now = options_.clock();
  CheckExpiry(*s, graph_, now);
  if (s->expired) throw ServiceError(410, "SessionExpired", "session time budget is used up");
  if (s->closed) throw ServiceError(409, "SessionClosed", "all trials are done");
  return ObservationJson(*s, graph_, now);
}

json SessionManager::Act(const std::string& id, const json& action) {
  auto s = Find(id);
  std::lock_guard lock(s->mutex);
  const std::int64_t now = options_.clock();
  CheckExpiry(*s, graph_, now);
  const ParsedAction parsed = ParseAction(action);

  json record = {{"event", "action"}, {"type", parsed.type}, {"at_ms", now}};
  if (parsed.edge) record["edge"] = *parsed.edge;
  std::optional<TrialRecord> finished;
  try {
    finished = ApplyAction(*s, graph_, parsed, now);
  } catch (const EnvError& e) {
    record["error"] = std::string(EnvErrorName(e.code()));
    AppendLine(s->file, record);
    throw;
  }
  if (finished) record["outcome"] = std::string(TrialOutcomeName(finished->outcome));
  AppendLine(s->file, record);

  json result = {{"type", parsed.type},
                 {"trial_complete", finished.has_value()},
                 {"session_complete", s->closed}};
  if (parsed.edge) result["edge"] = *parsed.edge;
  if (finished) {
    result["reward"] = finished->reward;
    result["outcome"] = std::string(TrialOutcomeName(finished->outcome));
  }
  if (!s->closed) result["observation"] = ObservationJson(*s, graph_, now);
  return result;
}

json SessionManager::Summary(const std::string& id) {
  auto s = Find(id);
  std::lock_guard lock(s->mutex);
  CheckExpiry(*s, graph_, options_.clock());
  return SummaryJson(*s, graph_);
}

std::vector<std::string> SessionManager::SessionIds() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

std::filesystem::path SessionManager::TranscriptPath(const std::string& session) const {
  return Find(session)->file;
}

json ReplayTranscriptSummary(const NavGraph& graph, const DatasetSplits& dataset,
                             const std::filesystem::path& transcript) {
  auto s = ReplaySession(
      graph, [&](const std::string&) { return &dataset; }, transcript);
  return SummaryJson(*s, graph);
}

std::map<std::string, DatasetSplits> LoadDatasetDirectory(const std::filesystem::path& dir,
                                                          const NavGraph& graph) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("dataset directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> candidates;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta.json")) {
      candidates.push_back(entry.path());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::map<std::string, DatasetSplits> out;
  for (const auto& path : candidates) {
    DatasetSplits data = ReadDataset(path);
    if (data.meta.graph_checksum != graph.Checksum()) {
      Warn("skipping dataset " + path.filename().string() + ": built for another graph");
      continue;
    }
    out.emplace(path.filename().string(), std::move(data));
  }
  return out;
}

}  // namespace webnav
