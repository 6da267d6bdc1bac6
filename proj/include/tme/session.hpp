#pragma once

// End-to-end session driver: loads replayable scripts, routes each user turn
// through relationship inference (tree policy) or plain history replay
// (baseline policy), talks to a model client, and accounts tokens per round.

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tme/error.hpp"
#include "tme/report.hpp"
#include "tme/synthesize.hpp"
#include "tme/tokenizer.hpp"
#include "tme/transcript.hpp"
#include "tme/tree.hpp"
#include "tme/trim.hpp"

namespace tme {

enum class IntentHint { normal, correction, review_submit };

inline std::optional<IntentHint> intent_hint_from_string(std::string_view s) {
  if (s == "normal") return IntentHint::normal;
  if (s == "correction") return IntentHint::correction;
  if (s == "review_submit") return IntentHint::review_submit;
  return std::nullopt;
}

struct SessionRound {
  std::string user;
  std::string assistant_baseline;
  std::string assistant_tet;
  IntentHint hint = IntentHint::normal;
};

struct SessionScript {
  std::string root_action = "Task";
  std::vector<SessionRound> rounds;
};

namespace detail {

inline SessionRound round_from_json(const nlohmann::ordered_json& j, const std::string& path) {
  if (!j.is_object()) fail(ErrorCode::schema_error, path + ": expected a round object");
  SessionRound round;
  if (!j.contains("user") || !j["user"].is_string() || j["user"].get<std::string>().empty())
    fail(ErrorCode::schema_error, path + "/user: expected non-empty text");
  round.user = j["user"].get<std::string>();
  if (j.contains("assistant")) {
    round.assistant_baseline = j["assistant"].get<std::string>();
    round.assistant_tet = round.assistant_baseline;
  } else {
    if (!j.contains("assistant_baseline") || !j["assistant_baseline"].is_string())
      fail(ErrorCode::schema_error, path + "/assistant_baseline: expected text");
    round.assistant_baseline = j["assistant_baseline"].get<std::string>();
    round.assistant_tet = j.contains("assistant_tet")
                              ? j["assistant_tet"].get<std::string>()
                              : round.assistant_baseline;
  }
  if (round.assistant_baseline.empty() || round.assistant_tet.empty())
    fail(ErrorCode::schema_error, path + ": assistant text must be non-empty");
  if (j.contains("intent_hint") && !j["intent_hint"].is_null()) {
    std::string hint = j["intent_hint"].get<std::string>();
    auto parsed = intent_hint_from_string(hint);
    if (!parsed)
      fail(ErrorCode::schema_error, path + "/intent_hint: unknown hint '" + hint + "'");
    round.hint = *parsed;
  }
  return round;
}

}  // namespace detail

// Accepts either a single JSON document {"root_action", "rounds": [...]} or
// JSONL with one round object per line.
inline SessionScript parse_script(const std::string& text) {
  SessionScript script;
  nlohmann::ordered_json doc;
  bool parsed = false;
  try {
    doc = nlohmann::ordered_json::parse(text);
    parsed = true;
  } catch (const nlohmann::json::parse_error&) {
    // fall through to JSONL
  }
  if (parsed && doc.is_object()) {
    if (doc.contains("root_action")) script.root_action = doc["root_action"].get<std::string>();
    if (!doc.contains("rounds") || !doc["rounds"].is_array())
      fail(ErrorCode::schema_error, "/rounds: expected an array");
    for (std::size_t i = 0; i < doc["rounds"].size(); ++i)
      script.rounds.push_back(
          detail::round_from_json(doc["rounds"][i], "/rounds/" + std::to_string(i)));
  } else {
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::ordered_json row;
      try {
        row = nlohmann::ordered_json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::schema_error,
             "line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
      }
      script.rounds.push_back(
          detail::round_from_json(row, "line " + std::to_string(line_no)));
    }
  }
  if (script.rounds.empty()) fail(ErrorCode::schema_error, "script has no rounds");
  if (script.root_action.empty()) fail(ErrorCode::schema_error, "/root_action: empty");
  return script;
}

// ---------------------------------------------------------------------------
// Model clients.

struct ModelClient {
  virtual ~ModelClient() = default;
  virtual std::string complete(const PromptTranscript& prompt) = 0;
  virtual std::string name() const = 0;
};

// Replays the scripted reply for each successive call; the prompt is ignored
// (it is still counted by the caller).
class ScriptedClient final : public ModelClient {
 public:
  explicit ScriptedClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}

  std::string complete(const PromptTranscript&) override {
    std::size_t at = next_.fetch_add(1);
    if (at >= replies_.size())
      fail(ErrorCode::illegal_state, "scripted client exhausted after " +
                                         std::to_string(replies_.size()) + " replies");
    return replies_[at];
  }

  std::string name() const override { return "scripted"; }

 private:
  std::vector<std::string> replies_;
  std::atomic<std::size_t> next_ = 0;
};

// Factories receive the per-method scripted replies so the scripted client
// can be built per run; network-backed clients ignore them.
using ClientFactory =
    std::function<std::unique_ptr<ModelClient>(const std::vector<std::string>& replies)>;

inline std::map<std::string, ClientFactory>& client_registry() {
  static std::map<std::string, ClientFactory> registry{
      {"scripted", [](const std::vector<std::string>& replies) {
         return std::make_unique<ScriptedClient>(replies);
       }}};
  return registry;
}

inline std::unique_ptr<ModelClient> make_client(const std::string& name,
                                                const std::vector<std::string>& replies) {
  auto& registry = client_registry();
  auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::not_found, "no model client '" + name + "'");
  return it->second(replies);
}

// ---------------------------------------------------------------------------
// Baseline policy: the full prior conversation plus the new user turn.

inline PromptTranscript baseline_prompt(const std::vector<Turn>& history,
                                        const std::string& current_user) {
  PromptTranscript out;
  for (const Turn& turn : history) out.push(turn.role, turn.text, turn.source);
  out.push(Role::user, current_user);
  return out;
}

// ---------------------------------------------------------------------------

enum class SessionMode { tet, baseline, both };

inline std::optional<SessionMode> session_mode_from_string(std::string_view s) {
  if (s == "tet") return SessionMode::tet;
  if (s == "baseline") return SessionMode::baseline;
  if (s == "both") return SessionMode::both;
  return std::nullopt;
}

struct RoundRecord {
  int round = 0;
  PromptTranscript prompt_tet;
  PromptTranscript prompt_baseline;
  std::string reply_tet;
  std::string reply_baseline;
  std::optional<InferenceResult> inference;  // tet rounds after the first
};

struct SessionResult {
  std::optional<TaskTree> tet_tree;
  std::optional<TaskTree> baseline_tree;
  std::vector<RoundRecord> rounds;
  TokenReport report;
  std::vector<std::string> warnings;

  // The tree policy's final tree when it ran, otherwise the baseline chain.
  const TaskTree& final_tree() const {
    if (tet_tree) return *tet_tree;
    if (baseline_tree) return *baseline_tree;
    fail(ErrorCode::illegal_state, "session produced no tree");
  }
};

struct SessionOptions {
  SessionMode mode = SessionMode::both;
  std::string client = "scripted";
  CostModel cost;
  TrimConfig trim;
};

inline SessionResult run_session(const SessionScript& script, const SessionOptions& options) {
  if (script.rounds.empty()) fail(ErrorCode::schema_error, "script has no rounds");
  bool run_tet = options.mode != SessionMode::baseline;
  bool run_baseline = options.mode != SessionMode::tet;

  SessionResult result;
  result.rounds.resize(script.rounds.size());

  std::unique_ptr<ModelClient> tet_client, baseline_client;
  if (run_tet) {
    std::vector<std::string> replies;
    for (const SessionRound& r : script.rounds) replies.push_back(r.assistant_tet);
    tet_client = make_client(options.client, replies);
  }
  if (run_baseline) {
    std::vector<std::string> replies;
    for (const SessionRound& r : script.rounds) replies.push_back(r.assistant_baseline);
    baseline_client = make_client(options.client, replies);
  }

  std::optional<TaskTree> tet_tree;
  std::optional<TaskTree> baseline_tree;
  std::vector<Turn> history;  // baseline transcript so far
  NodeId baseline_tail;

  for (std::size_t i = 0; i < script.rounds.size(); ++i) {
    const SessionRound& round = script.rounds[i];
    RoundRecord& record = result.rounds[i];
    record.round = static_cast<int>(i) + 1;
    try {
      if (run_tet) {
        if (!tet_tree) {
          tet_tree = new_tree(script.root_action);
          tet_tree->record_io(tet_tree->root(), round.user, std::nullopt);
        } else {
          InferenceResult inferred =
              infer_structural_relationship(round.user, *tet_tree, options.trim);
          record.inference = inferred;
          if (round.hint == IntentHint::correction &&
              inferred.label != RelationshipLabel::merge &&
              inferred.label != RelationshipLabel::replaces &&
              inferred.label != RelationshipLabel::rollback)
            result.warnings.push_back("round " + std::to_string(record.round) +
                                      ": hint 'correction' but inferred '" +
                                      to_string(inferred.label) + "'");
          apply(*tet_tree, inferred, round.user);
        }
        NodeId current = tet_tree->current();
        if (tet_tree->node(current).status == TaskStatus::waiting)
          tet_tree->set_status(current, TaskStatus::active);

        SynthesisPolicy policy;
        policy.summary_mode = round.hint == IntentHint::review_submit;
        record.prompt_tet = synthesize(*tet_tree, policy);
        record.reply_tet = tet_client->complete(record.prompt_tet);
        tet_tree->record_io(current, std::nullopt, record.reply_tet);
        if (current != tet_tree->root() &&
            tet_tree->node(current).status == TaskStatus::active)
          tet_tree->set_status(current, TaskStatus::done);
        tet_tree->advance_round();
      }

      if (run_baseline) {
        record.prompt_baseline = baseline_prompt(history, round.user);
        record.reply_baseline = baseline_client->complete(record.prompt_baseline);
        history.push_back({Role::user, round.user, std::nullopt});
        history.push_back({Role::assistant, record.reply_baseline, std::nullopt});

        if (!baseline_tree) {
          baseline_tree = new_tree(script.root_action);
          baseline_tail = baseline_tree->root();
          baseline_tree->record_io(baseline_tail, round.user, std::nullopt);
        } else {
          baseline_tail = baseline_tree->add_child(baseline_tail, round.user, round.user);
          baseline_tree->focus(baseline_tail);
          baseline_tree->set_status(baseline_tail, TaskStatus::active);
        }
        baseline_tree->record_io(baseline_tail, std::nullopt, record.reply_baseline);
        if (baseline_tail != baseline_tree->root())
          baseline_tree->set_status(baseline_tail, TaskStatus::done);
        baseline_tree->advance_round();
      }
    } catch (const Error& e) {
      fail(e.code(), "round " + std::to_string(record.round) + ": " + e.what());
    }

    TokenRow row;
    row.round = record.round;
    if (run_baseline) {
      row.prompt_baseline = count_tokens(options.cost, record.prompt_baseline);
      PromptTranscript reply;
      reply.push(Role::assistant, record.reply_baseline);
      row.completion_baseline = count_tokens(options.cost, reply);
    }
    if (run_tet) {
      row.prompt_tet = count_tokens(options.cost, record.prompt_tet);
      PromptTranscript reply;
      reply.push(Role::assistant, record.reply_tet);
      row.completion_tet = count_tokens(options.cost, reply);
    }
    row.total_baseline = row.prompt_baseline + row.completion_baseline;
    row.total_tet = row.prompt_tet + row.completion_tet;
    result.report.rows.push_back(row);
  }

  result.tet_tree = std::move(tet_tree);
  result.baseline_tree = std::move(baseline_tree);
  return result;
}

inline SessionResult run_session(const SessionScript& script, SessionMode mode,
                                 const std::string& client_name,
                                 const std::string& tokenizer_name) {
  SessionOptions options;
  options.mode = mode;
  options.client = client_name;
  options.cost.tokenizer = tokenizer_name;
  return run_session(script, options);
}

// Runs the script under both policies and returns the token comparison.
inline TokenReport compare_session(const SessionScript& script, const CostModel& cost) {
  SessionOptions options;
  options.cost = cost;
  return run_session(script, options).report;
}

inline TokenReport compare_session(const SessionScript& script,
                                   const std::string& tokenizer_name) {
  return compare_session(script, CostModel{tokenizer_name, 0});
}

}  // namespace tme
