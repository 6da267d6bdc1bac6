#pragma once

// Role-tagged prompt transcripts and their rendered text form. Each turn
// remembers which tree node produced it, so tests can audit provenance.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tme/tree.hpp"

namespace tme {

enum class Role { user, assistant, system };

inline const char* to_string(Role role) {
  switch (role) {
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::system: return "system";
  }
  return "unknown";
}

inline const char* role_label(Role role) {
  switch (role) {
    case Role::user: return "User";
    case Role::assistant: return "Assistant";
    case Role::system: return "System";
  }
  return "Unknown";
}

struct Turn {
  Role role = Role::user;
  std::string text;
  std::optional<NodeId> source;

  friend bool operator==(const Turn& a, const Turn& b) {
    return a.role == b.role && a.text == b.text;
  }
};

struct PromptTranscript {
  std::vector<Turn> turns;

  // Adjacent identical turns collapse; transcripts never repeat themselves
  // back to back.
  void push(Role role, std::string text, std::optional<NodeId> source = std::nullopt) {
    Turn turn{role, std::move(text), source};
    if (!turns.empty() && turns.back() == turn) return;
    turns.push_back(std::move(turn));
  }

  bool empty() const { return turns.empty(); }
  std::size_t size() const { return turns.size(); }

  friend bool operator==(const PromptTranscript&, const PromptTranscript&) = default;
};

// "User: ..." / "Assistant: ..." lines joined by newlines.
inline std::string render(const PromptTranscript& transcript) {
  std::string out;
  for (const Turn& turn : transcript.turns) {
    if (!out.empty()) out.push_back('\n');
    out += role_label(turn.role);
    out += ": ";
    out += turn.text;
  }
  return out;
}

inline nlohmann::ordered_json transcript_to_json(const PromptTranscript& transcript) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Turn& turn : transcript.turns)
    arr.push_back({{"role", to_string(turn.role)},
                   {"text", turn.text},
                   {"source_node", turn.source ? nlohmann::ordered_json(to_string(*turn.source))
                                               : nlohmann::ordered_json(nullptr)}});
  return arr;
}

}  // namespace tme
