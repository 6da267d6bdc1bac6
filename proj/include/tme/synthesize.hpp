#pragma once

// Prompt synthesis from tree state. Path mode walks root -> current and
// replays only those nodes' dialogues; summary mode replays every live
// node's full history (used for review/submit rounds). Invalidated nodes
// never contribute a turn.

#include <algorithm>
#include <set>
#include <vector>

#include "tme/transcript.hpp"
#include "tme/tree.hpp"

namespace tme {

struct SynthesisPolicy {
  bool include_root_context = true;
  bool include_dependency_nodes = false;
  bool summary_mode = false;
};

namespace detail {

// A node's dialogue: each revision as a user turn, followed by the reply
// recorded against it, in round order.
inline void append_dialogue(PromptTranscript& out, const TaskNode& n) {
  for (const RevisionEntry& r : n.revisions) {
    out.push(Role::user, r.text, n.id);
    if (r.reply) out.push(Role::assistant, *r.reply, n.id);
  }
}

}  // namespace detail

inline PromptTranscript synthesize(const TaskTree& tree, const SynthesisPolicy& policy = {}) {
  PromptTranscript out;
  const TaskNode& root = tree.node(tree.root());
  bool root_live = root.status != TaskStatus::invalidated;
  if (policy.include_root_context && root_live) detail::append_dialogue(out, root);

  if (policy.summary_mode) {
    for (const auto& [id, n] : tree.nodes()) {
      if (id == tree.root() || id == tree.current()) continue;
      if (n.status == TaskStatus::invalidated) continue;
      detail::append_dialogue(out, n);
    }
    if (tree.current() != tree.root()) {
      const TaskNode& cur = tree.node(tree.current());
      if (cur.status != TaskStatus::invalidated) detail::append_dialogue(out, cur);
    }
    return out;
  }

  std::vector<NodeId> path = tree.active_path();
  if (policy.include_dependency_nodes) {
    std::set<NodeId> on_path(path.begin(), path.end());
    std::set<NodeId> extras;
    for (NodeId id : path)
      for (const Dependency& d : tree.node(id).dependencies)
        if (d.kind == DependencyKind::depends_on && !on_path.count(d.to) &&
            d.to != tree.root())
          extras.insert(d.to);
    for (NodeId id : extras) {
      const TaskNode& n = tree.node(id);
      if (n.status != TaskStatus::invalidated) detail::append_dialogue(out, n);
    }
  }
  for (NodeId id : path) {
    if (id == tree.root()) continue;
    const TaskNode& n = tree.node(id);
    if (n.status == TaskStatus::invalidated) continue;
    detail::append_dialogue(out, n);
  }
  return out;
}

}  // namespace tme
