#pragma once

// Hierarchical task memory. Each node records one task step (action, I/O,
// status, revision history); the tree tracks parent/child structure,
// cross-branch dependency links and a `current` focus pointer. Mutations
// either succeed completely or throw without touching the tree.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tme/error.hpp"

namespace tme {

struct NodeId {
  std::uint64_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

inline std::string to_string(NodeId id) { return std::to_string(id.value); }

enum class TaskStatus { waiting, active, done, failed, invalidated };

inline const char* to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::waiting: return "waiting";
    case TaskStatus::active: return "active";
    case TaskStatus::done: return "done";
    case TaskStatus::failed: return "failed";
    case TaskStatus::invalidated: return "invalidated";
  }
  return "unknown";
}

inline std::optional<TaskStatus> status_from_string(std::string_view s) {
  if (s == "waiting") return TaskStatus::waiting;
  if (s == "active") return TaskStatus::active;
  if (s == "done") return TaskStatus::done;
  if (s == "failed") return TaskStatus::failed;
  if (s == "invalidated") return TaskStatus::invalidated;
  return std::nullopt;
}

// The only transitions set_status() accepts. Rollback and replacement use a
// privileged internal path and may additionally invalidate failed nodes.
inline bool transition_allowed(TaskStatus from, TaskStatus to) {
  switch (from) {
    case TaskStatus::waiting:
      return to == TaskStatus::active || to == TaskStatus::invalidated;
    case TaskStatus::active:
      return to == TaskStatus::done || to == TaskStatus::failed ||
             to == TaskStatus::invalidated;
    case TaskStatus::done:
      return to == TaskStatus::invalidated;
    case TaskStatus::failed:
    case TaskStatus::invalidated:
      return false;
  }
  return false;
}

enum class RevisionKind { initial, correction };

inline const char* to_string(RevisionKind kind) {
  return kind == RevisionKind::initial ? "initial" : "correction";
}

inline std::optional<RevisionKind> revision_kind_from_string(std::string_view s) {
  if (s == "initial") return RevisionKind::initial;
  if (s == "correction") return RevisionKind::correction;
  return std::nullopt;
}

struct RevisionEntry {
  int round = 0;
  RevisionKind kind = RevisionKind::initial;
  std::string text;
  // Assistant output recorded while this entry was the newest one. Keeping
  // the pairing lets a merged node replay its whole dialogue.
  std::optional<std::string> reply;

  friend bool operator==(const RevisionEntry&, const RevisionEntry&) = default;
};

enum class DependencyKind { depends_on, parallel_with, replaces };

inline const char* to_string(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::depends_on: return "depends_on";
    case DependencyKind::parallel_with: return "parallel_with";
    case DependencyKind::replaces: return "replaces";
  }
  return "unknown";
}

inline std::optional<DependencyKind> dependency_kind_from_string(std::string_view s) {
  if (s == "depends_on") return DependencyKind::depends_on;
  if (s == "parallel_with") return DependencyKind::parallel_with;
  if (s == "replaces") return DependencyKind::replaces;
  return std::nullopt;
}

// Stored on the source node; the link reads "<owner> <kind> <to>".
struct Dependency {
  NodeId to;
  DependencyKind kind = DependencyKind::depends_on;

  friend bool operator==(const Dependency&, const Dependency&) = default;
};

struct TaskNode {
  NodeId id;
  std::string action;
  std::optional<std::string> input;   // latest recorded input
  std::optional<std::string> output;  // latest recorded output
  TaskStatus status = TaskStatus::waiting;
  std::optional<NodeId> parent;  // absent only for the root
  std::vector<NodeId> children;
  std::vector<Dependency> dependencies;
  std::vector<RevisionEntry> revisions;
  int retry_count = 0;
  std::optional<std::string> error;

  const std::string* latest_revision_text() const {
    return revisions.empty() ? nullptr : &revisions.back().text;
  }

  int latest_revision_round() const {
    return revisions.empty() ? 0 : revisions.back().round;
  }

  friend bool operator==(const TaskNode&, const TaskNode&) = default;
};

class TaskTree {
 public:
  // Builds a one-node tree whose root starts active.
  static TaskTree create(const std::string& root_action) {
    if (root_action.empty()) fail(ErrorCode::invalid_argument, "root action is empty");
    TaskTree tree;
    TaskNode root;
    root.id = NodeId{1};
    root.action = root_action;
    root.status = TaskStatus::active;
    tree.nodes_.emplace(root.id, std::move(root));
    tree.root_ = NodeId{1};
    tree.current_ = NodeId{1};
    tree.next_id_ = 2;
    tree.next_round_ = 1;
    return tree;
  }

  // Reassembles a tree from deserialized parts, validating every invariant.
  // Violations surface as schema errors that name the offending field.
  static TaskTree restore(NodeId root, NodeId current, int next_round,
                          std::vector<TaskNode> nodes);

  NodeId root() const { return root_; }
  NodeId current() const { return current_; }
  int next_round() const { return next_round_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(NodeId id) const { return nodes_.count(id) != 0; }

  const TaskNode& node(NodeId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) fail(ErrorCode::not_found, "no node " + to_string(id));
    return it->second;
  }

  // Nodes in id (creation) order.
  const std::map<NodeId, TaskNode>& nodes() const { return nodes_; }

  void advance_round() { ++next_round_; }

  NodeId add_child(NodeId parent, const std::string& action,
                   const std::optional<std::string>& input = std::nullopt) {
    const TaskNode& p = node(parent);
    if (p.status == TaskStatus::invalidated)
      fail(ErrorCode::illegal_state, "parent " + to_string(parent) + " is invalidated");
    if (action.empty()) fail(ErrorCode::invalid_argument, "action is empty");

    TaskNode child;
    child.id = NodeId{next_id_++};
    child.action = action;
    child.status = TaskStatus::waiting;
    child.parent = parent;
    if (input) {
      child.input = input;
      child.revisions.push_back({next_round_, RevisionKind::initial, *input, std::nullopt});
    }
    NodeId id = child.id;
    nodes_.emplace(id, std::move(child));
    mut(parent).children.push_back(id);
    return id;
  }

  void set_status(NodeId id, TaskStatus status) {
    TaskNode& n = mut_checked(id);
    if (!transition_allowed(n.status, status))
      fail(ErrorCode::illegal_transition,
           std::string(to_string(n.status)) + " -> " + to_string(status));
    if (status == TaskStatus::done && !n.output)
      fail(ErrorCode::illegal_state, "node " + to_string(id) + " has no output");
    n.status = status;
  }

  // Input text appends a revision entry stamped with the running round;
  // output overwrites (and attaches to the newest revision as its reply).
  void record_io(NodeId id, const std::optional<std::string>& input,
                 const std::optional<std::string>& output) {
    TaskNode& n = mut_checked(id);
    if (n.status == TaskStatus::invalidated)
      fail(ErrorCode::illegal_state, "node " + to_string(id) + " is invalidated");
    if (input) {
      RevisionKind kind =
          n.revisions.empty() ? RevisionKind::initial : RevisionKind::correction;
      n.revisions.push_back({next_round_, kind, *input, std::nullopt});
      n.input = input;
    }
    if (output) {
      n.output = output;
      if (!n.revisions.empty()) n.revisions.back().reply = output;
    }
  }

  std::vector<NodeId> active_path() const {
    std::vector<NodeId> path;
    NodeId at = current_;
    while (true) {
      path.push_back(at);
      const TaskNode& n = nodes_.at(at);
      if (!n.parent) break;
      at = *n.parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Moves the focus pointer. The target must be live.
  void focus(NodeId id) {
    const TaskNode& n = node(id);
    if (n.status == TaskStatus::invalidated)
      fail(ErrorCode::illegal_state, "cannot focus invalidated node " + to_string(id));
    current_ = id;
  }

  // Folds `absorbed` into `survivor`: revision histories are interleaved by
  // round, children and dependency links move over, and the absorbed node
  // disappears. The survivor keeps its id, position, action and status.
  void merge_nodes(NodeId survivor, NodeId absorbed) {
    const TaskNode& s = node(survivor);
    const TaskNode& a = node(absorbed);
    if (survivor == absorbed)
      fail(ErrorCode::illegal_merge, "cannot merge node " + to_string(survivor) + " into itself");
    if (is_ancestor(absorbed, survivor))
      fail(ErrorCode::illegal_merge,
           to_string(absorbed) + " is an ancestor of " + to_string(survivor));

    // Interleave revisions by round (stable: survivor entries first), then
    // normalize kinds so only the earliest entry is `initial`.
    std::vector<RevisionEntry> merged;
    merged.reserve(s.revisions.size() + a.revisions.size());
    merged.insert(merged.end(), s.revisions.begin(), s.revisions.end());
    merged.insert(merged.end(), a.revisions.begin(), a.revisions.end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const RevisionEntry& x, const RevisionEntry& y) {
                       return x.round < y.round;
                     });
    for (std::size_t i = 1; i < merged.size(); ++i)
      if (merged[i].kind == RevisionKind::initial) merged[i].kind = RevisionKind::correction;

    std::vector<NodeId> adopted = a.children;
    std::vector<Dependency> outbound = a.dependencies;
    std::optional<std::string> absorbed_output = a.output;
    NodeId absorbed_parent = *a.parent;  // absorbed is never the root (it would
                                         // be an ancestor of the survivor)

    TaskNode& sm = mut(survivor);
    sm.revisions = std::move(merged);
    if (!sm.revisions.empty()) sm.input = sm.revisions.back().text;
    if (!sm.output && absorbed_output) sm.output = absorbed_output;

    for (NodeId c : adopted) {
      mut(c).parent = survivor;
      sm.children.push_back(c);
    }
    for (const Dependency& d : outbound) {
      if (d.to == survivor) continue;  // would become a self-link
      if (std::find(sm.dependencies.begin(), sm.dependencies.end(), d) ==
          sm.dependencies.end())
        sm.dependencies.push_back(d);
    }
    // Inbound links now point at the survivor.
    for (auto& [id, n] : nodes_) {
      NodeId self = id;
      if (self == absorbed) continue;
      bool touched = false;
      for (auto& d : n.dependencies)
        if (d.to == absorbed) {
          d.to = survivor;
          touched = true;
        }
      if (touched) {
        std::erase_if(n.dependencies, [&](const Dependency& d) { return d.to == self; });
        dedupe_links(n.dependencies);
      }
    }

    auto& siblings = mut(absorbed_parent).children;
    std::erase(siblings, absorbed);
    nodes_.erase(absorbed);
    if (current_ == absorbed) current_ = survivor;
  }

  // Removes invalidated or replaced branches that nothing live still needs:
  // a node goes only if its whole subtree goes, it is off the active path,
  // and no surviving node holds a depends_on link to it. Replacement marks
  // are snapshotted up front (a superseded node stays superseded even if its
  // replacement is pruned too); dependency protection lifts as protectors
  // are removed, so the result is the order-independent closure of the
  // rules. Returns removed ids in ascending order.
  std::vector<NodeId> prune() {
    std::set<NodeId> replaced;
    for (const auto& [id, n] : nodes_)
      for (const Dependency& d : n.dependencies)
        if (d.kind == DependencyKind::replaces && d.to != id) replaced.insert(d.to);
    std::set<NodeId> removed;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [id, n] : nodes_) {
        if (removed.count(id)) continue;
        if (!prunable(id, replaced, removed)) continue;
        removed.insert(id);
        grew = true;
      }
    }
    for (NodeId id : removed) {
      const TaskNode& n = nodes_.at(id);
      if (n.parent && !removed.count(*n.parent)) std::erase(mut(*n.parent).children, id);
    }
    for (NodeId id : removed) nodes_.erase(id);
    for (auto& [id, n] : nodes_)
      std::erase_if(n.dependencies,
                    [&](const Dependency& d) { return removed.count(d.to) != 0; });
    return {removed.begin(), removed.end()};
  }

  // Reverts the focus to an ancestor of the current node, invalidating the
  // abandoned branch below it. A completed or failed target is reopened.
  void rollback_to(NodeId id) {
    const TaskNode& n = node(id);
    if (n.status == TaskStatus::invalidated)
      fail(ErrorCode::illegal_rollback, "node " + to_string(id) + " is invalidated");
    std::vector<NodeId> path = active_path();
    auto it = std::find(path.begin(), path.end(), id);
    if (it == path.end())
      fail(ErrorCode::illegal_rollback,
           to_string(id) + " is not on the path to " + to_string(current_));
    auto next = it + 1;
    if (next != path.end()) invalidate_subtree(*next);
    current_ = id;
    TaskNode& m = mut(id);
    if (m.status == TaskStatus::done || m.status == TaskStatus::failed)
      m.status = TaskStatus::active;
  }

  void add_dependency(NodeId from, NodeId to, DependencyKind kind) {
    TaskNode& f = mut_checked(from);
    node(to);
    if (from == to) fail(ErrorCode::invalid_argument, "self-link on " + to_string(from));
    Dependency link{to, kind};
    if (std::find(f.dependencies.begin(), f.dependencies.end(), link) != f.dependencies.end())
      fail(ErrorCode::duplicate_link,
           to_string(from) + " " + to_string(kind) + " " + to_string(to));
    f.dependencies.push_back(link);
  }

  // Invalidates `target` and appends a replacement sibling carrying a
  // `replaces` link back to it. Returns the replacement, which becomes
  // current. The root cannot be replaced.
  NodeId replace_node(NodeId target, const std::string& action,
                      const std::optional<std::string>& input = std::nullopt) {
    const TaskNode& t = node(target);
    if (!t.parent) fail(ErrorCode::illegal_state, "cannot replace the root");
    if (t.status == TaskStatus::invalidated)
      fail(ErrorCode::illegal_state, "node " + to_string(target) + " is already invalidated");
    if (action.empty()) fail(ErrorCode::invalid_argument, "action is empty");
    NodeId parent = *t.parent;
    if (node(parent).status == TaskStatus::invalidated)
      fail(ErrorCode::illegal_state, "parent " + to_string(parent) + " is invalidated");
    mut(target).status = TaskStatus::invalidated;
    NodeId id = add_child(parent, action, input);
    mut(id).dependencies.push_back({target, DependencyKind::replaces});
    current_ = id;
    return id;
  }

  bool is_ancestor(NodeId ancestor, NodeId descendant) const {
    const TaskNode* n = &node(descendant);
    while (n->parent) {
      if (*n->parent == ancestor) return true;
      n = &nodes_.at(*n->parent);
    }
    return false;
  }

  // Empty result means every structural invariant holds.
  std::vector<std::string> invariant_violations() const;

  void check_invariants() const {
    auto problems = invariant_violations();
    if (!problems.empty()) fail(ErrorCode::illegal_state, problems.front());
  }

  // Structural equality; the id allocator is not part of the value.
  friend bool operator==(const TaskTree& a, const TaskTree& b) {
    return a.root_ == b.root_ && a.current_ == b.current_ &&
           a.next_round_ == b.next_round_ && a.nodes_ == b.nodes_;
  }

 private:
  TaskTree() = default;

  TaskNode& mut(NodeId id) { return nodes_.at(id); }

  TaskNode& mut_checked(NodeId id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) fail(ErrorCode::not_found, "no node " + to_string(id));
    return it->second;
  }

  void invalidate_subtree(NodeId id) {
    TaskNode& n = mut(id);
    if (n.status != TaskStatus::invalidated) n.status = TaskStatus::invalidated;
    for (NodeId c : n.children) invalidate_subtree(c);
  }

  static void dedupe_links(std::vector<Dependency>& links) {
    std::vector<Dependency> kept;
    for (const Dependency& d : links)
      if (std::find(kept.begin(), kept.end(), d) == kept.end()) kept.push_back(d);
    links = std::move(kept);
  }

  bool prunable(NodeId id, const std::set<NodeId>& replaced,
                const std::set<NodeId>& removed) const {
    const TaskNode& n = nodes_.at(id);
    for (NodeId c : n.children)
      if (!removed.count(c)) return false;  // subtrees leave whole
    if (n.status != TaskStatus::invalidated && !replaced.count(id)) return false;
    std::vector<NodeId> path = active_path();
    if (std::find(path.begin(), path.end(), id) != path.end()) return false;
    for (const auto& [other, m] : nodes_) {
      if (other == id || removed.count(other)) continue;
      for (const Dependency& d : m.dependencies)
        if (d.to == id && d.kind == DependencyKind::depends_on) return false;
    }
    return true;
  }

  std::map<NodeId, TaskNode> nodes_;
  NodeId root_;
  NodeId current_;
  std::uint64_t next_id_ = 1;
  int next_round_ = 1;
};

inline TaskTree new_tree(const std::string& root_action) {
  return TaskTree::create(root_action);
}

inline std::vector<std::string> TaskTree::invariant_violations() const {
  std::vector<std::string> out;
  if (nodes_.empty()) {
    out.push_back("tree has no nodes");
    return out;
  }
  std::size_t roots = 0;
  for (const auto& [id, n] : nodes_) {
    if (n.id != id) out.push_back("node " + to_string(id) + " carries id " + to_string(n.id));
    if (!n.parent) {
      ++roots;
      if (id != root_) out.push_back("parentless node " + to_string(id) + " is not the root");
    } else {
      auto pit = nodes_.find(*n.parent);
      if (pit == nodes_.end()) {
        out.push_back("node " + to_string(id) + " has dangling parent " + to_string(*n.parent));
      } else {
        const auto& siblings = pit->second.children;
        if (std::count(siblings.begin(), siblings.end(), id) != 1)
          out.push_back("node " + to_string(id) + " missing from parent child list");
      }
    }
    std::set<NodeId> seen;
    for (NodeId c : n.children) {
      if (!seen.insert(c).second)
        out.push_back("node " + to_string(id) + " lists child " + to_string(c) + " twice");
      auto cit = nodes_.find(c);
      if (cit == nodes_.end())
        out.push_back("node " + to_string(id) + " has dangling child " + to_string(c));
      else if (!cit->second.parent || *cit->second.parent != id)
        out.push_back("child " + to_string(c) + " does not point back to " + to_string(id));
    }
    std::vector<Dependency> links;
    for (const Dependency& d : n.dependencies) {
      if (d.to == id) out.push_back("node " + to_string(id) + " has a self-link");
      if (!nodes_.count(d.to))
        out.push_back("node " + to_string(id) + " has dangling link to " + to_string(d.to));
      if (std::find(links.begin(), links.end(), d) != links.end())
        out.push_back("node " + to_string(id) + " has duplicate link to " + to_string(d.to));
      links.push_back(d);
    }
    for (std::size_t i = 0; i < n.revisions.size(); ++i) {
      if (i > 0 && n.revisions[i].round < n.revisions[i - 1].round)
        out.push_back("node " + to_string(id) + " revisions out of round order");
      if (i == 0 && n.revisions[i].kind != RevisionKind::initial)
        out.push_back("node " + to_string(id) + " first revision is not initial");
      if (i > 0 && n.revisions[i].kind == RevisionKind::initial)
        out.push_back("node " + to_string(id) + " has a second initial revision");
    }
    if (n.status == TaskStatus::done && !n.output)
      out.push_back("node " + to_string(id) + " is done without output");
    if (n.retry_count < 0) out.push_back("node " + to_string(id) + " has negative retry count");
  }
  if (roots != 1) out.push_back("tree has " + std::to_string(roots) + " roots");
  if (!nodes_.count(root_)) out.push_back("root id is dangling");
  if (!nodes_.count(current_)) out.push_back("current id is dangling");

  // Reachability: following child edges from the root must visit every node
  // exactly once (connected and acyclic).
  if (nodes_.count(root_)) {
    std::set<NodeId> visited;
    std::vector<NodeId> stack{root_};
    while (!stack.empty()) {
      NodeId at = stack.back();
      stack.pop_back();
      if (!visited.insert(at).second) {
        out.push_back("cycle through node " + to_string(at));
        break;
      }
      auto it = nodes_.find(at);
      if (it == nodes_.end()) continue;
      for (NodeId c : it->second.children) stack.push_back(c);
    }
    if (visited.size() != nodes_.size())
      out.push_back("tree is not connected: reached " + std::to_string(visited.size()) +
                    " of " + std::to_string(nodes_.size()) + " nodes");
  }
  return out;
}

inline TaskTree TaskTree::restore(NodeId root, NodeId current, int next_round,
                                  std::vector<TaskNode> nodes) {
  TaskTree tree;
  tree.root_ = root;
  tree.current_ = current;
  tree.next_round_ = next_round;
  std::uint64_t max_id = 0;
  for (TaskNode& n : nodes) {
    NodeId id = n.id;
    max_id = std::max(max_id, id.value);
    if (!tree.nodes_.emplace(id, std::move(n)).second)
      fail(ErrorCode::schema_error, "/nodes/" + to_string(id) + ": duplicate node id");
  }
  tree.next_id_ = max_id + 1;
  if (next_round < 1) fail(ErrorCode::schema_error, "/next_round: must be positive");
  auto problems = tree.invariant_violations();
  if (!problems.empty()) fail(ErrorCode::schema_error, "/nodes: " + problems.front());
  return tree;
}

}  // namespace tme
