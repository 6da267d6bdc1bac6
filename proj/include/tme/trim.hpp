#pragma once

// Relationship inference: decides how a new instruction relates to the
// existing tree (merge, replacement, rollback, dependency, new subtask) and
// applies the corresponding mutation. Keyword rules run first; otherwise the
// similarity bands decide. Everything here is deterministic.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tme/embedding.hpp"
#include "tme/error.hpp"
#include "tme/tree.hpp"

namespace tme {

enum class RelationshipLabel { depends_on, parallel_with, replaces, merge, rollback, child_of };

inline const char* to_string(RelationshipLabel label) {
  switch (label) {
    case RelationshipLabel::depends_on: return "depends_on";
    case RelationshipLabel::parallel_with: return "parallel_with";
    case RelationshipLabel::replaces: return "replaces";
    case RelationshipLabel::merge: return "merge";
    case RelationshipLabel::rollback: return "rollback";
    case RelationshipLabel::child_of: return "child_of";
  }
  return "unknown";
}

enum class PairLabel { duplicate, superset, depends_on, conflict, unrelated };

inline const char* to_string(PairLabel label) {
  switch (label) {
    case PairLabel::duplicate: return "duplicate";
    case PairLabel::superset: return "superset";
    case PairLabel::depends_on: return "depends_on";
    case PairLabel::conflict: return "conflict";
    case PairLabel::unrelated: return "unrelated";
  }
  return "unknown";
}

struct Thresholds {
  double high = 0.80;
  double moderate = 0.50;

  void validate() const {
    if (!(moderate > 0.0 && high > moderate && high <= 1.0))
      fail(ErrorCode::invalid_argument, "thresholds must satisfy 0 < moderate < high <= 1");
  }
};

// Marker phrases are token sequences matched in order with gaps allowed,
// e.g. {"change","to"} hits "change the date to Friday".
struct MarkerLexicon {
  std::vector<std::vector<std::string>> correction{
      {"correct"}, {"sorry"}, {"instead"}, {"change", "to"}};
  std::vector<std::vector<std::string>> cancellation{{"cancel"}, {"undo"}, {"go", "back"}};
};

struct TrimConfig {
  Thresholds thresholds;
  MarkerLexicon markers;
  std::string embedder = "hashed-tf";
  std::string classifier = "heuristic";
};

struct InferenceResult {
  RelationshipLabel label = RelationshipLabel::child_of;
  NodeId target;
  double score = 0.0;
  std::string rationale;
};

inline bool marker_present(const std::vector<std::string>& tokens,
                           const std::vector<std::string>& pattern) {
  if (pattern.empty()) return false;
  std::size_t at = 0;
  for (const std::string& token : tokens) {
    if (token == pattern[at] && ++at == pattern.size()) return true;
  }
  return false;
}

inline bool any_marker(const std::vector<std::string>& tokens,
                       const std::vector<std::vector<std::string>>& patterns) {
  return std::any_of(patterns.begin(), patterns.end(),
                     [&](const auto& p) { return marker_present(tokens, p); });
}

// Text a node exposes for similarity: its action plus the latest revision.
inline std::string node_match_text(const TaskNode& n) {
  if (const std::string* latest = n.latest_revision_text())
    return n.action + " " + *latest;
  return n.action;
}

// Nearest non-closed node walking up from `current`; falls back to the root.
inline NodeId open_anchor(const TaskTree& tree) {
  NodeId at = tree.current();
  while (true) {
    const TaskNode& n = tree.node(at);
    if (n.status == TaskStatus::waiting || n.status == TaskStatus::active) return at;
    if (!n.parent) return at;
    at = *n.parent;
  }
}

namespace detail {

struct BestMatch {
  bool found = false;
  NodeId id;
  double score = -2.0;
  int round = -1;
};

inline BestMatch best_similarity(const std::string& instruction, const TaskTree& tree,
                                 const Embedder& embedder) {
  EmbeddingVector iv = embedder.embed(instruction);
  BestMatch best;
  for (const auto& [id, n] : tree.nodes()) {
    if (n.status == TaskStatus::invalidated) continue;
    double score = cosine(iv, embedder.embed(node_match_text(n)));
    int round = n.latest_revision_round();
    // Ties go to the most recent round, then to the newest node.
    bool better = !best.found || score > best.score ||
                  (score == best.score && (round > best.round ||
                                           (round == best.round && id > best.id)));
    if (better) best = {true, id, score, round};
  }
  return best;
}

inline std::string format_score(double score) {
  std::ostringstream os;
  os.precision(3);
  os << score;
  return os.str();
}

}  // namespace detail

inline InferenceResult infer_structural_relationship(const std::string& instruction,
                                                     const TaskTree& tree,
                                                     const TrimConfig& config) {
  config.thresholds.validate();
  auto embedder = find_embedder(config.embedder);
  std::vector<std::string> tokens = tokenize_words(instruction);
  detail::BestMatch best = detail::best_similarity(instruction, tree, *embedder);
  if (!best.found) {
    // Everything is invalidated; a new subtask is the only sensible answer.
    return {RelationshipLabel::child_of, open_anchor(tree), 0.0,
            "no live nodes; new subtask"};
  }

  // Keyword rules take precedence over the similarity bands.
  if (any_marker(tokens, config.markers.correction) &&
      tree.node(best.id).status == TaskStatus::done) {
    return {RelationshipLabel::merge, best.id, best.score,
            "correction marker with completed best match " + to_string(best.id)};
  }
  if (any_marker(tokens, config.markers.cancellation)) {
    NodeId at = tree.current();
    while (true) {
      const TaskNode& n = tree.node(at);
      if (n.status == TaskStatus::done) {
        double score = cosine(embedder->embed(instruction),
                              embedder->embed(node_match_text(n)));
        return {RelationshipLabel::rollback, at, score,
                "cancellation marker; nearest completed ancestor " + to_string(at)};
      }
      if (!n.parent) break;
      at = *n.parent;
    }
    // No completed ancestor to revert to; fall through to the bands.
  }

  const Thresholds& t = config.thresholds;
  if (best.score >= t.high) {
    TaskStatus status = tree.node(best.id).status;
    if (status == TaskStatus::active || status == TaskStatus::waiting)
      return {RelationshipLabel::merge, best.id, best.score,
              "similarity " + detail::format_score(best.score) + " >= high with open target"};
    return {RelationshipLabel::replaces, best.id, best.score,
            "similarity " + detail::format_score(best.score) + " >= high with closed target"};
  }
  if (best.score >= t.moderate) {
    return {RelationshipLabel::depends_on, best.id, best.score,
            "similarity " + detail::format_score(best.score) + " in dependency band"};
  }
  // New subtask under the nearest open node; the score reports the affinity
  // to that anchor (the decision itself came from the best match).
  NodeId anchor = open_anchor(tree);
  double anchor_score = cosine(embedder->embed(instruction),
                               embedder->embed(node_match_text(tree.node(anchor))));
  return {RelationshipLabel::child_of, anchor, anchor_score,
          "best similarity " + detail::format_score(best.score) +
              " below moderate; new subtask"};
}

inline InferenceResult infer_structural_relationship(const std::string& instruction,
                                                     const TaskTree& tree,
                                                     const Thresholds& thresholds) {
  TrimConfig config;
  config.thresholds = thresholds;
  return infer_structural_relationship(instruction, tree, config);
}

// ---------------------------------------------------------------------------
// Pairwise step/node classifier. The default is a deterministic heuristic;
// learned models plug in behind the same interface.

struct PairClassifier {
  virtual ~PairClassifier() = default;
  virtual PairLabel classify(const std::string& step, const TaskNode& node) const = 0;
  virtual std::string name() const = 0;
};

class HeuristicPairClassifier final : public PairClassifier {
 public:
  explicit HeuristicPairClassifier(TrimConfig config = {}) : config_(std::move(config)) {}

  PairLabel classify(const std::string& step, const TaskNode& node) const override {
    auto embedder = find_embedder(config_.embedder);
    std::string node_text = node_match_text(node);
    double score = cosine(embedder->embed(step), embedder->embed(node_text));
    if (score >= 0.95) return PairLabel::duplicate;

    std::vector<std::string> step_tokens = tokenize_words(step);
    std::vector<std::string> node_tokens = tokenize_words(node_text);
    std::set<std::string> step_set(step_tokens.begin(), step_tokens.end());
    std::set<std::string> node_set(node_tokens.begin(), node_tokens.end());
    bool contains_all = !node_set.empty() &&
                        std::includes(step_set.begin(), step_set.end(),
                                      node_set.begin(), node_set.end());
    if (contains_all && step_set.size() > node_set.size() &&
        score >= config_.thresholds.moderate)
      return PairLabel::superset;

    if (any_marker(step_tokens, config_.markers.correction) &&
        shared_content(step_set, node_set))
      return PairLabel::conflict;

    if (score >= config_.thresholds.moderate && score < config_.thresholds.high)
      return PairLabel::depends_on;
    return PairLabel::unrelated;
  }

  std::string name() const override { return "heuristic"; }

 private:
  bool shared_content(const std::set<std::string>& a, const std::set<std::string>& b) const {
    std::set<std::string> marker_words;
    for (const auto& pattern : config_.markers.correction)
      marker_words.insert(pattern.begin(), pattern.end());
    for (const auto& pattern : config_.markers.cancellation)
      marker_words.insert(pattern.begin(), pattern.end());
    for (const std::string& token : a)
      if (b.count(token) && !marker_words.count(token)) return true;
    return false;
  }

  TrimConfig config_;
};

inline std::map<std::string, std::shared_ptr<const PairClassifier>>& classifier_registry() {
  static std::map<std::string, std::shared_ptr<const PairClassifier>> registry{
      {"heuristic", std::make_shared<HeuristicPairClassifier>()}};
  return registry;
}

inline std::shared_ptr<const PairClassifier> find_classifier(const std::string& name) {
  auto& registry = classifier_registry();
  auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::not_found, "no classifier '" + name + "'");
  return it->second;
}

inline PairLabel classify_pair(const std::string& step, const TaskNode& node) {
  return find_classifier("heuristic")->classify(step, node);
}

// ---------------------------------------------------------------------------
// Applies an inference outcome to the tree. After it returns, `current`
// points at the node carrying the instruction. Returns that node.

inline NodeId apply(TaskTree& tree, const InferenceResult& result,
                    const std::string& instruction) {
  const TaskNode& target = tree.node(result.target);
  if (target.status == TaskStatus::invalidated)
    fail(ErrorCode::illegal_state,
         "target " + to_string(result.target) + " is invalidated");
  switch (result.label) {
    case RelationshipLabel::merge: {
      NodeId host = target.parent ? *target.parent : result.target;
      NodeId fresh = tree.add_child(host, instruction, instruction);
      tree.merge_nodes(result.target, fresh);
      tree.focus(result.target);
      return result.target;
    }
    case RelationshipLabel::replaces:
      return tree.replace_node(result.target, instruction, instruction);
    case RelationshipLabel::rollback: {
      tree.rollback_to(result.target);
      tree.record_io(result.target, instruction, std::nullopt);
      return result.target;
    }
    case RelationshipLabel::depends_on: {
      NodeId fresh = tree.add_child(open_anchor(tree), instruction, instruction);
      tree.add_dependency(fresh, result.target, DependencyKind::depends_on);
      tree.focus(fresh);
      return fresh;
    }
    case RelationshipLabel::child_of: {
      NodeId fresh = tree.add_child(result.target, instruction, instruction);
      tree.focus(fresh);
      return fresh;
    }
    case RelationshipLabel::parallel_with: {
      NodeId host = target.parent ? *target.parent : result.target;
      NodeId fresh = tree.add_child(host, instruction, instruction);
      tree.add_dependency(fresh, result.target, DependencyKind::parallel_with);
      tree.focus(fresh);
      return fresh;
    }
  }
  fail(ErrorCode::invalid_argument, "unknown relationship label");
}

}  // namespace tme
