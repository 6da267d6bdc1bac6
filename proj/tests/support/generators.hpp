#pragma once

// Deterministic random generators for property tests: word-salad texts,
// random trees, and random (sometimes deliberately invalid) operations.

#include <random>
#include <string>
#include <vector>

#include "tme/error.hpp"
#include "tme/tree.hpp"

namespace tme::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  bool chance(double p) { return std::uniform_real_distribution<>(0.0, 1.0)(engine_) < p; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(below(static_cast<int>(items.size())))];
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline std::string random_text(Rng& rng, int max_words = 6) {
  static const std::vector<std::string> vocab{
      "check",  "flight", "hotel",   "price", "name",   "email", "submit", "review",
      "update", "cancel", "address", "city",  "budget", "plan",  "note",   "date"};
  int words = 1 + rng.below(max_words);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out.push_back(' ');
    out += rng.pick(vocab);
  }
  return out;
}

inline NodeId random_node(Rng& rng, const TaskTree& tree) {
  std::vector<NodeId> ids;
  for (const auto& [id, n] : tree.nodes()) ids.push_back(id);
  return rng.pick(ids);
}

// One random operation with plausible-but-unchecked arguments; invalid ones
// are expected to throw. Returns false when the operation threw.
inline bool apply_random_op(Rng& rng, TaskTree& tree, std::size_t max_nodes) {
  try {
    switch (rng.below(10)) {
      case 0: {
        if (tree.size() >= max_nodes) return true;
        NodeId parent = rng.chance(0.05) ? NodeId{9999} : random_node(rng, tree);
        tree.add_child(parent, random_text(rng),
                       rng.chance(0.6) ? std::optional<std::string>(random_text(rng))
                                       : std::nullopt);
        break;
      }
      case 1: {
        static const std::vector<TaskStatus> statuses{
            TaskStatus::waiting, TaskStatus::active, TaskStatus::done, TaskStatus::failed,
            TaskStatus::invalidated};
        tree.set_status(random_node(rng, tree), rng.pick(statuses));
        break;
      }
      case 2:
        tree.record_io(rng.chance(0.05) ? NodeId{9999} : random_node(rng, tree),
                       rng.chance(0.7) ? std::optional<std::string>(random_text(rng))
                                       : std::nullopt,
                       rng.chance(0.7) ? std::optional<std::string>(random_text(rng))
                                       : std::nullopt);
        break;
      case 3:
        tree.merge_nodes(random_node(rng, tree), random_node(rng, tree));
        break;
      case 4:
        tree.prune();
        break;
      case 5:
        tree.rollback_to(random_node(rng, tree));
        break;
      case 6: {
        static const std::vector<DependencyKind> kinds{
            DependencyKind::depends_on, DependencyKind::parallel_with,
            DependencyKind::replaces};
        tree.add_dependency(random_node(rng, tree), random_node(rng, tree),
                            rng.pick(kinds));
        break;
      }
      case 7:
        tree.focus(random_node(rng, tree));
        break;
      case 8:
        if (tree.size() >= max_nodes) return true;
        tree.replace_node(random_node(rng, tree), random_text(rng),
                          std::optional<std::string>(random_text(rng)));
        break;
      case 9:
        tree.advance_round();
        break;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

// A random valid tree grown through the public API.
inline TaskTree random_tree(Rng& rng, std::size_t max_nodes) {
  TaskTree tree = new_tree(random_text(rng));
  std::size_t target = 1 + static_cast<std::size_t>(rng.below(static_cast<int>(max_nodes)));
  int budget = static_cast<int>(max_nodes) * 10;
  while (tree.size() < target && budget-- > 0) {
    NodeId parent = random_node(rng, tree);
    if (tree.node(parent).status == TaskStatus::invalidated) continue;
    tree.add_child(parent, random_text(rng),
                   rng.chance(0.5) ? std::optional<std::string>(random_text(rng))
                                   : std::nullopt);
  }
  // Sprinkle statuses, links and focus moves; ignore rejected combinations.
  int extras = rng.below(static_cast<int>(max_nodes) * 2 + 1);
  for (int i = 0; i < extras; ++i) (void)apply_random_op(rng, tree, max_nodes);
  return tree;
}

}  // namespace tme::testing
