#pragma once

// Goal decomposition front-end. The reference decomposer is template-driven:
// a pattern table maps goal keywords to step outlines with dependencies.
// Outlines are forward-acyclic (steps may only depend on earlier steps).

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tme/embedding.hpp"
#include "tme/error.hpp"
#include "tme/tree.hpp"

namespace tme {

using Goal = std::string;

struct PlanStep {
  std::string action;
  std::vector<int> depends_on_indices;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct PlanOutline {
  std::vector<PlanStep> steps;
  bool matched = true;  // false when no template applied (empty fallback)

  friend bool operator==(const PlanOutline&, const PlanOutline&) = default;
};

inline void validate_outline(const PlanOutline& outline) {
  for (std::size_t i = 0; i < outline.steps.size(); ++i) {
    if (outline.steps[i].action.empty())
      fail(ErrorCode::invalid_argument, "step " + std::to_string(i) + " has no action");
    std::set<int> seen;
    for (int dep : outline.steps[i].depends_on_indices) {
      if (dep < 0 || static_cast<std::size_t>(dep) >= i)
        fail(ErrorCode::invalid_argument,
             "step " + std::to_string(i) + " depends on step " + std::to_string(dep) +
                 " which is not an earlier step");
      if (!seen.insert(dep).second)
        fail(ErrorCode::invalid_argument,
             "step " + std::to_string(i) + " lists dependency " + std::to_string(dep) +
                 " twice");
    }
  }
}

struct PlanTemplate {
  std::vector<std::string> match_keywords;
  std::vector<PlanStep> steps;
};

struct Decomposer {
  virtual ~Decomposer() = default;
  virtual PlanOutline decompose(const std::string& goal) const = 0;
  virtual std::string name() const = 0;
};

class TemplateDecomposer final : public Decomposer {
 public:
  explicit TemplateDecomposer(std::vector<PlanTemplate> templates)
      : templates_(std::move(templates)) {
    for (const PlanTemplate& t : templates_) validate_outline({t.steps, true});
  }

  // First template whose keywords all appear as words of the goal wins.
  PlanOutline decompose(const std::string& goal) const override {
    std::vector<std::string> words = tokenize_words(goal);
    std::set<std::string> word_set(words.begin(), words.end());
    for (const PlanTemplate& t : templates_) {
      bool hit = !t.match_keywords.empty();
      for (const std::string& kw : t.match_keywords)
        if (!word_set.count(kw)) {
          hit = false;
          break;
        }
      if (hit) return {t.steps, true};
    }
    return {{}, false};
  }

  std::string name() const override { return "template"; }

 private:
  std::vector<PlanTemplate> templates_;
};

inline std::vector<PlanTemplate> default_templates() {
  return {{{"fill", "form"},
           {{"Collect name", {}},
            {"Collect email", {}},
            {"Collect address", {}},
            {"Submit all info", {0, 1, 2}}}}};
}

inline std::vector<PlanTemplate> templates_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_array()) fail(ErrorCode::schema_error, "/: expected an array of templates");
  std::vector<PlanTemplate> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& t = doc[i];
    std::string path = "/" + std::to_string(i);
    if (!t.is_object() || !t.contains("match_keywords") || !t.contains("steps"))
      fail(ErrorCode::schema_error, path + ": template needs match_keywords and steps");
    PlanTemplate tpl;
    for (const auto& kw : t["match_keywords"]) tpl.match_keywords.push_back(kw.get<std::string>());
    for (std::size_t s = 0; s < t["steps"].size(); ++s) {
      const auto& step = t["steps"][s];
      if (!step.is_object() || !step.contains("action"))
        fail(ErrorCode::schema_error, path + "/steps/" + std::to_string(s) + ": needs action");
      PlanStep ps;
      ps.action = step["action"].get<std::string>();
      if (step.contains("depends_on_indices"))
        for (const auto& d : step["depends_on_indices"]) ps.depends_on_indices.push_back(d.get<int>());
      tpl.steps.push_back(std::move(ps));
    }
    out.push_back(std::move(tpl));
  }
  return out;
}

inline std::map<std::string, std::shared_ptr<const Decomposer>>& decomposer_registry() {
  static std::map<std::string, std::shared_ptr<const Decomposer>> registry{
      {"template", std::make_shared<TemplateDecomposer>(default_templates())}};
  return registry;
}

inline std::shared_ptr<const Decomposer> find_decomposer(const std::string& name) {
  auto& registry = decomposer_registry();
  auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::not_found, "no decomposer '" + name + "'");
  return it->second;
}

inline PlanOutline decompose(const std::string& goal, const std::string& decomposer_name) {
  return find_decomposer(decomposer_name)->decompose(goal);
}

// Adds one waiting child of the root per step and wires the dependency
// links. Returns the created ids in step order.
inline std::vector<NodeId> populate(TaskTree& tree, const PlanOutline& outline) {
  validate_outline(outline);
  std::vector<NodeId> ids;
  ids.reserve(outline.steps.size());
  for (const PlanStep& step : outline.steps)
    ids.push_back(tree.add_child(tree.root(), step.action));
  for (std::size_t i = 0; i < outline.steps.size(); ++i)
    for (int dep : outline.steps[i].depends_on_indices)
      tree.add_dependency(ids[i], ids[static_cast<std::size_t>(dep)],
                          DependencyKind::depends_on);
  return ids;
}

}  // namespace tme
