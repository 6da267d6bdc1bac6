#pragma once

// JSON wire format for task trees. Key order is part of the contract:
//   {"schema_version":"1","root":id,"current":id,"next_round":n,"nodes":{...}}
// with node fields id, action, input, output, status, parent, children,
// dependencies [{to,kind}], revisions [{round,kind,text,reply}], retry_count,
// error. Ids are rendered as decimal strings; absent optionals as null.

#include <charconv>
#include <string>
#include <vector>

#include <json.hpp>

#include "tme/error.hpp"
#include "tme/tree.hpp"

namespace tme {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

namespace detail {

inline json opt_string(const std::optional<std::string>& value) {
  return value ? json(*value) : json(nullptr);
}

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::schema_error, path + ": " + what);
}

inline NodeId parse_id(const json& j, const std::string& path) {
  if (!j.is_string()) schema_fail(path, "expected a string node id");
  const std::string& s = j.get_ref<const std::string&>();
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    schema_fail(path, "'" + s + "' is not a numeric id");
  return NodeId{value};
}

inline std::string get_string(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) schema_fail(path + "/" + key, "missing field");
  if (!j[key].is_string()) schema_fail(path + "/" + key, "expected a string");
  return j[key].get<std::string>();
}

inline std::optional<std::string> get_opt_string(const json& j, const char* key,
                                                 const std::string& path) {
  if (!j.contains(key)) schema_fail(path + "/" + key, "missing field");
  if (j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) schema_fail(path + "/" + key, "expected a string or null");
  return j[key].get<std::string>();
}

inline int get_int(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) schema_fail(path + "/" + key, "missing field");
  if (!j[key].is_number_integer()) schema_fail(path + "/" + key, "expected an integer");
  return j[key].get<int>();
}

}  // namespace detail

inline json to_json(const TaskNode& n) {
  json deps = json::array();
  for (const Dependency& d : n.dependencies)
    deps.push_back({{"to", to_string(d.to)}, {"kind", to_string(d.kind)}});
  json revs = json::array();
  for (const RevisionEntry& r : n.revisions)
    revs.push_back({{"round", r.round},
                    {"kind", to_string(r.kind)},
                    {"text", r.text},
                    {"reply", detail::opt_string(r.reply)}});
  json children = json::array();
  for (NodeId c : n.children) children.push_back(to_string(c));
  return json{{"id", to_string(n.id)},
              {"action", n.action},
              {"input", detail::opt_string(n.input)},
              {"output", detail::opt_string(n.output)},
              {"status", to_string(n.status)},
              {"parent", n.parent ? json(to_string(*n.parent)) : json(nullptr)},
              {"children", children},
              {"dependencies", deps},
              {"revisions", revs},
              {"retry_count", n.retry_count},
              {"error", detail::opt_string(n.error)}};
}

inline json to_json(const TaskTree& tree) {
  json nodes = json::object();
  for (const auto& [id, n] : tree.nodes()) nodes[to_string(id)] = to_json(n);
  return json{{"schema_version", kSchemaVersion},
              {"root", to_string(tree.root())},
              {"current", to_string(tree.current())},
              {"next_round", tree.next_round()},
              {"nodes", nodes}};
}

inline std::string serialize(const TaskTree& tree) { return to_json(tree).dump(2); }

inline TaskNode node_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) detail::schema_fail(path, "expected a node object");
  TaskNode n;
  n.id = detail::parse_id(j.contains("id") ? j["id"] : json(), path + "/id");
  n.action = detail::get_string(j, "action", path);
  n.input = detail::get_opt_string(j, "input", path);
  n.output = detail::get_opt_string(j, "output", path);
  std::string status = detail::get_string(j, "status", path);
  auto parsed_status = status_from_string(status);
  if (!parsed_status) detail::schema_fail(path + "/status", "unknown status '" + status + "'");
  n.status = *parsed_status;
  if (!j.contains("parent")) detail::schema_fail(path + "/parent", "missing field");
  if (!j["parent"].is_null()) n.parent = detail::parse_id(j["parent"], path + "/parent");
  if (!j.contains("children") || !j["children"].is_array())
    detail::schema_fail(path + "/children", "expected an array");
  for (std::size_t i = 0; i < j["children"].size(); ++i)
    n.children.push_back(
        detail::parse_id(j["children"][i], path + "/children/" + std::to_string(i)));
  if (!j.contains("dependencies") || !j["dependencies"].is_array())
    detail::schema_fail(path + "/dependencies", "expected an array");
  for (std::size_t i = 0; i < j["dependencies"].size(); ++i) {
    const json& d = j["dependencies"][i];
    std::string dpath = path + "/dependencies/" + std::to_string(i);
    if (!d.is_object()) detail::schema_fail(dpath, "expected a link object");
    NodeId to = detail::parse_id(d.contains("to") ? d["to"] : json(), dpath + "/to");
    std::string kind = detail::get_string(d, "kind", dpath);
    auto parsed_kind = dependency_kind_from_string(kind);
    if (!parsed_kind) detail::schema_fail(dpath + "/kind", "unknown kind '" + kind + "'");
    n.dependencies.push_back({to, *parsed_kind});
  }
  if (!j.contains("revisions") || !j["revisions"].is_array())
    detail::schema_fail(path + "/revisions", "expected an array");
  for (std::size_t i = 0; i < j["revisions"].size(); ++i) {
    const json& r = j["revisions"][i];
    std::string rpath = path + "/revisions/" + std::to_string(i);
    if (!r.is_object()) detail::schema_fail(rpath, "expected a revision object");
    RevisionEntry entry;
    entry.round = detail::get_int(r, "round", rpath);
    std::string kind = detail::get_string(r, "kind", rpath);
    auto parsed_kind = revision_kind_from_string(kind);
    if (!parsed_kind) detail::schema_fail(rpath + "/kind", "unknown kind '" + kind + "'");
    entry.kind = *parsed_kind;
    entry.text = detail::get_string(r, "text", rpath);
    entry.reply = r.contains("reply") ? detail::get_opt_string(r, "reply", rpath)
                                      : std::nullopt;
    n.revisions.push_back(std::move(entry));
  }
  n.retry_count = detail::get_int(j, "retry_count", path);
  if (n.retry_count < 0) detail::schema_fail(path + "/retry_count", "must be non-negative");
  n.error = detail::get_opt_string(j, "error", path);
  return n;
}

inline TaskTree tree_from_json(const json& doc) {
  if (!doc.is_object()) detail::schema_fail("/", "expected a tree object");
  std::string version = detail::get_string(doc, "schema_version", "");
  if (version != kSchemaVersion)
    detail::schema_fail("/schema_version", "unsupported version '" + version + "'");
  NodeId root = detail::parse_id(doc.contains("root") ? doc["root"] : json(), "/root");
  NodeId current =
      detail::parse_id(doc.contains("current") ? doc["current"] : json(), "/current");
  int next_round = detail::get_int(doc, "next_round", "");
  if (!doc.contains("nodes") || !doc["nodes"].is_object())
    detail::schema_fail("/nodes", "expected an object");
  std::vector<TaskNode> nodes;
  for (const auto& [key, value] : doc["nodes"].items()) {
    std::string path = "/nodes/" + key;
    TaskNode n = node_from_json(value, path);
    if (to_string(n.id) != key) detail::schema_fail(path + "/id", "id does not match its key");
    nodes.push_back(std::move(n));
  }
  if (!doc["nodes"].contains(to_string(root)))
    detail::schema_fail("/root", "dangling id " + to_string(root));
  if (!doc["nodes"].contains(to_string(current)))
    detail::schema_fail("/current", "dangling id " + to_string(current));
  return TaskTree::restore(root, current, next_round, std::move(nodes));
}

inline TaskTree deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::schema_error, std::string("malformed document: ") + e.what());
  }
  return tree_from_json(doc);
}

}  // namespace tme
