#include "dana/htp.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "dana/errors.hpp"

namespace dana {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

TaskNode node_from_json(const json& record, int depth, int max_depth, const std::string& locus) {
    if (!record.is_object()) throw ParseError(locus + ": task must be an object");
    for (const auto& field : record.items()) {
        const std::string& key = field.key();
        if (key != "id" && key != "description" && key != "resources" && key != "sub-plans") {
            throw ParseError(locus + ": unknown field '" + key + "'");
        }
    }
    if (depth > max_depth) {
        throw ValidationError(locus + ": depth exceeds " + std::to_string(max_depth));
    }
    TaskNode node;
    if (!record.contains("id") || !record["id"].is_string()) {
        throw ParseError(locus + ": 'id' must be a string");
    }
    node.id = record["id"].get<std::string>();
    if (node.id.empty()) throw ValidationError(locus + ": 'id' must be non-empty");
    if (!record.contains("description") || !record["description"].is_string()) {
        throw ParseError(locus + ": 'description' must be a string");
    }
    node.description = record["description"].get<std::string>();
    if (node.description.empty()) {
        throw ValidationError(locus + ": task '" + node.id + "' has an empty description");
    }
    if (record.contains("resources")) {
        if (!record["resources"].is_array()) {
            throw ParseError(locus + ": 'resources' must be an array of ids");
        }
        for (const auto& ref : record["resources"]) {
            if (!ref.is_string()) throw ParseError(locus + ": 'resources' must be an array of ids");
            node.resource_refs.push_back(ref.get<std::string>());
        }
    }
    if (record.contains("sub-plans")) {
        if (!record["sub-plans"].is_array()) {
            throw ParseError(locus + ": 'sub-plans' must be an array");
        }
        int child_index = 0;
        for (const auto& child : record["sub-plans"]) {
            node.sub_tasks.push_back(node_from_json(
                child, depth + 1, max_depth,
                locus + "/sub-plans[" + std::to_string(child_index) + "]"));
            ++child_index;
        }
    }
    return node;
}

ordered_json node_to_json(const TaskNode& node) {
    ordered_json record;
    record["id"] = node.id;
    record["description"] = node.description;
    if (!node.resource_refs.empty()) record["resources"] = node.resource_refs;
    if (!node.sub_tasks.empty()) {
        ordered_json children = ordered_json::array();
        for (const auto& child : node.sub_tasks) children.push_back(node_to_json(child));
        record["sub-plans"] = std::move(children);
    }
    return record;
}

void collect_duplicate_ids(const TaskNode& node, std::set<std::string>& seen,
                           std::set<std::string>& reported, std::vector<HtpViolation>& out) {
    if (!seen.insert(node.id).second && reported.insert(node.id).second) {
        out.push_back({HtpViolationCode::duplicate_id, node.id, "duplicate id '" + node.id + "'"});
    }
    for (const auto& child : node.sub_tasks) collect_duplicate_ids(child, seen, reported, out);
}

void collect_node_violations(const TaskNode& node, int depth, int max_depth,
                             std::vector<HtpViolation>& out) {
    if (node.description.empty()) {
        out.push_back({HtpViolationCode::empty_description, node.id,
                       "task '" + node.id + "' has an empty description"});
    }
    if (depth > max_depth) {
        out.push_back({HtpViolationCode::depth_exceeded, node.id,
                       "task '" + node.id + "' at depth " + std::to_string(depth) +
                           " exceeds max depth " + std::to_string(max_depth)});
    }
    for (const auto& child : node.sub_tasks) {
        collect_node_violations(child, depth + 1, max_depth, out);
    }
}

void walk_post_order(const TaskNode& node, std::vector<const TaskNode*>& out) {
    for (const auto& child : node.sub_tasks) walk_post_order(child, out);
    out.push_back(&node);
}

int node_depth(const TaskNode& node) {
    int deepest = 0;
    for (const auto& child : node.sub_tasks) deepest = std::max(deepest, node_depth(child));
    return deepest + 1;
}

int count_nodes(const TaskNode& node) {
    int count = 1;
    for (const auto& child : node.sub_tasks) count += count_nodes(child);
    return count;
}

int count_leaves(const TaskNode& node) {
    if (node.is_leaf()) return 1;
    int count = 0;
    for (const auto& child : node.sub_tasks) count += count_leaves(child);
    return count;
}

}  // namespace

Htp parse_htp(const std::string& document, int max_depth) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("plan document: ") + ex.what());
    }
    if (!doc.is_object()) throw ParseError("plan document must be a JSON object");
    for (const auto& field : doc.items()) {
        if (field.key() != "task" && field.key() != "name") {
            throw ParseError("plan document: unknown field '" + field.key() + "'");
        }
    }
    if (!doc.contains("task")) throw ParseError("plan document: missing 'task'");

    Htp plan;
    plan.root = node_from_json(doc["task"], 1, max_depth, "task");
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw ParseError("plan document: 'name' must be a string");
        plan.name = doc["name"].get<std::string>();
    }

    std::set<std::string> seen;
    std::set<std::string> reported;
    std::vector<HtpViolation> duplicates;
    collect_duplicate_ids(plan.root, seen, reported, duplicates);
    if (!duplicates.empty()) throw ValidationError(duplicates.front().message);
    return plan;
}

std::string serialize_htp(const Htp& plan) {
    ordered_json doc;
    if (plan.name) doc["name"] = *plan.name;
    doc["task"] = node_to_json(plan.root);
    return doc.dump(2) + "\n";
}

std::vector<HtpViolation> validate(const Htp& plan, int max_depth) {
    std::vector<HtpViolation> violations;
    std::set<std::string> seen;
    std::set<std::string> reported;
    collect_duplicate_ids(plan.root, seen, reported, violations);
    collect_node_violations(plan.root, 1, max_depth, violations);
    return violations;
}

std::vector<const TaskNode*> post_order(const Htp& plan) {
    std::vector<const TaskNode*> out;
    walk_post_order(plan.root, out);
    return out;
}

int tree_depth(const Htp& plan) { return node_depth(plan.root); }

int node_count(const Htp& plan) { return count_nodes(plan.root); }

int leaf_count(const Htp& plan) { return count_leaves(plan.root); }

}  // namespace dana
