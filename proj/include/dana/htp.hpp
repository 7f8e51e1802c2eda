#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dana {

// One node of a hierarchical task plan: a natural-language task description
// with ordered sub-tasks. Strict tree; ids unique across the whole plan.
struct TaskNode {
    std::string id;
    std::string description;
    std::vector<std::string> resource_refs;
    std::vector<TaskNode> sub_tasks;

    bool is_leaf() const { return sub_tasks.empty(); }
    bool operator==(const TaskNode&) const = default;
};

struct Htp {
    TaskNode root;
    std::optional<std::string> name;

    bool operator==(const Htp&) const = default;
};

// Structural cap for parsing; semantic depth limits live in validate() and
// the creator config.
inline constexpr int kParseMaxDepth = 64;

// File format: {"task": {"id", "description", "resources"?: [ids],
// "sub-plans"?: [...]}, "name"?}. Throws ParseError on malformed/unknown
// fields, ValidationError on duplicate id / empty description or id / depth.
Htp parse_htp(const std::string& document, int max_depth = kParseMaxDepth);

// Canonical bytes: fixed key order, sub-tasks in tree order, 2-space indent,
// trailing newline. Structurally equal plans serialize identically.
std::string serialize_htp(const Htp& plan);

enum class HtpViolationCode { duplicate_id, empty_description, depth_exceeded };

struct HtpViolation {
    HtpViolationCode code;
    std::string node_id;
    std::string message;

    bool operator==(const HtpViolation&) const = default;
};

// Empty result iff every node invariant holds within max_depth (root depth 1).
std::vector<HtpViolation> validate(const Htp& plan, int max_depth);

// Children before parents, siblings in stored order.
std::vector<const TaskNode*> post_order(const Htp& plan);

int tree_depth(const Htp& plan);
int node_count(const Htp& plan);
int leaf_count(const Htp& plan);

}  // namespace dana
