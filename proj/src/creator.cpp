#include "dana/creator.hpp"

#include <regex>

#include "dana/errors.hpp"
#include "dana/logging.hpp"
#include "dana/text.hpp"

namespace dana {

namespace {

constexpr const char* kDecomposeInstructions =
    "You decompose a task into sub-tasks. Reply with the single word ATOMIC if the "
    "task should not be split further, otherwise reply with a numbered list of "
    "sub-tasks, one per line, like:\n1. first sub-task\n2. second sub-task";

// "1. text" or "2) text"; remainder must contain a non-space character.
const std::regex kNumberedLine(R"(^\s*\d+[.)]\s*(.*\S.*)$)");

std::optional<std::vector<std::string>> parse_decomposition(const std::string& reply) {
    const std::string trimmed = text::trim(reply);
    if (trimmed == "ATOMIC") return std::vector<std::string>{};
    std::vector<std::string> descriptions;
    for (const auto& raw_line : text::split_lines(trimmed)) {
        const std::string line = text::trim(raw_line);
        if (line.empty()) continue;
        std::smatch match;
        if (!std::regex_match(line, match, kNumberedLine)) return std::nullopt;
        descriptions.push_back(text::trim(match[1].str()));
    }
    if (descriptions.empty()) return std::nullopt;
    return descriptions;
}

struct BuildState {
    const KnowledgeStore& knowledge;
    LmBackend& backend;
    const CreatorConfig& config;
    std::size_t knowledge_char_budget;
};

std::string child_id(const TaskNode& parent, bool parent_is_root, int index) {
    if (parent_is_root) return std::to_string(index);
    return parent.id + "." + std::to_string(index);
}

void expand_node(TaskNode& node, int depth, bool is_root, std::vector<std::string>& parent_chain,
                 BuildState& state) {
    if (depth >= state.config.max_depth) return;
    const std::string context = decomposition_context(state.knowledge, node.description,
                                                      parent_chain, state.knowledge_char_budget);
    const auto sub_descriptions =
        decompose_task(node.description, context, state.backend, state.config);
    if (sub_descriptions.empty()) return;

    parent_chain.push_back(node.description);
    int index = 1;
    for (const auto& description : sub_descriptions) {
        TaskNode child;
        child.id = child_id(node, is_root, index);
        child.description = description;
        node.sub_tasks.push_back(std::move(child));
        ++index;
    }
    // Recurse after all siblings exist so ids stay in list order.
    for (auto& child : node.sub_tasks) {
        expand_node(child, depth + 1, false, parent_chain, state);
    }
    parent_chain.pop_back();
}

}  // namespace

std::string decomposition_context(const KnowledgeStore& knowledge,
                                  const std::string& task_description,
                                  const std::vector<std::string>& parent_chain,
                                  std::size_t knowledge_char_budget) {
    std::string context;
    if (!parent_chain.empty()) {
        context += "Parent tasks, outermost first:\n";
        for (const auto& ancestor : parent_chain) {
            context += "- " + ancestor + "\n";
        }
    }
    const std::string rendered = render_relevant(knowledge, task_description, knowledge_char_budget);
    if (!rendered.empty()) {
        if (!context.empty()) context += "\n";
        context += "Relevant knowledge:\n" + rendered;
    }
    return context;
}

std::vector<std::string> decompose_task(const std::string& task_description,
                                        const std::string& context, LmBackend& backend,
                                        const CreatorConfig& config) {
    if (task_description.empty()) throw ValidationError("task description must be non-empty");

    std::string prompt = "Task:\n" + task_description;
    if (!context.empty()) prompt += "\n\n" + context;

    LmRequest request;
    request.messages = {{Role::system, kDecomposeInstructions}, {Role::user, prompt}};

    const int attempts = 1 + std::max(0, config.max_parse_retries);
    std::string last_reply;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        last_reply = backend.complete(request).text;
        auto parsed = parse_decomposition(last_reply);
        if (!parsed) {
            log::debug("decomposition reply unparseable (attempt ", attempt + 1, "/", attempts, ")");
            continue;
        }
        auto& descriptions = *parsed;
        if (descriptions.size() > static_cast<std::size_t>(config.max_subtasks)) {
            descriptions.resize(static_cast<std::size_t>(config.max_subtasks));
        }
        return descriptions;
    }
    throw DecompositionFormatError("reply is neither ATOMIC nor a numbered list after " +
                                   std::to_string(attempts) + " attempts: '" +
                                   last_reply.substr(0, 120) + "'");
}

Htp create_program(const std::string& problem, const KnowledgeStore& knowledge, LmBackend& backend,
                   const CreatorConfig& config, std::size_t knowledge_char_budget) {
    if (problem.empty()) throw ValidationError("problem must be non-empty");
    if (config.max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (config.max_subtasks < 1) throw ValidationError("max_subtasks must be >= 1");

    Htp plan;
    plan.root.id = "root";
    plan.root.description = problem;

    BuildState state{knowledge, backend, config, knowledge_char_budget};
    std::vector<std::string> parent_chain;
    expand_node(plan.root, 1, true, parent_chain, state);
    return plan;
}

}  // namespace dana
