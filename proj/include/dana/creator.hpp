#pragma once

#include <string>
#include <vector>

#include "dana/htp.hpp"
#include "dana/knowledge.hpp"
#include "dana/lm.hpp"

namespace dana {

struct CreatorConfig {
    int max_depth = 3;
    int max_subtasks = 7;
    int max_parse_retries = 2;  // extra attempts after a malformed reply
};

// One decomposition round: the backend must answer either the single word
// ATOMIC or a numbered list ("1. ...\n2. ..."). Returns [] for ATOMIC, else
// the parsed descriptions truncated to max_subtasks. Throws
// DecompositionFormatError once retries are exhausted.
std::vector<std::string> decompose_task(const std::string& task_description,
                                        const std::string& context, LmBackend& backend,
                                        const CreatorConfig& config);

// Builds a plan top-down: the root description is the problem verbatim; a node
// is decomposed only while its depth is below max_depth and the backend
// returns a non-empty list. Node ids are dotted paths ("1", "1.2", "1.2.1").
Htp create_program(const std::string& problem, const KnowledgeStore& knowledge,
                   LmBackend& backend, const CreatorConfig& config,
                   std::size_t knowledge_char_budget = kDefaultKnowledgeCharBudget);

// Prompt context given to decompose_task: relevant knowledge plus the chain
// of ancestor task descriptions.
std::string decomposition_context(const KnowledgeStore& knowledge,
                                  const std::string& task_description,
                                  const std::vector<std::string>& parent_chain,
                                  std::size_t knowledge_char_budget);

}  // namespace dana
