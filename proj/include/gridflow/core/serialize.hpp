#pragma once

#include "json.hpp"

#include "gridflow/core/types.hpp"

namespace gridflow::core {

// Canonical JSON forms. Key order is fixed so serialized bytes are stable and
// payload hashes are well-defined.
using Json = nlohmann::ordered_json;

Json payload_to_json(const TaskPayload& payload);
TaskPayload payload_from_json(TaskKind kind, const Json& j);

Json solution_to_json(const SymbolicSolution& solution);
SymbolicSolution solution_from_json(TaskKind kind, const Json& j);

Json instance_to_json(const TaskInstance& instance);
TaskInstance instance_from_json(const Json& j);

// FNV-1a over the canonical payload serialization; used for deduplication.
uint64_t payload_hash(const TaskPayload& payload);

}  // namespace gridflow::core
