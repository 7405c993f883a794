#pragma once

#include "toolweaver/mock_backend.hpp"

namespace toolweaver {

/// Offline stand-in for a capable model that understands the shipped prompt templates.
/// It reads the machine-readable blocks of each prompt (FIELD:, TOOL SPEC:, ARGUMENTS:, ...)
/// and produces well-formed replies: new taxonomy fields, schema-valid tools, type-correct
/// example pairs, dialogue turns, PASS verdicts and schema-complete simulations.
/// Replies are a pure function of the request.
MockResponder synthetic_world_responder();

} // namespace toolweaver
