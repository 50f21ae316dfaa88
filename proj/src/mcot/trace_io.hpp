#pragma once

#include "mcot/chain.hpp"

#include <string>

namespace mcot {

/// Canonical trace document: UTF-8 JSON, snake_case field names, arrays in
/// order, rationals as {"num": int, "den": int}. Output is deterministic;
/// structurally equal traces serialize to identical bytes.
///
/// Throws InvariantViolation when the trace breaks a trace invariant, naming
/// the offending round.
std::string serialize_trace(const MultiplexTrace& trace);

/// Inverse of serialize_trace. Throws ParseFailure (with byte offset) on
/// malformed documents and InvariantViolation (with the rule) on documents
/// that parse but violate trace invariants.
MultiplexTrace deserialize_trace(const std::string& document);

Json rational_to_json(const Rational& r);
Rational rational_from_json(const Json& j);

Json chain_to_json(const ChainOfThought& chain);
ChainOfThought chain_from_json(const Json& j);

Json critique_to_json(const Critique& critique);
Critique critique_from_json(const Json& j);

Json task_to_json(const Task& task);
Task task_from_json(const Json& j);

} // namespace mcot
