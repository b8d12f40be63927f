#pragma once

#include "fsvm/config.hpp"

#include <string>

namespace fsvm {

/// Deterministic report payloads as JSON lines: a summary line first, then one
/// line per candidate (selection) or run (evaluation). Timing lives in the
/// separate metadata document so payloads compare byte for byte across runs.
std::string selection_payload(const SelectionResult& result);
std::string evaluation_payload(const EvaluationReport& report);

Json candidate_row(const CandidateOutcome& outcome);
Json run_row(const RunRecord& run);

/// Timestamp, wall time and command line; not deterministic.
std::string run_metadata(const std::string& command, double wall_seconds);

/// Human-readable tables.
std::string render_selection(const SelectionResult& result);
std::string render_evaluation(const EvaluationReport& report);

} // namespace fsvm
