#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hadeq/solver.hpp"
#include "hadeq/vr.hpp"

namespace hadeq {

// JSON forms are stable and key-sorted; identical inputs serialize to
// identical bytes.

nlohmann::json to_json(const ManifoldDescriptor& m);
ManifoldDescriptor manifold_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConvexSet& s);
ConvexSet set_from_json(const nlohmann::json& j, const ManifoldDescriptor& manifold);

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PropertyReport& r);
nlohmann::json to_json(const ConditioningEstimate& e);
nlohmann::json to_json(const TrapReport& r);
nlohmann::json to_json(const DivergenceAnchorReport& r);
nlohmann::json to_json(const CoercivityReport& r);

std::string status_name(TerminalStatus s);
std::string property_name(BifProperty p);
std::string verdict_name(CheckVerdict v);
std::string trap_verdict_name(TrapVerdict v);

/// Line-delimited trace: a header object, one record object per iteration,
/// and a status footer.
void write_trace_jsonl(std::ostream& os, const IterationTrace& trace);
IterationTrace read_trace_jsonl(std::istream& is);

/// CSV mirror of the records (same columns, coords expanded per axis).
void write_trace_csv(std::ostream& os, const IterationTrace& trace);

/// Fixed-format double for text outputs: shortest representation that
/// round-trips (%.17g trimmed).
std::string format_double(double v);

}  // namespace hadeq
