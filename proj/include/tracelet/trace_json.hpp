#pragma once

#include "tracelet/trace.hpp"

#include <string>

namespace tracelet {

/// JSON array of {"state": {...}} and {"event": {...}} entries with sorted keys.
/// Integers outside the int64 range are written as decimal strings.
std::string trace_to_json(const Trace &t, int indent = 1);
/// Throws Error("trace-format").
Trace trace_from_json(const std::string &text);

Trace read_trace_file(const std::string &path);
void write_trace_file(const std::string &path, const Trace &t);

}  // namespace tracelet
