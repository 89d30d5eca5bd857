#ifndef GAR_TRACE_IO_HPP
#define GAR_TRACE_IO_HPP

#include <iosfwd>
#include <string>

#include "gar/domain.hpp"

namespace gar {

// Trace files are newline-delimited JSON: a header object first, then one
// request object per line. Field names carry explicit units; parsers reject
// unknown fields so unit mismatches cannot slip through silently.

Trace read_trace(std::istream& in, const std::string& source_name = "<stream>");
Trace read_trace_file(const std::string& path);

void write_trace(const Trace& trace, std::ostream& out);
void write_trace_file(const Trace& trace, const std::string& path);

/// Pool files are a JSON array of model profiles.
ModelPool read_pool_file(const std::string& path);
ModelPool pool_from_json_string(const std::string& json_text, const std::string& source_name);
std::string pool_to_json_string(const ModelPool& pool);
void write_pool_file(const ModelPool& pool, const std::string& path);

std::string decision_to_json_line(const RoutingDecision& d);
RoutingDecision decision_from_json_line(const std::string& line,
                                        const std::string& source_name = "<string>");
void write_decisions_file(const std::vector<RoutingDecision>& decisions, const std::string& path);
std::string decisions_to_jsonl(const std::vector<RoutingDecision>& decisions);

}  // namespace gar

#endif  // GAR_TRACE_IO_HPP
