#pragma once

// Trace CSV: one header row, full-precision decimal text that round-trips.

#include "softwrist/simulation.hpp"

#include <iosfwd>
#include <string>

namespace softwrist {

std::string format_double(double v);
double parse_double(const std::string& s);

std::string trace_header(int actuators);
void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
void write_trace_csv(const SimulationTrace& trace, const std::string& path);

// Reads back the numeric columns; metadata is not part of the CSV.
SimulationTrace read_trace_csv(std::istream& in);
SimulationTrace read_trace_csv(const std::string& path);

// Structured key = value text summary of the metrics.
std::string metrics_text(const Metrics& m, const SimulationTrace& trace, double target);

}  // namespace softwrist
