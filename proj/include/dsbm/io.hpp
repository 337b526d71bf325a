#pragma once
// Plain-text file formats: temporal networks, assignment sequences, and
// key=value parameter files.
//
// Network format:
//   dsbm 1 <N> <T+1>
//   # t <index> <edge_count>
//   i j            (one pair per line, i < j, sorted)
//
// Assignment format: CSV with header "t,node,group".

#include <iosfwd>
#include <map>
#include <string>

#include "dsbm/core.hpp"

namespace dsbm {

void write_network(std::ostream& os, const TemporalNetwork& network);
void write_network_file(const std::string& path, const TemporalNetwork& network);
TemporalNetwork read_network(std::istream& is);
TemporalNetwork read_network_file(const std::string& path);

void write_assignments(std::ostream& os, const AssignmentSequence& seq);
void write_assignments_file(const std::string& path, const AssignmentSequence& seq);
AssignmentSequence read_assignments(std::istream& is);
AssignmentSequence read_assignments_file(const std::string& path);

void write_params_file(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_params_file(const std::string& path);

}  // namespace dsbm
