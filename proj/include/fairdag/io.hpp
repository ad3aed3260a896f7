#pragma once

#include "fairdag/simulator.hpp"

#include <filesystem>
#include <string>

namespace fairdag {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

/// Hash of the canonical serialization, so formatting differences in the
/// input file do not change it.
std::string instance_hash(const Instance& inst);

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// segment_start, segment_end, job_id, rate (floats) plus exact columns.
/// Idle segments produce one row with an empty job id.
std::string trace_csv(const ScheduleTrace& trace);

/// job_id, start_time, completion (floats) plus exact columns.
std::string completions_csv(const ScheduleTrace& trace);

}  // namespace fairdag
