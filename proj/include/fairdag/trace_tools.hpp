#pragma once

#include "fairdag/audit_report.hpp"
#include "fairdag/simulator.hpp"

namespace fairdag {

/// Dilates time by `factor` (>= 1) and divides the speed by it, so every
/// job receives the same volume.
ScheduleTrace slow_down(const ScheduleTrace& trace, const Rational& factor);

/// A piece of a unit slot [0,1) on one machine.
struct SlotPiece {
    JobId job = 0;
    Rational start;
    Rational end;
};

/// Wrap-around packing of one segment's rates into m unit slots; one list
/// per machine. Zero rates are skipped. Throws std::invalid_argument when a
/// rate lies outside [0,1] or the rates sum above m.
std::vector<std::vector<SlotPiece>> realize_slots(const std::vector<std::pair<JobId, Rational>>& rates, int machines);

/// True when no job occupies two machines at overlapping offsets.
bool slots_disjoint(const std::vector<std::vector<SlotPiece>>& slots);

enum class ObjectiveKind { completion, flow };

/// Σ w C or Σ w (C − r). Throws std::invalid_argument if some job has no
/// completion time.
Rational objective(const ScheduleTrace& trace, const Instance& inst, ObjectiveKind kind);

/// Checks: segment_tiling, rate_bounds, capacity, volume, support,
/// precedence, slot_realizability, all_completed.
AuditReport validate_trace(const Instance& inst, const ScheduleTrace& trace);

}  // namespace fairdag
