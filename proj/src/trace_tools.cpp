#include "fairdag/trace_tools.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace fairdag {

namespace {

std::string interval(const Segment& seg) {
    return "[" + to_fraction_string(seg.start) + "," + to_fraction_string(seg.end) + ")";
}

std::string job_name(JobId id) { return "job " + std::to_string(id); }

}  // namespace

ScheduleTrace slow_down(const ScheduleTrace& trace, const Rational& factor) {
    if (factor < 1) throw std::invalid_argument("slow_down: factor must be at least 1");
    ScheduleTrace out = trace;
    out.speed = trace.speed / factor;
    for (auto& seg : out.segments) {
        seg.start *= factor;
        seg.end *= factor;
    }
    for (auto& [id, c] : out.completions) c *= factor;
    for (auto& [id, s] : out.start_times) s *= factor;
    return out;
}

std::vector<std::vector<SlotPiece>> realize_slots(const std::vector<std::pair<JobId, Rational>>& rates, int machines) {
    if (machines < 1) throw std::invalid_argument("realize_slots: need at least one machine");
    Rational total = 0;
    for (const auto& [id, rate] : rates) {
        if (rate < 0 || rate > 1) {
            throw std::invalid_argument("realize_slots: rate of job " + std::to_string(id) + " outside [0,1]");
        }
        total += rate;
    }
    if (total > machines) throw std::invalid_argument("realize_slots: rates sum above the machine count");

    std::vector<std::vector<SlotPiece>> slots(static_cast<std::size_t>(machines));
    std::size_t machine = 0;
    Rational offset = 0;
    for (const auto& [id, rate] : rates) {
        Rational left = rate;
        while (left > 0) {
            const Rational take = std::min(left, Rational(1 - offset));
            slots[machine].push_back({id, offset, offset + take});
            offset += take;
            left -= take;
            if (offset == 1) {
                offset = 0;
                ++machine;
            }
        }
    }
    return slots;
}

bool slots_disjoint(const std::vector<std::vector<SlotPiece>>& slots) {
    std::map<JobId, std::vector<std::pair<Rational, Rational>>> by_job;
    for (const auto& machine : slots) {
        for (const auto& piece : machine) by_job[piece.job].emplace_back(piece.start, piece.end);
    }
    for (auto& [id, pieces] : by_job) {
        std::sort(pieces.begin(), pieces.end());
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            if (pieces[i].first < pieces[i - 1].second) return false;
        }
    }
    return true;
}

Rational objective(const ScheduleTrace& trace, const Instance& inst, ObjectiveKind kind) {
    Rational total = 0;
    for (const auto& job : inst.jobs) {
        auto it = trace.completions.find(job.id);
        if (it == trace.completions.end()) {
            throw std::invalid_argument("objective: job " + std::to_string(job.id) + " never completes");
        }
        total += job.weight * (kind == ObjectiveKind::flow ? Rational(it->second - job.release) : it->second);
    }
    return total;
}

AuditReport validate_trace(const Instance& inst, const ScheduleTrace& trace) {
    std::map<JobId, const JobSpec*> jobs;
    for (const auto& job : inst.jobs) jobs[job.id] = &job;
    std::map<JobId, std::vector<JobId>> preds;
    for (const auto& [a, b] : inst.dag.edges) preds[b].push_back(a);

    CheckBuilder tiling("segment_tiling", 0);
    CheckBuilder bounds("rate_bounds", 0);
    CheckBuilder capacity("capacity", 0);
    CheckBuilder volume("volume", 0);
    CheckBuilder support("support", 0);
    CheckBuilder precedence("precedence", 0);
    CheckBuilder slots("slot_realizability", 0);
    CheckBuilder completed("all_completed", 0);

    const Rational makespan = trace.makespan();
    if (trace.segments.empty()) {
        for (const auto& [id, c] : trace.completions) tiling.eq(c, 0, "completion of " + job_name(id) + " without segments");
    } else {
        tiling.eq(trace.segments.front().start, 0, "first segment start");
        tiling.eq(trace.segments.back().end, makespan, "last segment end vs makespan");
    }
    std::map<JobId, Rational> processed;
    for (std::size_t s = 0; s < trace.segments.size(); ++s) {
        const auto& seg = trace.segments[s];
        const std::string at = interval(seg);
        tiling.require(seg.start < seg.end, "empty segment " + at);
        if (s + 1 < trace.segments.size()) {
            tiling.eq(trace.segments[s + 1].start, seg.end, "gap or overlap after " + at);
        }

        Rational sum = 0;
        for (const auto& [id, rate] : seg.rates) {
            const std::string where = job_name(id) + " on " + at;
            bounds.le(rate, 1, where);
            bounds.le(0, rate, where);
            sum += rate;
            processed[id] += trace.speed * rate * (seg.end - seg.start);
            if (rate <= 0) continue;

            auto st = trace.start_times.find(id);
            auto ct = trace.completions.find(id);
            support.require(st != trace.start_times.end() && st->second <= seg.start, where + " before its start time");
            support.require(ct != trace.completions.end() && seg.end <= ct->second, where + " after its completion");
            for (JobId p : preds[id]) {
                auto pc = trace.completions.find(p);
                precedence.require(pc != trace.completions.end() && pc->second <= seg.start,
                                   "precedence violation: " + where + " before predecessor job " + std::to_string(p) +
                                       " completes");
            }
        }
        capacity.le(sum, trace.machines, "capacity violation on " + at);

        try {
            slots.require(slots_disjoint(realize_slots(seg.rates, trace.machines)), "job on two machines at once on " + at);
        } catch (const std::invalid_argument& e) {
            slots.require(false, std::string(e.what()) + " on " + at);
        }
    }

    for (const auto& [id, amount] : processed) {
        if (!jobs.count(id)) volume.require(false, "unknown " + job_name(id) + " in trace");
    }
    for (const auto& job : inst.jobs) {
        volume.eq(processed.count(job.id) ? processed[job.id] : Rational(0), job.size, job_name(job.id));
        auto ct = trace.completions.find(job.id);
        completed.require(ct != trace.completions.end(), job_name(job.id) + " never completes");
        if (ct == trace.completions.end()) continue;
        completed.le(job.release, ct->second, job_name(job.id) + " completes before release");
        for (JobId p : preds[job.id]) {
            auto pc = trace.completions.find(p);
            precedence.require(pc != trace.completions.end() && pc->second <= ct->second,
                               "precedence violation: " + job_name(job.id) + " completes before predecessor job " +
                                   std::to_string(p));
        }
    }

    AuditReport report;
    for (auto* b : {&tiling, &bounds, &capacity, &volume, &support, &precedence, &slots, &completed}) {
        report.checks.push_back(b->finish());
    }
    return report;
}

}  // namespace fairdag
