#pragma once

#include "profci/evaluator.hpp"
#include "profci/forge.hpp"
#include "profci/reporting.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace profci {

// Knobs of the synthetic classroom. Defaults give a plausible class of 30
// working through 25 tasks.
struct SimConfig {
    int student_count = 30;
    int task_count = 25;
    uint64_t seed = 0;
    double mean_task_minutes = 35.0;      // exponential mean per build
    double regression_probability = 0.1;  // chance a build breaks an earlier task
    double anticipation_probability = 0.1; // chance a build solves two tasks at once
    double break_probability = 0.15;      // chance of a >60 min pause before a build
    double session_hours = 4.0;           // work per sitting before an overnight gap
};

// Throws config_invalid naming the offending field.
void validate_sim_config(const SimConfig& config);

// What the simulator knows it did for one task of one student, recorded
// with the same semantics the analytics must later recover: handed out at
// the first build whose score equals the task index, completed at the
// first later build with a higher score, anticipated when the task was
// solved inside a multi-task jump and therefore never handed out.
struct GroundTruthTask {
    std::string task_id;
    std::optional<Timestamp> handed_out;
    std::optional<Timestamp> completed;
    bool anticipated = false;

    bool operator==(const GroundTruthTask&) const = default;
};

struct AppliedAction {
    std::string user;
    std::string build_id;
    ForgeAction action;
    int issue_number = 0; // issue created or commented

    bool operator==(const AppliedAction&) const = default;
};

struct SimOutcome {
    ExerciseManifest manifest;
    std::vector<ProgressEvent> events;  // chronological across students
    std::vector<CommitRecord> commits;  // chronological across students
    std::map<std::string, std::vector<GroundTruthTask>> ground_truth; // user -> task order
    std::vector<AppliedAction> forge_transcript; // application order
    std::map<std::string, std::vector<FakeForge::Issue>> forge_end_state; // user -> repo
};

// Deterministic for a fixed config (splitmix64 streams, one per student,
// so a student's trace does not depend on how many classmates follow).
// Every simulated build routes through evaluate_build and a per-student
// FakeForge, so transcripts obey the evaluator and forge contracts.
SimOutcome simulate(const SimConfig& config);

// The synthetic exercise the simulator drives; also useful as a fixture.
ExerciseManifest make_sim_manifest(int task_count);

// One deterministic JSON document covering the whole outcome.
std::string serialize_sim_outcome(const SimOutcome& outcome);

// Writes events.jsonl, commits.csv, ground_truth.json and
// forge_transcript.json into the directory (created if needed); returns
// the paths written.
std::vector<std::filesystem::path> write_sim_artifacts(const SimOutcome& outcome,
                                                       const std::filesystem::path& directory);

} // namespace profci
