/*
 * Copyright 2026 The buswarden Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "buswarden/scenario.hpp"
#include "buswarden/trace.hpp"

namespace buswarden {

// Process exit codes of the scenario runner.
constexpr int kExitClean = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDetected = 2;  // attack detected and contained
constexpr int kExitLeak = 3;      // the trace audit found policy violations

struct RunOptions {
    std::optional<u64> cycles_override;
    std::optional<u64> seed_override;
    std::optional<std::string> trace_path;
    std::optional<std::string> report_path;
};

/// Everything a finished run reports: detections, responses, the independent
/// audit verdict, latency accounting and the final security posture.
struct VerdictReport {
    std::string scenario;
    u64 cycles_run = 0;
    u64 seed = 0;

    std::vector<SecurityEvent> events;
    std::vector<AppliedCountermeasure> countermeasures;
    std::vector<StallRecord> stalls;

    u64 leaked_accesses = 0;  // from the post-hoc trace audit

    std::vector<CompletedTxn> per_transaction;
    u64 scripted = 0;
    u64 completed = 0;
    std::vector<Simulator::Leftover> unfinished;
    std::vector<Simulator::Leftover> flushed;

    SystemSecurityState final_state;
    int exit_code = kExitClean;
};

struct RunResult {
    VerdictReport report;
    std::vector<TraceRecord> trace;
};

RunResult run_script(const ScenarioScript& script, const RunOptions& options);
RunResult run_scenario(const std::string& path, const RunOptions& options);

/// Deterministic JSON rendering of the report (written when --report is on).
std::string report_to_json(const VerdictReport& report);

}  // namespace buswarden
