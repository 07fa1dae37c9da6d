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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "buswarden/fabric.hpp"
#include "buswarden/policy_lang.hpp"

namespace buswarden {

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One trace line. Every record carries the same ten fields; unused ones are
/// null in the file. Record kinds: "header.v1", "transfer_master",
/// "transfer_slave", "event", "stall".
struct TraceRecord {
    u64 cycle = 0;
    std::string kind;
    std::optional<std::string> channel;
    std::optional<u16> master;
    std::optional<std::string> slave;
    std::optional<u32> addr;
    std::optional<u8> prot;
    std::optional<u8> qos;
    std::optional<std::string> resp;
    std::optional<std::string> event_kind;

    bool operator==(const TraceRecord&) const = default;
};

constexpr const char* kTraceHeaderKind = "header.v1";

TraceRecord header_record();

/// Flattens per-cycle reports into trace records, resolving slave ids to
/// their topology names. Records appear in cycle order; within a cycle,
/// transfers come first, then events, then stalls.
std::vector<TraceRecord> build_trace(const std::vector<TickReport>& reports,
                                     const Topology& topology);

std::string to_json_line(const TraceRecord& record);
TraceRecord parse_trace_line(const std::string& line);

/// Writes the header record plus every record, one JSON object per line.
/// Identical runs produce byte-identical files.
void emit_trace(const std::vector<TraceRecord>& records,
                const std::string& path);

std::vector<TraceRecord> load_trace(const std::string& path);

/// Counts slave-side address transfers the policy's interpretive evaluator
/// denies. This is the post-hoc check that nothing slipped past the gates;
/// it shares no code with the engine's table pipeline.
u64 audit_trace(const std::vector<TraceRecord>& records,
                const PolicySpec& spec);

/// Image-configured variant: per-slave tables plus their address geometry.
u64 audit_trace_images(const std::vector<TraceRecord>& records,
                       const std::vector<CompiledSlavePolicy>& images);

}  // namespace buswarden
