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

#include "buswarden/trace.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "buswarden/rule_eval.hpp"

namespace buswarden {

namespace {

using nlohmann::json;

std::string hex_addr(u32 addr) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", addr);
    return buf;
}

std::optional<u32> parse_hex_addr(const std::string& text) {
    if (text.rfind("0x", 0) != 0) return std::nullopt;
    u64 value = 0;
    for (size_t i = 2; i < text.size(); ++i) {
        char c = text[i];
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else return std::nullopt;
        value = value * 16 + static_cast<u64>(digit);
        if (value > 0xFFFFFFFFull) return std::nullopt;
    }
    return static_cast<u32>(value);
}

}  // namespace

TraceRecord header_record() {
    TraceRecord r;
    r.cycle = 0;
    r.kind = kTraceHeaderKind;
    return r;
}

std::vector<TraceRecord> build_trace(const std::vector<TickReport>& reports,
                                     const Topology& topology) {
    std::map<u32, std::string> slave_names;
    for (const auto& s : topology.slaves) slave_names[s.id] = s.name;
    auto name_of = [&slave_names](std::optional<u32> id)
        -> std::optional<std::string> {
        if (!id) return std::nullopt;
        auto it = slave_names.find(*id);
        if (it == slave_names.end()) return std::nullopt;
        return it->second;
    };

    std::vector<TraceRecord> out;
    for (const auto& tick : reports) {
        for (const auto& t : tick.transfers) {
            TraceRecord r;
            r.cycle = t.cycle;
            r.kind = t.port == Port::Master ? "transfer_master"
                                            : "transfer_slave";
            r.channel = to_string(t.channel);
            r.master = t.user;
            r.slave = name_of(t.slave_id);
            r.addr = t.addr;
            r.prot = t.prot;
            r.qos = t.qos;
            if (t.resp) r.resp = to_string(*t.resp);
            out.push_back(std::move(r));
        }
        for (const auto& ev : tick.events) {
            TraceRecord r;
            r.cycle = ev.cycle;
            r.kind = "event";
            r.event_kind = to_string(ev.kind);
            if (ev.master) r.master = ev.master->user_id;
            if (ev.source == EventSource::SPE) r.slave = name_of(ev.slave_id);
            out.push_back(std::move(r));
        }
        for (const auto& st : tick.stalls) {
            TraceRecord r;
            r.cycle = st.cycle;
            r.kind = "stall";
            r.channel = to_string(st.channel);
            r.master = st.user;
            r.addr = st.address;
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::string to_json_line(const TraceRecord& record) {
    json j;
    j["cycle"] = record.cycle;
    j["kind"] = record.kind;
    j["channel"] = record.channel ? json(*record.channel) : json(nullptr);
    j["master"] = record.master ? json(*record.master) : json(nullptr);
    j["slave"] = record.slave ? json(*record.slave) : json(nullptr);
    j["addr"] = record.addr ? json(hex_addr(*record.addr)) : json(nullptr);
    j["prot"] = record.prot ? json(*record.prot) : json(nullptr);
    j["qos"] = record.qos ? json(*record.qos) : json(nullptr);
    j["resp"] = record.resp ? json(*record.resp) : json(nullptr);
    j["event_kind"] =
        record.event_kind ? json(*record.event_kind) : json(nullptr);
    return j.dump();
}

TraceRecord parse_trace_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw TraceError("malformed trace line: " + line);
    }
    TraceRecord r;
    try {
        r.cycle = j.at("cycle").get<u64>();
        r.kind = j.at("kind").get<std::string>();
        if (!j.at("channel").is_null()) r.channel = j["channel"].get<std::string>();
        if (!j.at("master").is_null()) r.master = j["master"].get<u16>();
        if (!j.at("slave").is_null()) r.slave = j["slave"].get<std::string>();
        if (!j.at("addr").is_null()) {
            auto addr = parse_hex_addr(j["addr"].get<std::string>());
            if (!addr) throw TraceError("malformed trace address");
            r.addr = *addr;
        }
        if (!j.at("prot").is_null()) r.prot = j["prot"].get<u8>();
        if (!j.at("qos").is_null()) r.qos = j["qos"].get<u8>();
        if (!j.at("resp").is_null()) r.resp = j["resp"].get<std::string>();
        if (!j.at("event_kind").is_null()) {
            r.event_kind = j["event_kind"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw TraceError(std::string("malformed trace record: ") + e.what());
    }
    return r;
}

void emit_trace(const std::vector<TraceRecord>& records,
                const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TraceError("cannot open trace file for writing: " + path);
    out << to_json_line(header_record()) << '\n';
    for (const auto& r : records) {
        out << to_json_line(r) << '\n';
    }
    if (!out) throw TraceError("write failure on trace file: " + path);
}

std::vector<TraceRecord> load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("cannot open trace file: " + path);
    std::vector<TraceRecord> records;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TraceRecord r = parse_trace_line(line);
        if (first) {
            if (r.kind != kTraceHeaderKind) {
                throw TraceError("trace file lacks a header record");
            }
            first = false;
            continue;
        }
        records.push_back(std::move(r));
    }
    if (first) throw TraceError("trace file is empty");
    return records;
}

namespace {

struct SlaveAccess {
    u16 user;
    std::string slave;
    u32 addr;
    Direction dir;
    u8 prot;
    u8 qos;
};

// Pulls the audited accesses out of a trace: address-beat transfers observed
// at a slave port.
std::vector<SlaveAccess> slave_accesses(const std::vector<TraceRecord>& records) {
    std::vector<SlaveAccess> out;
    for (const auto& r : records) {
        if (r.kind != "transfer_slave") continue;
        if (!r.channel || (*r.channel != "AW" && *r.channel != "AR")) continue;
        if (!r.master || !r.slave || !r.addr || !r.prot || !r.qos) {
            throw TraceError("slave address record is missing fields");
        }
        SlaveAccess a;
        a.user = *r.master;
        a.slave = *r.slave;
        a.addr = *r.addr;
        a.dir = *r.channel == "AR" ? Direction::Read : Direction::Write;
        a.prot = *r.prot;
        a.qos = *r.qos;
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace

u64 audit_trace(const std::vector<TraceRecord>& records,
                const PolicySpec& spec) {
    u64 leaked = 0;
    for (const auto& a : slave_accesses(records)) {
        const SlaveDecl* s = spec.slave_named(a.slave);
        if (!s) {
            ++leaked;  // traffic into a slave the policy never declared
            continue;
        }
        u32 reg = a.addr >= s->base ? (a.addr - s->base) / 4 : s->regs;
        if (!rules_allow(spec, a.user, a.slave, reg, a.dir, a.prot, a.qos)) {
            ++leaked;
        }
    }
    return leaked;
}

u64 audit_trace_images(const std::vector<TraceRecord>& records,
                       const std::vector<CompiledSlavePolicy>& images) {
    u64 leaked = 0;
    for (const auto& a : slave_accesses(records)) {
        const CompiledSlavePolicy* c = find_compiled(images, a.slave);
        if (!c) {
            ++leaked;
            continue;
        }
        u32 reg = a.addr >= c->base ? (a.addr - c->base) / 4 : c->regs;
        if (!image_allows(c->image, c->regs, a.user, reg, a.dir, a.prot,
                          a.qos)) {
            ++leaked;
        }
    }
    return leaked;
}

}  // namespace buswarden
