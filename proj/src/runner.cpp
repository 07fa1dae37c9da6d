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

#include "buswarden/runner.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

namespace buswarden {

namespace {

using nlohmann::json;

void configure_engines(Simulator& sim, const ScenarioScript& script) {
    for (const auto& slave : script.slaves) {
        if (!slave.guarded) continue;
        const CompiledSlavePolicy* c = find_compiled(script.compiled, slave.name);
        if (!c) {
            throw ScenarioError("no compiled policy for guarded slave '" +
                                slave.name + "'");
        }
        for (u32 i = 0; i < c->image.device_words.size(); ++i) {
            auto r = sim.spe_configure(slave.id, PolicyEngine::kDeviceBase + i,
                                       c->image.device_words[i]);
            if (r != PolicyEngine::ConfigResult::Ok) {
                throw ScenarioError("device table of '" + slave.name +
                                    "' does not fit its capacity");
            }
        }
        for (u32 i = 0; i < c->image.policy_words.size(); ++i) {
            auto r = sim.spe_configure(slave.id, PolicyEngine::kPolicyBase + i,
                                       c->image.policy_words[i]);
            if (r != PolicyEngine::ConfigResult::Ok) {
                throw ScenarioError("policy table of '" + slave.name +
                                    "' does not fit its capacity");
            }
        }
        if (script.spe_enabled) {
            sim.spe_configure(slave.id, PolicyEngine::kControlOffset, 1u);
        }
    }
    if (script.sck_enabled) {
        for (u32 mi = 0; mi < script.masters.size(); ++mi) {
            auto r = sim.sck_configure(mi, SanityChecker::kReloadOffset,
                                       script.sck_reload);
            if (r != SanityChecker::ConfigResult::Ok) {
                throw ScenarioError("sanity checker rejected reload value");
            }
            sim.sck_configure(mi, SanityChecker::kControlOffset, 1u);
        }
    }
}

json leftover_json(const Simulator::Leftover& left) {
    json j;
    j["master"] = left.user;
    j["op"] = to_string(left.direction);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", left.address);
    j["addr"] = buf;
    j["scripted_cycle"] = left.scripted_cycle;
    j["issued"] = left.first_drive_cycle.has_value();
    j["stalled"] = left.stalled;
    j["flushed"] = left.flushed;
    return j;
}

}  // namespace

RunResult run_script(const ScenarioScript& script, const RunOptions& options) {
    u64 cycles = options.cycles_override.value_or(script.cycles);
    u64 seed = options.seed_override.value_or(script.seed);

    Simulator sim(topology_of(script));
    configure_engines(sim, script);
    sim.set_response_policy(script.response_policy);
    sim.set_thresholds(script.thresholds);
    sim.set_env_schedule(script.env);
    for (const auto& w : script.config_writes) sim.schedule_config_write(w);

    std::vector<TickReport> history;
    history.reserve(cycles);
    for (u64 c = 0; c < cycles; ++c) {
        history.push_back(sim.step());
    }

    RunResult result;
    result.trace = build_trace(history, sim.topology());

    VerdictReport& rep = result.report;
    rep.scenario = script.name;
    rep.cycles_run = cycles;
    rep.seed = seed;
    for (const auto& tick : history) {
        rep.events.insert(rep.events.end(), tick.events.begin(),
                          tick.events.end());
        rep.countermeasures.insert(rep.countermeasures.end(),
                                   tick.countermeasures.begin(),
                                   tick.countermeasures.end());
        rep.stalls.insert(rep.stalls.end(), tick.stalls.begin(),
                          tick.stalls.end());
        rep.per_transaction.insert(rep.per_transaction.end(),
                                   tick.completed.begin(),
                                   tick.completed.end());
    }
    rep.scripted = sim.scripted_count();
    rep.completed = sim.completed_count();
    rep.unfinished = sim.unfinished();
    rep.flushed = sim.flushed();
    rep.final_state = sim.security_state();

    if (script.policy_source) {
        rep.leaked_accesses = audit_trace(result.trace, *script.policy_source);
    } else {
        rep.leaked_accesses = audit_trace_images(result.trace, script.compiled);
    }

    if (rep.leaked_accesses > 0) {
        rep.exit_code = kExitLeak;
    } else if (!rep.events.empty() || !rep.stalls.empty()) {
        rep.exit_code = kExitDetected;
    } else {
        rep.exit_code = kExitClean;
    }

    if (options.trace_path) emit_trace(result.trace, *options.trace_path);
    if (options.report_path) {
        std::ofstream out(*options.report_path, std::ios::binary);
        if (!out) {
            throw ScenarioError("cannot open report file: " +
                                *options.report_path);
        }
        out << report_to_json(rep) << '\n';
    }
    return result;
}

RunResult run_scenario(const std::string& path, const RunOptions& options) {
    ScenarioScript script = load_scenario(path);
    return run_script(script, options);
}

std::string report_to_json(const VerdictReport& rep) {
    json j;
    j["report_version"] = 1;
    j["scenario"] = rep.scenario;
    j["cycles_run"] = rep.cycles_run;
    j["seed"] = rep.seed;
    j["exit_code"] = rep.exit_code;
    j["leaked_accesses"] = rep.leaked_accesses;

    json events = json::array();
    for (const auto& ev : rep.events) {
        json e;
        e["cycle"] = ev.cycle;
        e["kind"] = to_string(ev.kind);
        e["source"] = to_string(ev.source);
        e["master"] = ev.master ? json(ev.master->user_id) : json(nullptr);
        e["slave_id"] = ev.source == EventSource::SPE ? json(ev.slave_id)
                                                      : json(nullptr);
        events.push_back(e);
    }
    j["events"] = events;

    json cms = json::array();
    for (const auto& cm : rep.countermeasures) {
        json c;
        c["cycle"] = cm.cycle;
        c["action"] = to_string(cm.action);
        c["trigger"] = to_string(cm.trigger);
        cms.push_back(c);
    }
    j["countermeasures"] = cms;

    json stalls = json::array();
    for (const auto& st : rep.stalls) {
        json s;
        s["cycle"] = st.cycle;
        s["master"] = st.user;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "0x%08x", st.address);
        s["addr"] = buf;
        s["channel"] = to_string(st.channel);
        stalls.push_back(s);
    }
    j["stalls"] = stalls;

    json txns = json::array();
    u64 lat_min = 0, lat_max = 0, lat_sum = 0;
    for (const auto& t : rep.per_transaction) {
        json x;
        x["master"] = t.user;
        x["op"] = to_string(t.direction);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "0x%08x", t.address);
        x["addr"] = buf;
        x["prot"] = t.prot;
        x["qos"] = t.qos;
        x["scripted_cycle"] = t.scripted_cycle;
        x["issue_cycle"] = t.issue_cycle;
        x["complete_cycle"] = t.complete_cycle;
        x["status"] = to_string(t.status);
        txns.push_back(x);
        u64 lat = t.complete_cycle - t.issue_cycle;
        lat_sum += lat;
        if (txns.size() == 1) {
            lat_min = lat_max = lat;
        } else {
            lat_min = std::min(lat_min, lat);
            lat_max = std::max(lat_max, lat);
        }
    }
    j["transactions"] = txns;
    j["latency"] = {{"count", rep.per_transaction.size()},
                    {"min", lat_min},
                    {"max", lat_max},
                    {"sum", lat_sum}};

    json unfinished = json::array();
    for (const auto& left : rep.unfinished) unfinished.push_back(leftover_json(left));
    j["unfinished"] = unfinished;
    json flushed = json::array();
    for (const auto& left : rep.flushed) flushed.push_back(leftover_json(left));
    j["flushed"] = flushed;

    j["accounting"] = {{"scripted", rep.scripted},
                       {"completed", rep.completed},
                       {"unfinished", rep.unfinished.size()},
                       {"flushed", rep.flushed.size()}};

    j["final_state"] = {{"keys_present", rep.final_state.keys_present},
                        {"crypto_enabled", rep.final_state.crypto_enabled},
                        {"readback_enabled", rep.final_state.readback_enabled},
                        {"locked_down", rep.final_state.locked_down},
                        {"reset_count", rep.final_state.reset_count}};

    return j.dump(2);
}

}  // namespace buswarden
