#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "hrc/model.hpp"
#include "hrc/monitor.hpp"

namespace hrc {

using Json = nlohmann::json;

// Scenario: { "jobs": [ { "id", "tasks": [ { "id", "desc", "t_R"|null, "t_H",
// "D_R", "capability_R", "u", "k": [..] } ], "precedence": [[i,j],..] } ],
// "metrics": [ { "id", "kind": "summed"|"average", "bound" } ] }
ShiftSpec parse_scenario(const Json& j);
Json scenario_to_json(const ShiftSpec& shift);

// { "metrics": [ { "id", "C0", "t_m" } ] }
MetricState parse_state(const Json& j);
Json state_to_json(const MetricState& state);

// { "levels": [ { "S_H": [..], "S_R": [..], "c": <sec> } ], "objective": <real> }
Assignment parse_assignment(const Json& j);
Json assignment_to_json(const Assignment& a);

// { "human": [ { "task", "duration", "profile": "linear"|[[t,pct],..], "job"? } ],
//   "robot": [ { "task", "duration"?, "fail_after"?, "job"? } ],
//   "messages": [ { "at", "sender", "kind", "task", "job"? } ], "seed" }
Trace parse_trace(const Json& j);
Json trace_to_json(const Trace& trace);

MessageKind message_kind_from_string(const std::string& s);
std::string_view to_string(MessageKind k);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

ShiftSpec load_scenario(const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path);

}  // namespace hrc
