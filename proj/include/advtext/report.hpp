#pragma once

#include <json.hpp>

#include "advtext/attack.hpp"
#include "advtext/config.hpp"
#include "advtext/corpus.hpp"
#include "advtext/training.hpp"

namespace advtext {

using Json = nlohmann::ordered_json;

Json to_json(const AttackOutcome& outcome);
Json to_json(const AttackSummary& summary);
Json to_json(const RobustnessReport& report);
Json to_json(const LengthStats& stats);
Json to_json(const RunConfig& config);

// Wall time is left out unless asked for, so reports stay reproducible.
Json to_json(const EpochLog& log, bool with_wall_time = false);

std::string hex64(std::uint64_t v);

}  // namespace advtext
