#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "advtext/classifier.hpp"
#include "advtext/training.hpp"

namespace advtext {

struct RunConfig {
  TrainConfig train;
  ModelOptions model;
  std::size_t eval_n = 1000;
  std::string eval_split = "test";

  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

// Flat `key = value` lines; `#` starts a comment.
KeyValues parse_key_values(std::istream& in, const std::string& source_name);

// Applies recognised keys; unknown keys or bad values raise InvalidArgument.
void apply_key_values(RunConfig& config, const KeyValues& values);

const std::vector<std::string>& config_keys();
KeyValues to_key_values(const RunConfig& config);
std::string format_key_values(const KeyValues& values);

}  // namespace advtext
