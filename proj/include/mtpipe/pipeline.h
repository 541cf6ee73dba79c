//
// Copyright 2026 The mtpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MTPIPE_PIPELINE_H_
#define MTPIPE_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mtpipe {

inline constexpr const char* kToolkitVersion = "0.1.0";
// Directory searched for config files that do not exist as given.
inline constexpr const char* kConfigDirEnv = "MTPIPE_CONFIG_DIR";

// 128-bit FNV-1a of the file bytes, 32 hex digits.
std::string file_digest_hex(const std::string& path);

// Returns path if it exists, else $MTPIPE_CONFIG_DIR/path if that exists;
// throws IoError otherwise.
std::string resolve_config_path(const std::string& path);

// Execution record of one pipeline run: per-stage parameters plus input and
// output file digests and record counts. Contains no timestamps, so a rerun
// with the same config and inputs reproduces it byte for byte.
struct Manifest {
  struct File {
    std::string path;  // as written in the config
    std::string digest;
    int64_t records = -1;  // record/line count, -1 when not applicable
  };
  struct Stage {
    std::string name;
    std::string op;
    nlohmann::json params;
    std::vector<File> inputs;
    std::vector<File> outputs;
    nlohmann::json details;  // op-specific counts and reports
  };

  std::string version = kToolkitVersion;
  uint64_t seed = 0;
  int jobs = 1;
  std::string config_digest;
  std::vector<Stage> stages;

  nlohmann::json to_json() const;
  void save(const std::string& path) const;
};

// Runs the stages of a JSON pipeline config in order and returns the
// manifest. Relative paths inside the config resolve against the config
// file's directory. jobs_override > 0 replaces the config's "jobs" value;
// seed_override replaces its "seed". The manifest is written to
// manifest_path if given, else to the config's "manifest" path if present.
// Stage errors are rethrown with the stage name prefixed.
Manifest run_pipeline(const std::string& config_path, int jobs_override = 0,
                      const std::string& manifest_path = "",
                      std::optional<uint64_t> seed_override = std::nullopt);

// The cleaning chain applied when a preprocess config lists no filters:
// dedup, strip_invisible, normalize_width, normalize_punct, max_tokens,
// ratio with default thresholds.
nlohmann::json default_filter_config();

}  // namespace mtpipe

#endif  // MTPIPE_PIPELINE_H_
