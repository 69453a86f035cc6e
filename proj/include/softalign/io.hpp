// Copyright 2026 The SoftAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// File formats used by the CLI: CSV matrices with shortest round-trip
// doubles, 8-bit binary PGM heatmaps, and the JSON run configuration.
// Everything is plain text or a trivially inspectable binary; parse and
// serialize round-trip bit-exactly for doubles.

#ifndef SOFTALIGN_IO_HPP_
#define SOFTALIGN_IO_HPP_

#include <cstdint>
#include <string>

#include "softalign/losses.hpp"
#include "softalign/matrix.hpp"
#include "softalign/toy_trainer.hpp"

namespace softalign {

// One matrix row per line, comma-separated. Values are written with the
// shortest decimal form that parses back to the identical double. An
// optional first line `# rows=N cols=M` is written by default and accepted
// (but not required) when reading.
std::string serialize_csv(const Matrix& m, bool header = true);
Matrix parse_csv(const std::string& text);

// File wrappers; errors carry the path (and line number on parse errors)
// in the exception message.
void write_csv(const std::string& path, const Matrix& m, bool header = true);
Matrix read_csv(const std::string& path);

// Binary PGM (P5, maxval 255), one pixel per matrix entry, value =
// round(255 * clamp(x, 0, 1)). Display-only; not used as a data format.
void write_pgm(const std::string& path, const Matrix& m);

// Run configuration, read from a JSON object with sections `kernel`,
// `weights` and `trainer`. Unknown keys anywhere are rejected; every field
// is validated with a message naming the offending key.
struct KernelConfig {
  int max_duration = 4;
  int num_frames = 16;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

struct TrainerConfig {
  int n_tokens = 6;
  int embed_dim = 4;
  std::uint64_t task_seed = 0;
  TrainConfig train;  // steps, learning rate, optimizer, noise, seed
};

struct Config {
  KernelConfig kernel;
  LossWeights weights;
  TrainerConfig trainer;
};

Config parse_config(const std::string& json_text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& config);

}  // namespace softalign

#endif  // SOFTALIGN_IO_HPP_
