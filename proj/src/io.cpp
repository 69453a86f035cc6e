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

#include "softalign/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

#include "json.hpp"

namespace softalign {

namespace {

using nlohmann::json;

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_field(std::string_view field, int line_no, int col_no) {
  const std::string_view t = trim(field);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    std::ostringstream msg;
    msg << "csv line " << line_no << ", column " << col_no
        << ": not a number: '" << std::string(t) << "'";
    throw std::invalid_argument(msg.str());
  }
  return value;
}

}  // namespace

std::string serialize_csv(const Matrix& m, bool header) {
  std::string out;
  if (header) {
    out += "# rows=" + std::to_string(m.rows()) +
           " cols=" + std::to_string(m.cols()) + "\n";
  }
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  int declared_rows = -1;
  int declared_cols = -1;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty()) {
      if (in.eof()) break;  // trailing blank line
      std::ostringstream msg;
      msg << "csv line " << line_no << ": empty line";
      throw std::invalid_argument(msg.str());
    }
    if (stripped.front() == '#') {
      if (line_no != 1) {
        std::ostringstream msg;
        msg << "csv line " << line_no << ": comment only allowed on line 1";
        throw std::invalid_argument(msg.str());
      }
      // Header is advisory; if it carries rows=/cols= they are checked.
      std::sscanf(std::string(stripped).c_str(), "# rows=%d cols=%d",
                  &declared_rows, &declared_cols);
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    int col_no = 1;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t len =
          (comma == std::string::npos ? line.size() : comma) - start;
      row.push_back(
          parse_field(std::string_view(line).substr(start, len), line_no,
                      col_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
      ++col_no;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "csv line " << line_no << ": expected " << rows.front().size()
          << " columns, got " << row.size();
      throw std::invalid_argument(msg.str());
    }
    rows.push_back(std::move(row));
  }

  const int n_rows = static_cast<int>(rows.size());
  const int n_cols = rows.empty() ? (declared_cols >= 0 ? declared_cols : 0)
                                  : static_cast<int>(rows.front().size());
  if (declared_rows >= 0 && declared_rows != n_rows) {
    std::ostringstream msg;
    msg << "csv header declares rows=" << declared_rows << " but found "
        << n_rows;
    throw std::invalid_argument(msg.str());
  }
  if (declared_cols >= 0 && n_rows > 0 && declared_cols != n_cols) {
    std::ostringstream msg;
    msg << "csv header declares cols=" << declared_cols << " but found "
        << n_cols;
    throw std::invalid_argument(msg.str());
  }
  Matrix m(n_rows, n_cols);
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_csv(const std::string& path, const Matrix& m, bool header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  const std::string text = serialize_csv(m, header);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

Matrix read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_pgm(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << "P5\n" << m.cols() << " " << m.rows() << "\n255\n";
  std::vector<unsigned char> bytes(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    double v = m.data()[k];
    if (!(v > 0.0)) v = 0.0;
    if (v > 1.0) v = 1.0;
    bytes[k] = static_cast<unsigned char>(std::lround(255.0 * v));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw std::invalid_argument("config: '" + section +
                                "' must be a JSON object");
  }
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("config: unknown key '" + item.key() +
                                  "' in section '" + section + "'");
    }
  }
}

int get_int(const json& obj, const char* key, int fallback, int min_value) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be an integer");
  }
  const long long raw = v.get<long long>();
  if (raw < min_value || raw > 1000000000LL) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' out of range (min " +
                                std::to_string(min_value) + ")");
  }
  return static_cast<int>(raw);
}

double get_double(const json& obj, const char* key, double fallback,
                  double min_value, bool strict_min = false) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be a number");
  }
  const double value = v.get<double>();
  if (!std::isfinite(value) || value < min_value ||
      (strict_min && value <= min_value)) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' out of range");
  }
  return value;
}

std::uint64_t get_seed(const json& obj, const char* key,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be a boolean");
  }
  return v.get<bool>();
}

}  // namespace

Config parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }
  check_keys(root, "<root>", {"kernel", "weights", "trainer"});

  Config config;
  if (root.contains("kernel")) {
    const json& k = root.at("kernel");
    check_keys(k, "kernel", {"max_duration", "num_frames", "noise_std",
                             "seed"});
    config.kernel.max_duration =
        get_int(k, "max_duration", config.kernel.max_duration, 1);
    config.kernel.num_frames =
        get_int(k, "num_frames", config.kernel.num_frames, 1);
    config.kernel.noise_std =
        get_double(k, "noise_std", config.kernel.noise_std, 0.0);
    config.kernel.seed = get_seed(k, "seed", config.kernel.seed);
  }
  if (root.contains("weights")) {
    const json& w = root.at("weights");
    check_keys(w, "weights",
               {"lambda_length", "lambda_duration", "lambda_recon",
                "lambda_mel", "feature_matching_mean"});
    config.weights.lambda_length =
        get_double(w, "lambda_length", config.weights.lambda_length, 0.0);
    config.weights.lambda_duration =
        get_double(w, "lambda_duration", config.weights.lambda_duration, 0.0);
    config.weights.lambda_recon =
        get_double(w, "lambda_recon", config.weights.lambda_recon, 0.0);
    config.weights.lambda_mel =
        get_double(w, "lambda_mel", config.weights.lambda_mel, 0.0);
    config.weights.feature_matching_mean = get_bool(
        w, "feature_matching_mean", config.weights.feature_matching_mean);
  }
  if (root.contains("trainer")) {
    const json& t = root.at("trainer");
    check_keys(t, "trainer",
               {"steps", "learning_rate", "optimizer", "adam_beta1",
                "adam_beta2", "adam_epsilon", "noise_std_init",
                "noise_decay_fraction", "n_tokens", "embed_dim", "task_seed",
                "seed"});
    TrainConfig& tc = config.trainer.train;
    tc.steps = get_int(t, "steps", tc.steps, 0);
    tc.learning_rate =
        get_double(t, "learning_rate", tc.learning_rate, 0.0, true);
    if (t.contains("optimizer")) {
      const json& v = t.at("optimizer");
      if (!v.is_string()) {
        throw std::invalid_argument("config: 'optimizer' must be a string");
      }
      tc.optimizer = optimizer_from_string(v.get<std::string>());
    }
    tc.adam_beta1 = get_double(t, "adam_beta1", tc.adam_beta1, 0.0);
    tc.adam_beta2 = get_double(t, "adam_beta2", tc.adam_beta2, 0.0);
    if (tc.adam_beta1 >= 1.0 || tc.adam_beta2 >= 1.0) {
      throw std::invalid_argument("config: adam betas must be < 1");
    }
    tc.adam_epsilon = get_double(t, "adam_epsilon", tc.adam_epsilon, 0.0, true);
    tc.noise_std_init =
        get_double(t, "noise_std_init", tc.noise_std_init, 0.0);
    tc.noise_decay_fraction = get_double(t, "noise_decay_fraction",
                                         tc.noise_decay_fraction, 0.0);
    if (tc.noise_decay_fraction > 1.0) {
      throw std::invalid_argument(
          "config: 'noise_decay_fraction' must be in [0, 1]");
    }
    tc.seed = get_seed(t, "seed", tc.seed);
    config.trainer.n_tokens = get_int(t, "n_tokens", config.trainer.n_tokens, 1);
    config.trainer.embed_dim =
        get_int(t, "embed_dim", config.trainer.embed_dim, 1);
    config.trainer.task_seed =
        get_seed(t, "task_seed", config.trainer.task_seed);
  }
  config.trainer.train.weights = config.weights;
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string serialize_config(const Config& config) {
  json root;
  root["kernel"] = {{"max_duration", config.kernel.max_duration},
                    {"num_frames", config.kernel.num_frames},
                    {"noise_std", config.kernel.noise_std},
                    {"seed", config.kernel.seed}};
  root["weights"] = {
      {"lambda_length", config.weights.lambda_length},
      {"lambda_duration", config.weights.lambda_duration},
      {"lambda_recon", config.weights.lambda_recon},
      {"lambda_mel", config.weights.lambda_mel},
      {"feature_matching_mean", config.weights.feature_matching_mean}};
  const TrainConfig& tc = config.trainer.train;
  root["trainer"] = {{"steps", tc.steps},
                     {"learning_rate", tc.learning_rate},
                     {"optimizer", optimizer_to_string(tc.optimizer)},
                     {"adam_beta1", tc.adam_beta1},
                     {"adam_beta2", tc.adam_beta2},
                     {"adam_epsilon", tc.adam_epsilon},
                     {"noise_std_init", tc.noise_std_init},
                     {"noise_decay_fraction", tc.noise_decay_fraction},
                     {"n_tokens", config.trainer.n_tokens},
                     {"embed_dim", config.trainer.embed_dim},
                     {"task_seed", config.trainer.task_seed},
                     {"seed", tc.seed}};
  return root.dump(2) + "\n";
}

}  // namespace softalign
