// Copyright 2026 The grsvnet Authors.
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

#include "grsv/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "grsv/error.hpp"

namespace grsv {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kSoftmax: return "softmax";
    case Mode::kSoftmaxWd: return "softmax_wd";
    case Mode::kSoftmaxOle: return "softmax_ole";
    case Mode::kOleGrsvnet: return "ole_grsvnet";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kSoftmax, Mode::kSoftmaxWd, Mode::kSoftmaxOle, Mode::kOleGrsvnet})
    if (mode_name(m) == name) return m;
  throw ConfigError("unknown mode '" + std::string(name) +
                    "' (expected softmax, softmax_wd, softmax_ole or ole_grsvnet)");
}

void TrainConfig::validate() const {
  dataset.validate();
  if (hidden_dims.empty()) throw ConfigError("hidden_dims must list at least one layer");
  for (Index h : hidden_dims)
    if (h < 1) throw ConfigError("hidden_dims entries must be positive");
  if (mode == Mode::kOleGrsvnet && !(lambda > 0.0))
    throw ConfigError("lambda must be positive for ole_grsvnet");
  if (mode == Mode::kSoftmaxOle && !(ole_weight > 0.0))
    throw ConfigError("ole_weight must be positive for softmax_ole");
  if (mode == Mode::kSoftmaxWd && !(weight_decay > 0.0))
    throw ConfigError("weight_decay must be positive for softmax_wd");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  for (const auto& [m, v] : lr_by_mode)
    if (!(v > 0.0)) throw ConfigError("lr_by_mode." + std::string(mode_name(m)) + " must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (!(g_fraction > 0.0 && g_fraction < 1.0)) throw ConfigError("g_fraction must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("ratio must lie in (0, 1]");
  if (!(trunc > 0.0)) throw ConfigError("trunc must be positive");
}

double TrainConfig::learning_rate() const {
  const auto it = lr_by_mode.find(mode);
  return it == lr_by_mode.end() ? lr : it->second;
}

std::vector<Index> TrainConfig::network_dims(Index input_dim) const {
  std::vector<Index> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(uses_softmax_head(mode) ? Index{dataset.classes} : hidden_dims.back());
  return dims;
}

namespace {

using Value = std::variant<double, std::string, bool, std::vector<double>>;

struct Entry {
  Value value;
  int line;
};

[[noreturn]] void bad(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(std::string_view s, int line) {
  std::string t(s);
  // from_chars does not accept a leading '+'.
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  t.erase(std::remove(t.begin(), t.end(), '_'), t.end());
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) bad(line, "cannot parse value '" + std::string(s) + "'");
  return v;
}

Value parse_value(std::string_view s, int line) {
  if (s.empty()) bad(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') bad(line, "unterminated string");
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') bad(line, "unterminated array");
    std::vector<double> items;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      if (!item.empty()) items.push_back(parse_number(item, line));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return items;
  }
  return parse_number(s, line);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

class Fields {
 public:
  explicit Fields(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  template <typename F>
  void number(const std::string& key, F&& assign) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    const auto* v = std::get_if<double>(&it->second.value);
    if (!v) bad(it->second.line, "'" + key + "' must be a number");
    assign(*v, it->second.line);
    entries_.erase(it);
  }
  void real(const std::string& key, double& out) {
    number(key, [&](double v, int) { out = v; });
  }
  template <typename I>
  void integer(const std::string& key, I& out) {
    number(key, [&](double v, int line) {
      if (v != std::floor(v) || v < 0 || v > 9.007199254740992e15)
        bad(line, "'" + key + "' must be a nonnegative integer");
      out = static_cast<I>(v);
    });
  }
  void string(const std::string& key, std::string& out) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    const auto* v = std::get_if<std::string>(&it->second.value);
    if (!v) bad(it->second.line, "'" + key + "' must be a string");
    out = *v;
    entries_.erase(it);
  }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const { return entries_.at(key).line; }
  void int_list(const std::string& key, std::vector<Index>& out) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    const auto* v = std::get_if<std::vector<double>>(&it->second.value);
    if (!v) bad(it->second.line, "'" + key + "' must be an array of integers");
    out.clear();
    for (double d : *v) {
      if (d != std::floor(d) || d < 1) bad(it->second.line, "'" + key + "' entries must be positive integers");
      out.push_back(static_cast<Index>(d));
    }
    entries_.erase(it);
  }
  void reject_leftovers() const {
    if (entries_.empty()) return;
    const auto& [key, e] = *entries_.begin();
    bad(e.line, "unknown key '" + key + "'");
  }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace

TrainConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string table;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string stripped = strip_comment(raw);
    const std::string_view line = trim(stripped);
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string_view::npos) {
      if (line.back() != ']') bad(line_no, "malformed table header");
      table = std::string(trim(line.substr(1, line.size() - 2)));
      if (table != "dataset" && table != "lr_by_mode") bad(line_no, "unknown table [" + table + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(line_no, "expected key = value");
    const std::string key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) bad(line_no, "empty key");
    const std::string full = table.empty() ? key : table + "." + key;
    if (entries.count(full)) bad(line_no, "duplicate key '" + full + "'");
    entries.emplace(full, Entry{parse_value(trim(line.substr(eq + 1)), line_no), line_no});
  }

  TrainConfig c;
  Fields f(std::move(entries));
  std::string s;
  if (f.has("dataset.kind")) {
    const int line = f.line("dataset.kind");
    f.string("dataset.kind", s);
    if (s == "subspace_gaussian") c.dataset.kind = DatasetKind::kSubspaceGaussian;
    else if (s == "gaussian_noise") c.dataset.kind = DatasetKind::kGaussianNoise;
    else if (s == "csv") c.dataset.kind = DatasetKind::kCsv;
    else bad(line, "dataset.kind must be subspace_gaussian, gaussian_noise or csv");
  }
  if (f.has("dataset.label_mode")) {
    const int line = f.line("dataset.label_mode");
    f.string("dataset.label_mode", s);
    if (s == "true") c.dataset.label_mode = LabelMode::kTrue;
    else if (s == "shuffled") c.dataset.label_mode = LabelMode::kShuffled;
    else bad(line, "dataset.label_mode must be \"true\" or \"shuffled\"");
  }
  f.integer("dataset.K", c.dataset.classes);
  f.integer("dataset.per_class", c.dataset.per_class);
  f.integer("dataset.dim", c.dataset.dim);
  f.real("dataset.amplification", c.dataset.amplification);
  f.integer("dataset.seed", c.dataset.seed);
  f.real("dataset.test_fraction", c.dataset.test_fraction);
  f.string("dataset.path", c.dataset.path);

  f.int_list("hidden_dims", c.hidden_dims);
  if (f.has("mode")) {
    const int line = f.line("mode");
    f.string("mode", s);
    try {
      c.mode = parse_mode(s);
    } catch (const ConfigError& e) {
      bad(line, e.what());
    }
  }
  f.real("lambda", c.lambda);
  f.real("ole_weight", c.ole_weight);
  f.real("weight_decay", c.weight_decay);
  f.real("lr", c.lr);
  for (Mode m : {Mode::kSoftmax, Mode::kSoftmaxWd, Mode::kSoftmaxOle, Mode::kOleGrsvnet}) {
    const std::string key = "lr_by_mode." + std::string(mode_name(m));
    if (f.has(key)) f.real(key, c.lr_by_mode[m]);
  }
  f.real("momentum", c.momentum);
  f.integer("epochs", c.epochs);
  f.integer("batch_size", c.batch_size);
  f.real("g_fraction", c.g_fraction);
  f.real("eps", c.eps);
  f.real("ratio", c.ratio);
  f.real("trunc", c.trunc);
  f.integer("seed", c.seed);
  f.reject_leftovers();
  c.validate();
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const TrainConfig& c) {
  auto num = [](double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    return s;
  };
  std::ostringstream os;
  os << "mode = \"" << mode_name(c.mode) << "\"\n";
  os << "hidden_dims = [";
  for (size_t i = 0; i < c.hidden_dims.size(); ++i) os << (i ? ", " : "") << c.hidden_dims[i];
  os << "]\n";
  os << "lambda = " << num(c.lambda) << '\n';
  os << "ole_weight = " << num(c.ole_weight) << '\n';
  os << "weight_decay = " << num(c.weight_decay) << '\n';
  os << "lr = " << num(c.lr) << '\n';
  os << "momentum = " << num(c.momentum) << '\n';
  os << "epochs = " << c.epochs << '\n';
  os << "batch_size = " << c.batch_size << '\n';
  os << "g_fraction = " << num(c.g_fraction) << '\n';
  os << "eps = " << num(c.eps) << '\n';
  os << "ratio = " << num(c.ratio) << '\n';
  os << "trunc = " << num(c.trunc) << '\n';
  os << "seed = " << c.seed << '\n';
  if (!c.lr_by_mode.empty()) {
    os << "\n[lr_by_mode]\n";
    for (const auto& [m, v] : c.lr_by_mode) os << mode_name(m) << " = " << num(v) << '\n';
  }
  os << "\n[dataset]\n";
  const char* kind = c.dataset.kind == DatasetKind::kSubspaceGaussian ? "subspace_gaussian"
                     : c.dataset.kind == DatasetKind::kGaussianNoise  ? "gaussian_noise"
                                                                      : "csv";
  os << "kind = \"" << kind << "\"\n";
  os << "K = " << c.dataset.classes << '\n';
  os << "per_class = " << c.dataset.per_class << '\n';
  os << "dim = " << c.dataset.dim << '\n';
  os << "amplification = " << num(c.dataset.amplification) << '\n';
  os << "label_mode = \"" << (c.dataset.label_mode == LabelMode::kTrue ? "true" : "shuffled") << "\"\n";
  os << "seed = " << c.dataset.seed << '\n';
  os << "test_fraction = " << num(c.dataset.test_fraction) << '\n';
  if (!c.dataset.path.empty()) os << "path = \"" << c.dataset.path << "\"\n";
  return os.str();
}

}  // namespace grsv
