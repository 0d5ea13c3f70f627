/*
 * Copyright 2026 The NTL Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ntlwb/gbdt/model_io.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <vector>

#include "ntlwb/data/csv.h"
#include "ntlwb/util/error.h"
#include "ntlwb/util/text.h"

namespace ntlwb::gbdt {
namespace {

std::string FormatReal(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return FormatDouble(value);
}

[[noreturn]] void Corrupt(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kCorruptModel,
              "model line " + std::to_string(line) + ": " + what);
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(SplitFields(text, '\n')) {
    while (!lines_.empty() && Trim(lines_.back()).empty()) lines_.pop_back();
  }

  // Next line split on single spaces; the first token must equal `keyword`.
  std::vector<std::string_view> Expect(std::string_view keyword) {
    if (next_ >= lines_.size()) Corrupt(next_ + 1, "unexpected end of file");
    std::string_view line = lines_[next_++];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto tokens = SplitFields(line, ' ');
    if (tokens.empty() || tokens[0] != keyword) {
      Corrupt(next_, "expected '" + std::string(keyword) + "'");
    }
    return tokens;
  }

  // Text after "<keyword> " on the next line.
  std::string_view ExpectRest(std::string_view keyword) {
    if (next_ >= lines_.size()) Corrupt(next_ + 1, "unexpected end of file");
    std::string_view line = lines_[next_++];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.starts_with(keyword) || line.size() <= keyword.size() ||
        line[keyword.size()] != ' ') {
      Corrupt(next_, "expected '" + std::string(keyword) + "'");
    }
    return line.substr(keyword.size() + 1);
  }

  std::string_view Peek() const {
    return next_ < lines_.size() ? lines_[next_] : std::string_view();
  }
  std::size_t line() const { return next_; }
  bool done() const { return next_ >= lines_.size(); }

 private:
  std::vector<std::string_view> lines_;
  std::size_t next_ = 0;
};

double Real(LineReader& in, std::string_view token) {
  double value = 0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    Corrupt(in.line(), "bad number '" + std::string(token) + "'");
  }
  return value;
}

std::int64_t Integer(LineReader& in, std::string_view token) {
  const auto value = ParseInt(token);
  if (!value) Corrupt(in.line(), "bad integer '" + std::string(token) + "'");
  return *value;
}

void Arity(LineReader& in, const std::vector<std::string_view>& tokens, std::size_t n) {
  if (tokens.size() != n) Corrupt(in.line(), "wrong field count");
}

}  // namespace

std::string SerializeModel(const BoostedEnsemble& model) {
  std::string out = "ntlwb-model " + std::to_string(kModelFormatVersion) + "\n";
  const TrainConfig& c = model.config;
  out += "config " + std::to_string(c.n_trees) + " " + std::to_string(c.max_depth) + " " +
         FormatReal(c.learning_rate) + " " + std::to_string(c.min_child_cover) + " " +
         std::to_string(c.seed) + "\n";
  out += "base_score " + FormatReal(model.base_score) + "\n";
  out += "learning_rate " + FormatReal(model.learning_rate) + "\n";
  out += "features " + std::to_string(model.feature_names.size()) + "\n";
  for (const auto& name : model.feature_names) out += "feature " + name + "\n";
  out += "trees " + std::to_string(model.trees.size()) + "\n";
  for (const auto& tree : model.trees) {
    out += "tree " + std::to_string(tree.size()) + "\n";
    for (const TreeNode& n : tree.nodes()) {
      if (n.is_leaf()) {
        out += "leaf " + FormatReal(n.value) + " " + std::to_string(n.cover) + "\n";
      } else {
        out += "split " + std::to_string(n.feature) + " " + FormatReal(n.threshold) + " " +
               (n.missing_goes == MissingGoes::kLeft ? "L" : "R") + " " + FormatReal(n.value) +
               " " + std::to_string(n.cover) + "\n";
      }
    }
  }
  out += "end\n";
  return out;
}

BoostedEnsemble DeserializeModel(std::string_view text) {
  LineReader in(text);
  if (in.done()) Corrupt(1, "empty model file");
  {
    const auto header = in.Expect("ntlwb-model");
    Arity(in, header, 2);
    const auto version = Integer(in, header[1]);
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "model format version " + std::to_string(version) + ", expected " +
                      std::to_string(kModelFormatVersion));
    }
  }
  BoostedEnsemble model;
  {
    const auto t = in.Expect("config");
    Arity(in, t, 6);
    model.config.n_trees = static_cast<std::size_t>(Integer(in, t[1]));
    model.config.max_depth = static_cast<std::size_t>(Integer(in, t[2]));
    model.config.learning_rate = Real(in, t[3]);
    model.config.min_child_cover = Integer(in, t[4]);
    std::uint64_t useed = 0;
    const auto r = std::from_chars(t[5].data(), t[5].data() + t[5].size(), useed);
    if (r.ec != std::errc() || r.ptr != t[5].data() + t[5].size()) {
      Corrupt(in.line(), "bad seed");
    }
    model.config.seed = useed;
  }
  {
    const auto t = in.Expect("base_score");
    Arity(in, t, 2);
    model.base_score = Real(in, t[1]);
  }
  {
    const auto t = in.Expect("learning_rate");
    Arity(in, t, 2);
    model.learning_rate = Real(in, t[1]);
  }
  std::size_t num_features = 0;
  {
    const auto t = in.Expect("features");
    Arity(in, t, 2);
    num_features = static_cast<std::size_t>(Integer(in, t[1]));
  }
  for (std::size_t f = 0; f < num_features; ++f) {
    model.feature_names.emplace_back(in.ExpectRest("feature"));
  }
  std::size_t num_trees = 0;
  {
    const auto t = in.Expect("trees");
    Arity(in, t, 2);
    num_trees = static_cast<std::size_t>(Integer(in, t[1]));
  }
  for (std::size_t k = 0; k < num_trees; ++k) {
    const auto t = in.Expect("tree");
    Arity(in, t, 2);
    const auto count = Integer(in, t[1]);
    if (count < 1) Corrupt(in.line(), "tree without nodes");
    std::vector<TreeNode> nodes(static_cast<std::size_t>(count));
    for (auto& n : nodes) {
      if (in.Peek().starts_with("leaf")) {
        const auto f = in.Expect("leaf");
        Arity(in, f, 3);
        n.value = Real(in, f[1]);
        n.cover = Integer(in, f[2]);
      } else {
        const auto f = in.Expect("split");
        Arity(in, f, 6);
        n.feature = static_cast<std::int32_t>(Integer(in, f[1]));
        n.threshold = Real(in, f[2]);
        if (f[3] != "L" && f[3] != "R") Corrupt(in.line(), "bad missing direction");
        n.missing_goes = f[3] == "L" ? MissingGoes::kLeft : MissingGoes::kRight;
        n.value = Real(in, f[4]);
        n.cover = Integer(in, f[5]);
        if (n.feature < 0) Corrupt(in.line(), "negative feature index");
      }
    }
    // Rebuild child links from the preorder layout.
    std::size_t next = 0;
    std::function<void()> link = [&] {
      if (next >= nodes.size()) Corrupt(in.line(), "tree node count too small");
      const std::size_t index = next++;
      if (nodes[index].is_leaf()) return;
      nodes[index].left = static_cast<std::int32_t>(next);
      link();
      nodes[index].right = static_cast<std::int32_t>(next);
      link();
    };
    link();
    if (next != nodes.size()) Corrupt(in.line(), "tree has trailing nodes");
    RegressionTree tree(std::move(nodes));
    tree.Validate(num_features);
    model.trees.push_back(std::move(tree));
  }
  in.Expect("end");
  return model;
}

void SaveModel(const BoostedEnsemble& model, const std::filesystem::path& path) {
  data::WriteFile(path, SerializeModel(model));
}

BoostedEnsemble LoadModel(const std::filesystem::path& path) {
  return DeserializeModel(data::ReadFile(path));
}

}  // namespace ntlwb::gbdt
