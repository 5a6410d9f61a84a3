// Copyright 2026 The HPL Authors
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

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "hpl/errors.hpp"
#include "hpl/format.hpp"
#include "hpl/trainer.hpp"

namespace hpl {

namespace {

using Kind = CheckpointError::Kind;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(b)])) << (8 * b);
  }
  return v;
}

std::string rng_text(const Rng& r) {
  return std::to_string(r.seed()) + "," + std::to_string(r.counter());
}

struct Tensor {
  std::string name;
  std::span<const double> values;
};

class Metadata {
 public:
  explicit Metadata(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  const std::string& str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw CheckpointError(Kind::kCorrupt, "checkpoint: missing metadata key '" + key + "'");
    return it->second;
  }
  std::uint64_t u64(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(key);
    return v;
  }
  std::int64_t i64(const std::string& key) const {
    const std::string& s = str(key);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(key);
    return v;
  }
  double f64(const std::string& key) const {
    try {
      return parse_double(str(key), key);
    } catch (const ContractError&) {
      bad(key);
    }
  }
  std::vector<std::size_t> sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    try {
      for (long long v : parse_int_list(str(key), key)) {
        if (v < 0) bad(key);
        out.push_back(static_cast<std::size_t>(v));
      }
    } catch (const ContractError&) {
      bad(key);
    }
    return out;
  }
  std::vector<double> doubles(const std::string& key) const {
    try {
      return parse_double_list(str(key), key);
    } catch (const ContractError&) {
      bad(key);
    }
  }
  Rng rng(const std::string& key) const {
    const std::string& s = str(key);
    const auto comma = s.find(',');
    if (comma == std::string::npos) bad(key);
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
    const char* end = s.data() + s.size();
    auto r1 = std::from_chars(s.data(), s.data() + comma, seed);
    auto r2 = std::from_chars(s.data() + comma + 1, end, counter);
    if (r1.ec != std::errc() || r1.ptr != s.data() + comma || r2.ec != std::errc() || r2.ptr != end) bad(key);
    return Rng(seed, counter);
  }

  [[noreturn]] static void bad(const std::string& key) {
    throw CheckpointError(Kind::kCorrupt, "checkpoint: malformed metadata value for '" + key + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("format_version", std::string(1, Checkpoint::kFormatVersion));
  for (auto& [k, v] : c.config.to_key_values()) meta.emplace_back("config." + k, v);
  meta.emplace_back("epoch", std::to_string(c.epoch));
  meta.emplace_back("iteration", std::to_string(c.iteration));
  meta.emplace_back("post_warmup_iteration", std::to_string(c.post_warmup_iteration));
  meta.emplace_back("pyramid.built", c.pyramid_built ? "1" : "0");
  meta.emplace_back("pyramid.gt_mode", c.pyramid.gt_mode() ? "1" : "0");
  meta.emplace_back("pyramid.normalize", c.pyramid.normalize_before_clustering() ? "1" : "0");
  meta.emplace_back("pyramid.num_levels", std::to_string(c.pyramid.num_levels()));
  meta.emplace_back("pyramid.dim", std::to_string(c.pyramid.dim()));
  std::vector<std::size_t> level_sizes;
  for (std::size_t l = 0; l < c.pyramid.num_levels(); ++l) level_sizes.push_back(c.pyramid.level_size(l));
  meta.emplace_back("pyramid.level_sizes", join<std::size_t>(level_sizes));
  meta.emplace_back("pyramid.weights", join<double>(c.pyramid.weights()));
  for (std::size_t l = 0; l < c.pyramid.assignments().size(); ++l) {
    meta.emplace_back("pyramid.assignment." + std::to_string(l), join<int>(c.pyramid.assignment(l)));
  }
  meta.emplace_back("network.dims", join<std::size_t>(c.network.dims()));
  for (const auto& [name, st] : {std::pair<std::string, const AdamState*>{"adam.net", &c.net_opt},
                                 std::pair<std::string, const AdamState*>{"adam.proxy", &c.proxy_opt}}) {
    meta.emplace_back(name + ".lr", format_double(st->lr));
    meta.emplace_back(name + ".beta1", format_double(st->beta1));
    meta.emplace_back(name + ".beta2", format_double(st->beta2));
    meta.emplace_back(name + ".eps", format_double(st->eps));
    meta.emplace_back(name + ".t", std::to_string(st->t));
  }
  meta.emplace_back("sampler.rng", rng_text(c.sampler_rng));
  meta.emplace_back("sampler.cursor", std::to_string(c.sampler_cursor));
  meta.emplace_back("sampler.order", join<std::size_t>(c.sampler_order));
  meta.emplace_back("cluster.rng", rng_text(c.cluster_rng));

  std::vector<Tensor> tensors;
  tensors.push_back({"network", c.network.parameters()});
  for (std::size_t l = 0; l < c.pyramid.num_levels(); ++l) {
    tensors.push_back({"proxies." + std::to_string(l), c.pyramid.level(l).data()});
  }
  tensors.push_back({"adam.net.m", c.net_opt.m});
  tensors.push_back({"adam.net.v", c.net_opt.v});
  tensors.push_back({"adam.proxy.m", c.proxy_opt.m});
  tensors.push_back({"adam.proxy.v", c.proxy_opt.v});
  std::string order;
  for (const Tensor& t : tensors) {
    if (!order.empty()) order += ',';
    order += t.name;
    meta.emplace_back("tensor." + t.name, std::to_string(t.values.size()));
  }
  meta.emplace_back("tensors", order);

  std::string text;
  for (const auto& [k, v] : meta) text += k + "=" + v + "\n";

  std::string blob(Checkpoint::kMagic, 3);
  blob.push_back(Checkpoint::kFormatVersion);
  put_u64(blob, text.size());
  blob += text;
  for (const Tensor& t : tensors) {
    for (double v : t.values) put_u64(blob, std::bit_cast<std::uint64_t>(v));
  }
  put_u64(blob, fnv1a(blob));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw CheckpointError(Kind::kIo, "checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string_view view(blob);
  if (view.size() < 4 || view.substr(0, 3) != std::string_view(Checkpoint::kMagic, 3)) {
    throw CheckpointError(Kind::kCorrupt, "checkpoint: bad magic (not an HPL checkpoint or truncated)");
  }
  if (view[3] != Checkpoint::kFormatVersion) {
    throw CheckpointError(Kind::kVersion, std::string("checkpoint: unsupported format version '") + view[3] +
                                              "', expected '" + Checkpoint::kFormatVersion + "'");
  }
  if (view.size() < 4 + 8 + 8) throw CheckpointError(Kind::kCorrupt, "checkpoint: truncated header");
  const std::size_t body_end = view.size() - 8;
  if (get_u64(view, body_end) != fnv1a(view.substr(0, body_end))) {
    throw CheckpointError(Kind::kCorrupt, "checkpoint: checksum mismatch (truncated or corrupted file)");
  }
  const std::uint64_t meta_len = get_u64(view, 4);
  if (meta_len > body_end - 12) throw CheckpointError(Kind::kCorrupt, "checkpoint: metadata length out of range");
  const std::string_view text = view.substr(12, meta_len);

  std::map<std::string, std::string> kv;
  std::map<std::string, std::string> config_kv;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw CheckpointError(Kind::kCorrupt, "checkpoint: malformed metadata line");
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    if (key.rfind("config.", 0) == 0) config_kv[key.substr(7)] = value;
    kv[std::move(key)] = std::move(value);
  }
  const Metadata meta(std::move(kv));
  if (meta.str("format_version") != std::string(1, Checkpoint::kFormatVersion)) {
    throw CheckpointError(Kind::kVersion, "checkpoint: metadata version mismatch");
  }

  // Tensors, in declared order.
  std::map<std::string, std::vector<double>> tensors;
  std::size_t pos = 12 + meta_len;
  {
    std::string_view names = meta.str("tensors");
    std::size_t s = 0;
    while (s <= names.size()) {
      std::size_t comma = names.find(',', s);
      if (comma == std::string_view::npos) comma = names.size();
      const std::string name(names.substr(s, comma - s));
      s = comma + 1;
      const std::uint64_t count = meta.u64("tensor." + name);
      if (count > (body_end - pos) / 8) throw CheckpointError(Kind::kCorrupt, "checkpoint: tensor data truncated");
      std::vector<double> values(count);
      for (std::uint64_t i = 0; i < count; ++i, pos += 8) values[i] = std::bit_cast<double>(get_u64(view, pos));
      tensors[name] = std::move(values);
    }
  }
  if (pos != body_end) throw CheckpointError(Kind::kCorrupt, "checkpoint: trailing bytes after tensors");
  auto tensor = [&](const std::string& name) -> std::vector<double>& {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError(Kind::kCorrupt, "checkpoint: missing tensor '" + name + "'");
    return it->second;
  };

  try {
    Checkpoint c;
    c.config = parse_config(config_kv);
    c.epoch = static_cast<int>(meta.i64("epoch"));
    c.iteration = meta.i64("iteration");
    c.post_warmup_iteration = meta.i64("post_warmup_iteration");
    c.pyramid_built = meta.str("pyramid.built") == "1";

    Mlp net(meta.sizes("network.dims"));
    std::vector<double>& params = tensor("network");
    if (params.size() != net.parameters().size()) Metadata::bad("network.dims");
    std::copy(params.begin(), params.end(), net.mutable_parameters().begin());
    c.network = std::move(net);

    const auto level_sizes = meta.sizes("pyramid.level_sizes");
    const std::size_t dim = meta.u64("pyramid.dim");
    std::vector<Matrix> levels;
    std::vector<std::vector<int>> assignments;
    for (std::size_t l = 0; l < level_sizes.size(); ++l) {
      std::vector<double>& data = tensor("proxies." + std::to_string(l));
      if (data.size() != level_sizes[l] * dim) Metadata::bad("pyramid.level_sizes");
      levels.emplace_back(level_sizes[l], dim, std::move(data));
      if (l + 1 < level_sizes.size()) {
        std::vector<int> q;
        for (std::size_t v : meta.sizes("pyramid.assignment." + std::to_string(l))) q.push_back(static_cast<int>(v));
        assignments.push_back(std::move(q));
      }
    }
    c.pyramid = ProxyPyramid(std::move(levels), std::move(assignments), meta.doubles("pyramid.weights"),
                             meta.str("pyramid.gt_mode") == "1");
    c.pyramid.set_normalize_before_clustering(meta.str("pyramid.normalize") == "1");

    for (auto [name, st] : {std::pair<std::string, AdamState*>{"adam.net", &c.net_opt},
                            std::pair<std::string, AdamState*>{"adam.proxy", &c.proxy_opt}}) {
      st->lr = meta.f64(name + ".lr");
      st->beta1 = meta.f64(name + ".beta1");
      st->beta2 = meta.f64(name + ".beta2");
      st->eps = meta.f64(name + ".eps");
      st->t = meta.u64(name + ".t");
      st->m = std::move(tensor(name + ".m"));
      st->v = std::move(tensor(name + ".v"));
    }
    c.sampler_rng = meta.rng("sampler.rng");
    c.sampler_cursor = meta.u64("sampler.cursor");
    c.sampler_order = meta.sizes("sampler.order");
    c.cluster_rng = meta.rng("cluster.rng");
    return c;
  } catch (const ContractError& e) {
    throw CheckpointError(Kind::kCorrupt, std::string("checkpoint: inconsistent state: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::kIo, "checkpoint: cannot open '" + path + "' for writing");
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::kIo, "checkpoint: cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace hpl
