// Copyright 2026 The rdonet Authors. All Rights Reserved.
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

#include "rdonet/arch_config.h"

#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rdonet/status.h"

namespace rdonet {
namespace {

[[noreturn]] void ConfigError(int line, const std::string& msg) {
  throw Error(ErrorCode::kConfig,
              "arch config line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void StructureError(const std::string& msg) {
  throw Error(ErrorCode::kStructure, "arch structure: " + msg);
}

std::vector<std::string> SplitWords(std::string_view line) {
  std::vector<std::string> words;
  std::istringstream in{std::string(line)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

using Vars = std::unordered_map<std::string, long>;

long EvalTerm(std::string_view term, const Vars& vars, int line) {
  // factor ((*|/) factor)*
  long value = 0;
  char op = '*';
  bool first = true;
  size_t i = 0;
  while (i <= term.size()) {
    size_t j = term.find_first_of("*/", i);
    if (j == std::string_view::npos) j = term.size();
    std::string_view tok = term.substr(i, j - i);
    if (tok.empty()) ConfigError(line, "malformed expression");
    long f = 0;
    if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
      for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
          ConfigError(line, "bad number '" + std::string(tok) + "'");
        }
        f = f * 10 + (ch - '0');
      }
    } else {
      auto it = vars.find(std::string(tok));
      if (it == vars.end()) {
        ConfigError(line, "unknown variable '" + std::string(tok) + "'");
      }
      f = it->second;
    }
    if (first) {
      value = f;
      first = false;
    } else if (op == '*') {
      value *= f;
    } else {
      if (f == 0 || value % f != 0) {
        ConfigError(line, "inexact division in expression");
      }
      value /= f;
    }
    if (j == term.size()) break;
    op = term[j];
    i = j + 1;
  }
  return value;
}

long EvalExpr(std::string_view expr, const Vars& vars, int line) {
  long total = 0;
  char sign = '+';
  size_t i = 0;
  while (i <= expr.size()) {
    size_t j = expr.find_first_of("+-", i);
    if (j == std::string_view::npos) j = expr.size();
    long t = EvalTerm(expr.substr(i, j - i), vars, line);
    total += sign == '+' ? t : -t;
    if (j == expr.size()) break;
    sign = expr[j];
    i = j + 1;
  }
  return total;
}

struct Item {
  bool is_use = false;
  std::string use_target;
  LayerSpec layer;
};

struct RawNet {
  int in = 0;
  int line = 0;
  std::vector<Item> items;
};

LayerSpec ParseLayer(const std::vector<std::string>& words, const Vars& vars,
                     int line) {
  LayerSpec spec;
  spec.line = line;
  const std::string& kw = words[0];
  size_t first_kv = 2;
  if (kw == "act") {
    spec.kind = LayerKind::kActivation;
    if (words.size() != 2) ConfigError(line, "act takes one argument");
    if (words[1] == "relu") {
      spec.activation = Activation::kRelu;
    } else if (words[1] == "lrelu") {
      spec.activation = Activation::kLeakyRelu;
    } else if (words[1] == "sigmoid") {
      spec.activation = Activation::kSigmoid;
    } else {
      ConfigError(line, "unknown activation '" + words[1] + "'");
    }
    return spec;
  }
  if (kw == "conv") {
    spec.kind = LayerKind::kConv;
  } else if (kw == "subpel") {
    spec.kind = LayerKind::kSubpel;
  } else if (kw == "resblock") {
    spec.kind = LayerKind::kResidual;
  } else if (kw == "attention") {
    spec.kind = LayerKind::kAttention;
  } else if (kw == "concat_conv") {
    spec.kind = LayerKind::kConcatConv;
  } else {
    ConfigError(line, "unknown layer kind '" + kw + "'");
  }
  if (words.size() < 2) ConfigError(line, kw + " needs a name");
  spec.name = words[1];

  std::set<std::string> seen;
  for (size_t i = first_kv; i < words.size(); ++i) {
    auto eq = words[i].find('=');
    if (eq == std::string::npos) {
      ConfigError(line, "expected key=value, got '" + words[i] + "'");
    }
    std::string key = words[i].substr(0, eq);
    long v = EvalExpr(std::string_view(words[i]).substr(eq + 1), vars, line);
    if (!seen.insert(key).second) ConfigError(line, "duplicate key " + key);
    int iv = static_cast<int>(v);
    if (key == "in") {
      spec.in = iv;
    } else if (key == "in2") {
      spec.in2 = iv;
    } else if (key == "out") {
      spec.out = iv;
    } else if (key == "ch") {
      spec.in = spec.out = iv;
    } else if (key == "k") {
      spec.kernel = iv;
    } else if (key == "stride") {
      spec.stride = iv;
    } else if (key == "r" || key == "up") {
      spec.up = iv;
    } else if (key == "skip_k") {
      spec.skip_kernel = iv;
    } else if (key == "masked") {
      spec.masked = iv != 0;
    } else {
      ConfigError(line, "unknown key '" + key + "' for " + kw);
    }
  }
  if (spec.in <= 0 || spec.out <= 0) {
    ConfigError(line, spec.name + ": channel counts must be positive");
  }
  if (spec.kernel <= 0 || spec.stride <= 0 || spec.up <= 0 ||
      spec.skip_kernel <= 0) {
    ConfigError(line, spec.name + ": kernel, stride and factors must be positive");
  }
  if (spec.kind == LayerKind::kConcatConv && spec.in2 <= 0) {
    ConfigError(line, spec.name + ": concat_conv needs in2");
  }
  if (spec.masked && (spec.kind != LayerKind::kConv || spec.kernel % 2 == 0 ||
                      spec.stride != 1)) {
    ConfigError(line, spec.name + ": masking needs a stride-1 odd-kernel conv");
  }
  if (spec.kind == LayerKind::kResidual && spec.stride > 1 && spec.up > 1) {
    ConfigError(line, spec.name + ": residual block cannot both stride and upsample");
  }
  if (spec.kind == LayerKind::kAttention && spec.in % 2 != 0) {
    ConfigError(line, spec.name + ": attention channels must be even");
  }
  return spec;
}

void FinalizeNet(NetSpec& net) {
  int ch = net.in;
  for (const LayerSpec& l : net.layers) {
    if (l.kind != LayerKind::kActivation && l.in != ch) {
      ConfigError(l.line, net.name + "/" + l.name + ": expects " +
                              std::to_string(l.in) + " input channels, gets " +
                              std::to_string(ch));
    }
    if (l.kind == LayerKind::kConcatConv) {
      if (net.secondary != 0 && net.secondary != l.in2) {
        ConfigError(l.line, net.name + ": inconsistent secondary channels");
      }
      net.secondary = l.in2;
    }
    ch = l.OutChannels(ch);
    net.downsampling *= l.kind == LayerKind::kActivation ? 1 : l.stride;
    if (l.kind == LayerKind::kSubpel || l.kind == LayerKind::kResidual) {
      net.upsampling *= l.up;
    }
  }
  net.out = ch;
}

void Require(const ArchConfig& cfg, const std::string& name) {
  if (!cfg.has(name)) StructureError("missing network '" + name + "'");
}

void CheckFactor(const NetSpec& net, int down, int up) {
  if (net.downsampling != down || net.upsampling != up) {
    StructureError(net.name + " must " +
                   (down > 1 ? "downsample by " + std::to_string(down)
                             : "upsample by " + std::to_string(up)) +
                   ", got downsampling " + std::to_string(net.downsampling) +
                   " and upsampling " + std::to_string(net.upsampling));
  }
}

void CheckSingleMaskedConv(const NetSpec& net, int in) {
  if (net.layers.size() != 1 || net.layers[0].kind != LayerKind::kConv ||
      !net.layers[0].masked) {
    StructureError(net.name + " must be a single masked conv");
  }
  if (net.in != in) {
    StructureError(net.name + " input channels " + std::to_string(net.in) +
                   " != " + std::to_string(in));
  }
}

void CheckHead(const NetSpec& net, int in, int out) {
  for (const LayerSpec& l : net.layers) {
    if (l.kind == LayerKind::kActivation) continue;
    if (l.kind != LayerKind::kConv || l.kernel != 1 || l.stride != 1) {
      StructureError(net.name + ": parameter heads hold 1x1 convs only");
    }
  }
  if (net.in != in || net.out != out) {
    StructureError(net.name + " must map " + std::to_string(in) + " -> " +
                   std::to_string(out) + " channels");
  }
}

void CheckLatentUnit(const ArchConfig& cfg, const std::string& p, int latent,
                     bool conditional) {
  for (const char* part : {"ha", "hs", "hctx", "hhead", "ctx", "head"}) {
    Require(cfg, p + "." + part);
  }
  const NetSpec& ha = cfg.net(p + ".ha");
  const NetSpec& hs = cfg.net(p + ".hs");
  CheckFactor(ha, 8, 1);
  CheckFactor(hs, 1, 8);
  if (ha.in != latent) StructureError(ha.name + " input must be the latent");
  if (hs.in != ha.out) StructureError(hs.name + " input must be the hyper-latent");
  int cond = conditional ? latent : 0;
  if (ha.secondary != cond || hs.secondary != cond) {
    StructureError(p + (conditional ? " hyperprior must be conditioned on the "
                                      "upsampled coarse latent"
                                    : " hyperprior must be unconditional"));
  }
  CheckSingleMaskedConv(cfg.net(p + ".hctx"), ha.out);
  CheckHead(cfg.net(p + ".hhead"), cfg.net(p + ".hctx").out, 9 * ha.out);
  CheckSingleMaskedConv(cfg.net(p + ".ctx"), latent);
  CheckHead(cfg.net(p + ".head"), cfg.net(p + ".ctx").out + hs.out,
            9 * latent);
}

void CheckFusion(const NetSpec& net, int latent) {
  if (net.layers.size() != 1 ||
      net.layers[0].kind != LayerKind::kConcatConv || net.in != latent ||
      net.secondary != latent || net.out != latent) {
    StructureError(net.name + " must be a single concat_conv C+C -> C");
  }
}

void Validate(const ArchConfig& cfg) {
  Require(cfg, "fa");
  Require(cfg, "fs");
  const NetSpec& fa = cfg.net("fa");
  const NetSpec& fs = cfg.net("fs");
  if (fa.in != 3) StructureError("fa must take 3 input channels");
  CheckFactor(fa, 16, 1);
  const int latent = fa.out;
  if (fs.in != latent || fs.out != 3) {
    StructureError("fs must map the latent back to 3 channels");
  }
  CheckFactor(fs, 1, 16);
  bool rdo = cfg.model == ModelKind::kRdoNet;
  CheckLatentUnit(cfg, "ls1", latent, rdo);
  if (!rdo) return;
  CheckLatentUnit(cfg, "ls2", latent, false);
  Require(cfg, "ls2.down");
  Require(cfg, "ls2.up");
  Require(cfg, "ls1.fuse");
  Require(cfg, "ls1.combine");
  const NetSpec& down = cfg.net("ls2.down");
  const NetSpec& up = cfg.net("ls2.up");
  CheckFactor(down, 2, 1);
  CheckFactor(up, 1, 2);
  if (down.in != latent || down.out != latent || up.in != latent ||
      up.out != latent) {
    StructureError("ls2.down/ls2.up must keep the latent channel count");
  }
  CheckFusion(cfg.net("ls1.fuse"), latent);
  CheckFusion(cfg.net("ls1.combine"), latent);
}

}  // namespace

size_t ParamSpec::count() const {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

int LayerSpec::OutChannels(int in_channels) const {
  return kind == LayerKind::kActivation ? in_channels : out;
}

std::vector<ParamSpec> LayerSpec::Params() const {
  auto conv = [](const std::string& n, int out, int in, int k) {
    return std::vector<ParamSpec>{{n + ".w", {out, in, k, k}}, {n + ".b", {out}}};
  };
  std::vector<ParamSpec> params;
  auto add = [&](std::vector<ParamSpec> p) {
    params.insert(params.end(), p.begin(), p.end());
  };
  const int r2 = up * up;
  switch (kind) {
    case LayerKind::kActivation:
      break;
    case LayerKind::kConv:
      add(conv(name, out, in, kernel));
      break;
    case LayerKind::kSubpel:
      add(conv(name, out * r2, in, kernel));
      break;
    case LayerKind::kConcatConv:
      add(conv(name, out, in + in2, kernel));
      break;
    case LayerKind::kResidual:
      if (up > 1) {
        add(conv(name + ".c1", out * r2, in, 3));
        add(conv(name + ".c2", out, out, 3));
        add(conv(name + ".skip", out * r2, in, skip_kernel));
      } else {
        add(conv(name + ".c1", out, in, 3));
        add(conv(name + ".c2", out, out, 3));
        if (in != out || stride != 1) {
          add(conv(name + ".skip", out, in, skip_kernel));
        }
      }
      break;
    case LayerKind::kAttention: {
      const int half = in / 2;
      for (const char* branch : {"a", "b"}) {
        for (int u = 0; u < 3; ++u) {
          std::string unit = name + "." + branch + std::to_string(u);
          add(conv(unit + ".c1", half, in, 1));
          add(conv(unit + ".c2", half, half, 3));
          add(conv(unit + ".c3", in, half, 1));
        }
      }
      add(conv(name + ".gate", in, in, 1));
      break;
    }
  }
  return params;
}

const NetSpec& ArchConfig::net(const std::string& name) const {
  auto it = nets.find(name);
  if (it == nets.end()) {
    throw Error(ErrorCode::kConfig, "no network named '" + name + "'");
  }
  return it->second;
}

std::vector<ParamSpec> ArchConfig::Params() const {
  std::vector<ParamSpec> out;
  std::map<std::string, std::vector<int>> seen;
  for (const auto& [_, net] : nets) {
    for (const LayerSpec& l : net.layers) {
      for (ParamSpec& p : l.Params()) {
        auto [it, inserted] = seen.emplace(p.name, p.shape);
        if (!inserted) {
          if (it->second != p.shape) {
            ConfigError(l.line, "tensor " + p.name +
                                    " declared with conflicting shapes");
          }
          continue;
        }
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

ArchConfig ParseArch(std::string_view text) {
  ArchConfig cfg;
  Vars vars;
  std::map<std::string, RawNet> raw;
  std::vector<std::string> order;
  RawNet* current = nullptr;
  std::string current_name;
  bool have_model = false;

  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    auto words = SplitWords(line);
    if (words.empty()) continue;
    const std::string& kw = words[0];
    if (kw == "model") {
      if (words.size() != 2) ConfigError(lineno, "model takes one argument");
      if (words[1] == "rdonet") {
        cfg.model = ModelKind::kRdoNet;
      } else if (words[1] == "baseline") {
        cfg.model = ModelKind::kBaseline;
      } else {
        ConfigError(lineno, "unknown model '" + words[1] + "'");
      }
      have_model = true;
    } else if (kw == "set") {
      if (words.size() != 3) ConfigError(lineno, "set NAME EXPR");
      vars[words[1]] = EvalExpr(words[2], vars, lineno);
    } else if (kw == "net") {
      if (current) ConfigError(lineno, "nested net");
      if (words.size() != 3 || words[2].rfind("in=", 0) != 0) {
        ConfigError(lineno, "net NAME in=EXPR");
      }
      current_name = words[1];
      if (raw.count(current_name)) {
        ConfigError(lineno, "duplicate net '" + current_name + "'");
      }
      current = &raw[current_name];
      current->line = lineno;
      current->in = static_cast<int>(
          EvalExpr(std::string_view(words[2]).substr(3), vars, lineno));
      order.push_back(current_name);
    } else if (kw == "end") {
      if (!current) ConfigError(lineno, "end without net");
      current = nullptr;
    } else {
      if (!current) ConfigError(lineno, "layer outside of a net");
      Item item;
      if (kw == "use") {
        if (words.size() != 2) ConfigError(lineno, "use NET");
        item.is_use = true;
        item.use_target = words[1];
      } else {
        item.layer = ParseLayer(words, vars, lineno);
      }
      current->items.push_back(std::move(item));
    }
  }
  if (current) ConfigError(lineno, "unterminated net '" + current_name + "'");
  if (!have_model) ConfigError(lineno, "missing model statement");

  // Expand `use` references depth-first; a back edge is a cycle.
  std::map<std::string, int> state;  // 1 = visiting, 2 = done
  std::map<std::string, std::vector<LayerSpec>> expanded;
  std::vector<std::string> stack;
  std::function<const std::vector<LayerSpec>&(const std::string&)> expand =
      [&](const std::string& name) -> const std::vector<LayerSpec>& {
    auto it = raw.find(name);
    if (it == raw.end()) {
      throw Error(ErrorCode::kConfig, "use of undefined net '" + name + "'");
    }
    if (state[name] == 1) {
      std::string cycle;
      for (const auto& s : stack) cycle += s + " -> ";
      StructureError("cyclic net reference: " + cycle + name);
    }
    if (state[name] == 2) return expanded[name];
    state[name] = 1;
    stack.push_back(name);
    std::vector<LayerSpec> layers;
    for (const Item& item : it->second.items) {
      if (item.is_use) {
        const auto& sub = expand(item.use_target);
        layers.insert(layers.end(), sub.begin(), sub.end());
      } else {
        layers.push_back(item.layer);
      }
    }
    stack.pop_back();
    state[name] = 2;
    return expanded[name] = std::move(layers);
  };

  for (const std::string& name : order) {
    NetSpec net;
    net.name = name;
    net.in = raw[name].in;
    net.layers = expand(name);
    if (net.layers.empty()) ConfigError(raw[name].line, "empty net " + name);
    FinalizeNet(net);
    cfg.nets.emplace(name, std::move(net));
  }
  Validate(cfg);
  cfg.Params();  // rejects conflicting tensor declarations
  return cfg;
}

ArchConfig LoadArchFile(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) {
    throw Error(ErrorCode::kIo, "cannot open arch config " + path.string());
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return ParseArch(ss.str());
}

}  // namespace rdonet
