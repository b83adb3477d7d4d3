// Copyright 2026 The pnas Authors. All Rights Reserved.
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

#include "pnas/io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pnas/error.h"

namespace pnas {

namespace {

// Converts a byte offset into 1-based line and column.
std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

const Json& field(const Json& j, const char* name, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(ctx + (ctx.empty() ? "" : ".") + name + ": missing field");
  return *it;
}

std::int64_t get_int(const Json& j, const char* name, const std::string& ctx) {
  const auto& v = field(j, name, ctx);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))
    return static_cast<std::int64_t>(v.get<double>());
  throw ParseError(ctx + (ctx.empty() ? "" : ".") + name + ": expected an integer");
}

std::int64_t get_int_or(const Json& j, const char* name, std::int64_t dflt, const std::string& ctx) {
  return j.contains(name) ? get_int(j, name, ctx) : dflt;
}

double get_number(const Json& j, const char* name, const std::string& ctx) {
  const auto& v = field(j, name, ctx);
  if (!v.is_number()) throw ParseError(ctx + (ctx.empty() ? "" : ".") + name + ": expected a number");
  return v.get<double>();
}

// Integral values are written as JSON integers so documents stay readable.
Json number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15)
    return static_cast<std::int64_t>(v);
  return v;
}

template <typename F>
auto with_context(const std::string& ctx, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ParseError(ctx + ": " + e.what());
  } catch (const Json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

}  // namespace

Json parse_json(std::string_view text, const std::string& origin) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // nlohmann prefixes its own "[json.exception.parse_error.101] parse error at line ..."
    auto colon = msg.find(": ", msg.find("parse error"));
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

Json to_json(const TensorShape& s) { return Json{{"c", s.c}, {"h", s.h}, {"w", s.w}}; }

Json to_json(const ConvLayerSpec& l) {
  return Json{{"kh", l.kh}, {"kw", l.kw}, {"m", l.m},
              {"sh", l.sh}, {"sw", l.sw}, {"padding", std::string(to_string(l.padding))}};
}

Json to_json(const NetworkArch& arch) {
  Json layers = Json::array();
  for (const auto& l : arch.layers) layers.push_back(to_json(l));
  return Json{{"input", to_json(arch.input)}, {"layers", std::move(layers)}};
}

Json to_json(const ParamDomain& d) {
  Json j;
  j["layer"] = is_layer_kind(d.id.kind) ? Json(d.id.layer) : Json(nullptr);
  j["kind"] = std::string(to_string(d.id.kind));
  j["lower"] = d.continuous() ? Json(d.lower) : number(d.lower);
  j["upper"] = d.continuous() ? Json(d.upper) : number(d.upper);
  if (!d.continuous() && d.step != 1) j["step"] = number(d.step);
  if (d.frozen) j["frozen"] = d.continuous() ? Json(*d.frozen) : number(*d.frozen);
  return j;
}

Json to_json(const SearchSpace& space) {
  Json j = to_json(space.seed);
  Json domains = Json::array();
  for (const auto& d : space.domains) domains.push_back(to_json(d));
  j["domains"] = std::move(domains);
  return j;
}

Json to_json(const SolverSettings& s) {
  Json j;
  j["optimizer"] = s.optimizer;
  j["lr"] = s.learning_rate;
  j["batch"] = s.batch_size;
  j["iterations"] = s.iterations;
  if (s.lr_decay) {
    j["decay"] = Json{{"factor", s.lr_decay->factor}, {"every", s.lr_decay->every}};
  } else {
    j["decay"] = nullptr;
  }
  return j;
}

Json to_json(const Assignment& a) {
  Json j = Json::object();
  for (const auto& [id, v] : a) j[to_string(id)] = id.kind == ParamKind::kLR ? Json(v) : number(v);
  return j;
}

TensorShape shape_from_json(const Json& j) {
  return {get_int(j, "c", "input"), get_int(j, "h", "input"), get_int(j, "w", "input")};
}

ConvLayerSpec layer_from_json(const Json& j) {
  ConvLayerSpec l;
  l.kh = get_int(j, "kh", "");
  l.kw = get_int(j, "kw", "");
  l.m = get_int(j, "m", "");
  l.sh = get_int_or(j, "sh", 1, "");
  l.sw = get_int_or(j, "sw", 1, "");
  if (j.contains("padding")) {
    if (!j["padding"].is_string()) throw ParseError("padding: expected a string");
    l.padding = parse_padding(j["padding"].get<std::string>());
  }
  return l;
}

NetworkArch arch_from_json(const Json& j) {
  NetworkArch arch;
  arch.input = shape_from_json(field(j, "input", ""));
  const auto& layers = field(j, "layers", "");
  if (!layers.is_array()) throw ParseError("layers: expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto ctx = "layers[" + std::to_string(i) + "]";
    arch.layers.push_back(with_context(ctx, [&] { return layer_from_json(layers[i]); }));
  }
  return arch;
}

SolverSettings solver_from_json(const Json& j) {
  SolverSettings s;
  if (!j.is_object()) throw ParseError("solver: expected an object");
  if (j.contains("optimizer")) {
    s.optimizer = j["optimizer"].get<std::string>();
    std::transform(s.optimizer.begin(), s.optimizer.end(), s.optimizer.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s.optimizer != "adam") throw ParseError("solver.optimizer: only 'adam' is supported");
  }
  if (j.contains("lr")) s.learning_rate = get_number(j, "lr", "solver");
  s.batch_size = get_int_or(j, "batch", s.batch_size, "solver");
  s.iterations = get_int_or(j, "iterations", s.iterations, "solver");
  if (j.contains("decay") && !j["decay"].is_null()) {
    const auto& d = j["decay"];
    s.lr_decay = LrDecay{get_number(d, "factor", "solver.decay"), get_int(d, "every", "solver.decay")};
  }
  with_context("solver", [&] { validate_solver(s); return 0; });
  return s;
}

Assignment assignment_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("assignment: expected an object");
  Assignment a;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ParseError("assignment." + k + ": expected a number");
    a[parse_param_id(k)] = v.get<double>();
  }
  return a;
}

SearchSpace space_from_json(const Json& j) {
  NetworkArch arch = arch_from_json(j);
  with_context("architecture", [&] { validate_arch(arch); return 0; });
  if (!j.contains("domains")) return derive_space(arch);
  SearchSpace space{arch, {}};
  const auto& domains = j["domains"];
  if (!domains.is_array()) throw ParseError("domains: expected an array");
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const auto ctx = "domains[" + std::to_string(i) + "]";
    const auto& d = domains[i];
    ParamDomain dom;
    const auto kind = with_context(ctx, [&] {
      return parse_param_kind(field(d, "kind", ctx).get<std::string>());
    });
    if (is_layer_kind(kind)) {
      dom.id = ParamId::of_layer(static_cast<int>(get_int(d, "layer", ctx)), kind);
    } else {
      dom.id = ParamId::of_solver(kind);
    }
    dom.lower = get_number(d, "lower", ctx);
    dom.upper = get_number(d, "upper", ctx);
    if (d.contains("step")) dom.step = get_number(d, "step", ctx);
    if (d.contains("frozen") && !d["frozen"].is_null()) dom.frozen = get_number(d, "frozen", ctx);
    space.domains.push_back(dom);
  }
  std::sort(space.domains.begin(), space.domains.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  with_context("domains", [&] { validate_space(space); return 0; });
  return space;
}

NetworkArch load_arch(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  return with_context(path.string(), [&] {
    auto arch = arch_from_json(j);
    validate_arch(arch);
    return arch;
  });
}

SearchSpace load_space(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  return with_context(path.string(), [&] { return space_from_json(j); });
}

std::string format_mflops(std::uint64_t ops) {
  const std::uint64_t hundredths = ops / 10000 + (ops % 10000 >= 5000 ? 1 : 0);
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

}  // namespace pnas
