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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pnas/archspec.h"
#include "pnas/solver.h"

namespace pnas {

using Json = nlohmann::ordered_json;

// Parses `text`; syntax errors become ParseError carrying "origin:line:col".
Json parse_json(std::string_view text, const std::string& origin);
Json read_json_file(const std::filesystem::path& path);

Json to_json(const TensorShape& s);
Json to_json(const ConvLayerSpec& l);
Json to_json(const NetworkArch& arch);
Json to_json(const ParamDomain& d);
Json to_json(const SearchSpace& space);  // input, layers, domains
Json to_json(const SolverSettings& s);
Json to_json(const Assignment& a);       // {"0:kh": 3, ..., "lr": 0.001}

// The *_from_json readers throw ParseError with a JSON-pointer-like context
// ("layers[2].kh: ...") on missing or mistyped fields.
TensorShape shape_from_json(const Json& j);
ConvLayerSpec layer_from_json(const Json& j);
NetworkArch arch_from_json(const Json& j);
SolverSettings solver_from_json(const Json& j);
Assignment assignment_from_json(const Json& j);

// Reads an architecture/space document. When `domains` is absent the space
// is derived from the architecture with the default bounds policy.
SearchSpace space_from_json(const Json& j);

NetworkArch load_arch(const std::filesystem::path& path);
SearchSpace load_space(const std::filesystem::path& path);

// Integer ops rendered as ops / 1e6 with exactly two decimals, rounded half up.
std::string format_mflops(std::uint64_t ops);

}  // namespace pnas
