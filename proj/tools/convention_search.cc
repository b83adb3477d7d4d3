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

// Brute-force search over the unpublished layout details of the published
// models: padding, the strides of the first two units and the input
// orientation. Each convention is scored by the mean absolute log ratio of
// computed to published MFLOPs over the seed and kws1-kws12.
//
// Usage: convention_search <published_models.json> [report.txt]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pnas/costmodel.h"
#include "pnas/error.h"
#include "pnas/io.h"

namespace {

struct Convention {
  pnas::Padding padding = pnas::Padding::kSame;
  std::int64_t s1h = 1, s1w = 1, s2h = 1, s2w = 1;
  bool transposed = false;  // 32x40 instead of 40x32
};

struct Scored {
  Convention conv;
  std::vector<double> mflops;
  double log_error = 0;
  double spearman = 0;
};

std::string describe(const Convention& c) {
  std::ostringstream s;
  s << "padding=" << pnas::to_string(c.padding) << " unit1_stride=" << c.s1h << "x" << c.s1w
    << " unit2_stride=" << c.s2h << "x" << c.s2w << " input=" << (c.transposed ? "32x40" : "40x32");
  return s.str();
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = static_cast<double>(i + j) / 2 + 1;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0;
}

std::optional<double> mflops_under(pnas::NetworkArch arch, const Convention& c) {
  if (c.transposed) std::swap(arch.input.h, arch.input.w);
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    auto& l = arch.layers[i];
    l.padding = c.padding;
    l.sh = l.sw = 1;
    if (i == 0) l.sh = c.s1h, l.sw = c.s1w;
    if (i == 1) l.sh = c.s2h, l.sw = c.s2w;
  }
  try {
    pnas::validate_arch(arch);
    return static_cast<double>(pnas::network_cost(arch).total_ops) / 1e6;
  } catch (const pnas::Error&) {
    return std::nullopt;  // a Valid kernel no longer fits
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: convention_search <published_models.json> [report.txt]\n";
    return 2;
  }
  try {
    const auto doc = pnas::read_json_file(argv[1]);
    std::vector<std::string> names;
    std::vector<pnas::NetworkArch> archs;
    std::vector<double> published;
    for (const auto& m : doc.at("models")) {
      names.push_back(m.at("name").get<std::string>());
      archs.push_back(pnas::arch_from_json(m.at("arch")));
      published.push_back(m.at("mflops").get<double>());
    }

    std::vector<Scored> results;
    std::size_t tried = 0;
    for (auto padding : {pnas::Padding::kSame, pnas::Padding::kValid})
      for (std::int64_t s1h = 1; s1h <= 4; ++s1h)
        for (std::int64_t s1w = 1; s1w <= 4; ++s1w)
          for (std::int64_t s2h = 1; s2h <= 4; ++s2h)
            for (std::int64_t s2w = 1; s2w <= 4; ++s2w)
              for (bool transposed : {false, true}) {
                ++tried;
                Scored s{{padding, s1h, s1w, s2h, s2w, transposed}, {}, 0, 0};
                bool ok = true;
                for (const auto& a : archs) {
                  const auto v = mflops_under(a, s.conv);
                  if (!v) {
                    ok = false;
                    break;
                  }
                  s.mflops.push_back(*v);
                }
                if (!ok) continue;
                for (std::size_t i = 0; i < archs.size(); ++i)
                  s.log_error += std::abs(std::log(s.mflops[i] / published[i]));
                s.log_error /= static_cast<double>(archs.size());
                s.spearman = spearman(s.mflops, published);
                results.push_back(std::move(s));
              }
    if (results.empty()) throw pnas::Error("no convention fits every model");
    std::stable_sort(results.begin(), results.end(), [](const Scored& a, const Scored& b) {
      return a.log_error < b.log_error;
    });

    std::ostringstream out;
    char buf[200];
    out << "conventions tried " << tried << ", feasible " << results.size() << "\n\n";
    out << "best: " << describe(results[0].conv) << "\n";
    std::snprintf(buf, sizeof buf, "mean |log ratio| %.4f, spearman %.4f\n\n", results[0].log_error,
                  results[0].spearman);
    out << buf;
    std::snprintf(buf, sizeof buf, "%-6s %12s %12s %10s\n", "model", "published", "computed", "ratio");
    out << buf;
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%-6s %12.2f %12.2f %10.3f\n", names[i].c_str(), published[i],
                    results[0].mflops[i], results[0].mflops[i] / published[i]);
      out << buf;
    }
    out << "\nrunners-up:\n";
    for (std::size_t i = 1; i < std::min<std::size_t>(results.size(), 11); ++i) {
      std::snprintf(buf, sizeof buf, "  %.4f  rho %.4f  ", results[i].log_error, results[i].spearman);
      out << buf << describe(results[i].conv) << "\n";
    }

    std::cout << out.str();
    if (argc == 3) {
      std::ofstream f(argv[2]);
      if (!(f << out.str())) throw pnas::Error(std::string(argv[2]) + ": cannot write");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
