// Copyright 2026 The scgossip Authors. All Rights Reserved.
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
// =============================================================================

#include "scg/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "scg/errors.hpp"
#include "scg/random.hpp"

namespace scg {

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), adjacency_(n) {
  if (n == 0) throw InvalidArgument("graph must have at least one node");
  for (auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw InvalidArgument("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") out of range for n = " + std::to_string(n));
    }
    if (i == j) throw InvalidArgument("self-loop at node " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

const std::vector<std::size_t>& Graph::neighbors(std::size_t i) const {
  if (i >= n_) {
    throw InvalidArgument("node " + std::to_string(i) + " out of range for n = " +
                          std::to_string(n_));
  }
  return adjacency_[i];
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  const auto& list = neighbors(i);
  return std::binary_search(list.begin(), list.end(), j);
}

Graph build_path(std::size_t n) {
  if (n < 2) throw InvalidArgument("path graph needs n >= 2");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, std::move(edges));
}

Graph build_ring(std::size_t n) {
  if (n < 3) throw InvalidArgument("ring graph needs n >= 3");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  edges.emplace_back(n - 1, 0);
  return Graph(n, std::move(edges));
}

Graph build_complete(std::size_t n) {
  if (n < 2) throw InvalidArgument("complete graph needs n >= 2");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

Graph build_random_connected(std::size_t n, std::size_t extra_edges, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("random graph needs n >= 2");
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(order[i], order[rng.below(i)]);
  const std::size_t max_edges = n * (n - 1) / 2;
  std::set<Edge> present;
  for (auto [a, b] : edges) present.insert({std::min(a, b), std::max(a, b)});
  for (std::size_t added = 0; added < extra_edges && present.size() < max_edges;) {
    std::size_t a = rng.below(n), b = rng.below(n);
    if (a == b) continue;
    if (present.insert({std::min(a, b), std::max(a, b)}).second) {
      edges.emplace_back(a, b);
      ++added;
    }
  }
  return Graph(n, std::move(edges));
}

bool is_connected(const Graph& g) {
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == g.size();
}

std::vector<std::size_t> neighbors(const Graph& g, std::size_t i) { return g.neighbors(i); }

void require_connected(const Graph& g) {
  if (!is_connected(g)) throw InvalidArgument("graph is not connected");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::size_t> parse_indices(std::string_view line, std::size_t line_no) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + line.size(), value);
    if (ec != std::errc() || (ptr != line.data() + line.size() && *ptr != ' ' && *ptr != '\t')) {
      throw ParseError(line_no, "expected non-negative decimal integer in '" +
                                    std::string(line) + "'");
    }
    out.push_back(value);
    pos = static_cast<std::size_t>(ptr - line.data());
  }
  return out;
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<Edge> edges;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto values = parse_indices(line, line_no);
    if (!have_n) {
      if (values.size() != 1) throw ParseError(line_no, "first data line must be the node count");
      if (values[0] == 0) throw ParseError(line_no, "node count must be positive");
      n = values[0];
      have_n = true;
    } else {
      if (values.size() != 2) throw ParseError(line_no, "edge line must hold exactly two indices");
      const auto [i, j] = std::pair{values[0], values[1]};
      if (i >= n || j >= n) throw ParseError(line_no, "node index out of range");
      if (i == j) throw ParseError(line_no, "self-loop");
      edges.emplace_back(i, j);
    }
    if (end == text.size()) break;
  }
  if (!have_n) throw ParseError(0, "missing node count line");
  return Graph(n, std::move(edges));
}

std::string serialize_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.size() << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
  return out.str();
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open edge list '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_edge_list(buffer.str());
}

}  // namespace scg
