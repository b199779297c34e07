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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scg {

/// Unordered edge stored canonically as (min, max).
using Edge = std::pair<std::size_t, std::size_t>;

/// Static undirected simple graph over nodes 0..n-1.
///
/// Edges are canonicalized to (min, max), sorted and deduplicated on
/// construction; self-loops and out-of-range endpoints are rejected. The
/// graph is immutable afterwards and can be shared freely between runs.
class Graph {
 public:
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  /// Sorted neighbor list of node i, excluding i itself.
  const std::vector<std::size_t>& neighbors(std::size_t i) const;
  std::size_t degree(std::size_t i) const { return neighbors(i).size(); }
  bool has_edge(std::size_t i, std::size_t j) const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

Graph build_path(std::size_t n);
Graph build_ring(std::size_t n);
Graph build_complete(std::size_t n);

/// Random connected graph: a uniformly random spanning tree (random
/// attachment order) plus `extra_edges` random chords. Used for property
/// tests and the verify suite.
Graph build_random_connected(std::size_t n, std::size_t extra_edges, std::uint64_t seed);

bool is_connected(const Graph& g);
std::vector<std::size_t> neighbors(const Graph& g, std::size_t i);

/// Edge-list text: '#' comment lines, then a node count line, then one
/// "i j" pair per line. Duplicate edges collapse.
Graph parse_edge_list(std::string_view text);
std::string serialize_edge_list(const Graph& g);
Graph load_edge_list(const std::string& path);

/// Throws InvalidArgument if g is disconnected.
void require_connected(const Graph& g);

}  // namespace scg
