#ifndef CAUSALRT_GRAPH_HPP
#define CAUSALRT_GRAPH_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

namespace causalrt {

// Directed acyclic graph over named nodes. Declaration order is meaningful:
// it breaks ties in topo_order and fixes the order of condition blocks, so a
// graph is reproducible from its node list alone.
struct CausalGraph {
  std::vector<std::string> nodes;
  std::map<std::string, std::vector<std::string>> parents;

  void add_node(const std::string& name, std::vector<std::string> node_parents = {});
  const std::vector<std::string>& parents_of(const std::string& name) const;
  bool has_node(const std::string& name) const;
  bool is_root(const std::string& name) const;
};

// Validates the graph (unknown parents, duplicate edges, cycles) and returns
// a deterministic topological order: Kahn's algorithm, ready nodes taken in
// declaration order.
std::vector<std::string> topo_order(const CausalGraph& g);

// Strict descendants of the given set (the sources themselves excluded).
std::set<std::string> descendants(const CausalGraph& g, const std::vector<std::string>& sources);

// Strict ancestors of one node.
std::set<std::string> ancestors(const CausalGraph& g, const std::string& node);

}  // namespace causalrt

#endif  // CAUSALRT_GRAPH_HPP
