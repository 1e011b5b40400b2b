#include "causalrt/graph.hpp"

#include <stdexcept>

namespace causalrt {

void CausalGraph::add_node(const std::string& name, std::vector<std::string> node_parents) {
  if (parents.count(name)) throw std::invalid_argument("CausalGraph: duplicate node '" + name + "'");
  for (std::size_t i = 0; i < node_parents.size(); ++i)
    for (std::size_t j = i + 1; j < node_parents.size(); ++j)
      if (node_parents[i] == node_parents[j])
        throw std::invalid_argument("CausalGraph: node '" + name + "' repeats parent '" +
                                    node_parents[i] + "'");
  nodes.push_back(name);
  parents[name] = std::move(node_parents);
}

const std::vector<std::string>& CausalGraph::parents_of(const std::string& name) const {
  const auto it = parents.find(name);
  if (it == parents.end()) throw std::invalid_argument("CausalGraph: unknown node '" + name + "'");
  return it->second;
}

bool CausalGraph::has_node(const std::string& name) const { return parents.count(name) > 0; }

bool CausalGraph::is_root(const std::string& name) const { return parents_of(name).empty(); }

std::vector<std::string> topo_order(const CausalGraph& g) {
  if (g.nodes.size() != g.parents.size())
    throw std::invalid_argument("topo_order: node list and parent map out of sync");
  std::map<std::string, int> remaining;
  for (const auto& n : g.nodes) {
    std::set<std::string> seen;
    for (const auto& p : g.parents_of(n)) {
      if (!g.has_node(p))
        throw std::invalid_argument("topo_order: node '" + n + "' references unknown parent '" + p + "'");
      if (p == n) throw std::invalid_argument("topo_order: node '" + n + "' lists itself as parent");
      if (!seen.insert(p).second)
        throw std::invalid_argument("topo_order: node '" + n + "' lists parent '" + p + "' twice");
    }
    remaining[n] = static_cast<int>(g.parents_of(n).size());
  }

  std::map<std::string, std::vector<std::string>> children;
  for (const auto& n : g.nodes)
    for (const auto& p : g.parents_of(n)) children[p].push_back(n);

  std::vector<std::string> order;
  std::set<std::string> emitted;
  while (order.size() < g.nodes.size()) {
    bool progressed = false;
    for (const auto& n : g.nodes) {
      if (emitted.count(n) || remaining[n] != 0) continue;
      order.push_back(n);
      emitted.insert(n);
      for (const auto& c : children[n]) remaining[c] -= 1;
      progressed = true;
      break;  // restart the scan so declaration order breaks ties
    }
    if (!progressed) throw std::invalid_argument("topo_order: graph contains a cycle");
  }
  return order;
}

std::set<std::string> descendants(const CausalGraph& g, const std::vector<std::string>& sources) {
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& n : g.nodes)
    for (const auto& p : g.parents_of(n)) children[p].push_back(n);

  std::set<std::string> out;
  std::vector<std::string> frontier;
  for (const auto& s : sources) {
    if (!g.has_node(s)) throw std::invalid_argument("descendants: unknown node '" + s + "'");
    frontier.push_back(s);
  }
  while (!frontier.empty()) {
    const std::string cur = frontier.back();
    frontier.pop_back();
    for (const auto& c : children[cur]) {
      if (out.insert(c).second) frontier.push_back(c);
    }
  }
  for (const auto& s : sources) out.erase(s);
  return out;
}

std::set<std::string> ancestors(const CausalGraph& g, const std::string& node) {
  std::set<std::string> out;
  std::vector<std::string> frontier = {node};
  if (!g.has_node(node)) throw std::invalid_argument("ancestors: unknown node '" + node + "'");
  while (!frontier.empty()) {
    const std::string cur = frontier.back();
    frontier.pop_back();
    for (const auto& p : g.parents_of(cur)) {
      if (out.insert(p).second) frontier.push_back(p);
    }
  }
  out.erase(node);
  return out;
}

}  // namespace causalrt
