#include "qforge/hdbscan.hpp"

#include "qforge/io.hpp"

#include <json.hpp>

#include <numeric>

namespace qforge::hdbscan {

using nlohmann::json;

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

struct DendroNode {
  std::size_t left = 0;
  std::size_t right = 0;
  double weight = 0;
  std::size_t size = 0;
};

// Leaves are atoms 0..atoms-1 (groups of points at distance zero), internal
// nodes follow in merge order.
struct Dendrogram {
  std::vector<std::vector<std::size_t>> atom_points;
  std::vector<DendroNode> merges;

  std::size_t atoms() const { return atom_points.size(); }
  bool is_leaf(std::size_t node) const { return node < atoms(); }
  std::size_t size(std::size_t node) const {
    return is_leaf(node) ? atom_points[node].size() : merges[node - atoms()].size;
  }
};

Dendrogram single_linkage(std::span<const MstEdge> edges, std::size_t n) {
  std::vector<MstEdge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), edge_before);

  UnionFind zero(n);
  for (const auto& e : sorted) {
    if (e.i >= n || e.j >= n) throw Error("mst edge endpoint out of range");
    if (e.weight <= 0) zero.parent[zero.find(e.j)] = zero.find(e.i);
  }

  Dendrogram tree;
  std::vector<std::size_t> atom_of(n, n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto root = zero.find(p);
    if (atom_of[root] == n) {
      atom_of[root] = tree.atom_points.size();
      tree.atom_points.emplace_back();
    }
    atom_of[p] = atom_of[root];
    tree.atom_points[atom_of[p]].push_back(p);
  }

  const auto atoms = tree.atoms();
  UnionFind groups(2 * atoms);
  std::vector<std::size_t> node_of(2 * atoms);
  std::iota(node_of.begin(), node_of.end(), 0);
  for (const auto& e : sorted) {
    if (e.weight <= 0) continue;
    const auto a = groups.find(atom_of[e.i]);
    const auto b = groups.find(atom_of[e.j]);
    if (a == b) continue;
    const auto node = atoms + tree.merges.size();
    tree.merges.push_back({node_of[a], node_of[b], e.weight, tree.size(node_of[a]) + tree.size(node_of[b])});
    groups.parent[b] = a;
    node_of[a] = node;
  }
  if (tree.merges.size() + 1 != atoms) throw DataError("spanning tree does not connect all points");
  return tree;
}

}  // namespace

CondensedTree condense(std::span<const MstEdge> edges, std::size_t n_points, std::size_t min_cluster_size) {
  if (min_cluster_size < 2) throw ConfigError("min_cluster_size must be at least 2");
  CondensedTree out;
  out.n_points = n_points;
  out.min_cluster_size = min_cluster_size;
  out.clusters.push_back({-1, 0.0, 0.0, n_points, {}});
  if (n_points == 0) return out;

  const auto tree = single_linkage(edges, n_points);
  auto fall_out = [&](std::size_t node, std::size_t cluster, double lambda) {
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      const auto top = stack.back();
      stack.pop_back();
      if (tree.is_leaf(top)) {
        for (auto p : tree.atom_points[top]) out.points.push_back({p, cluster, lambda});
      } else {
        const auto& m = tree.merges[top - tree.atoms()];
        stack.push_back(m.right);
        stack.push_back(m.left);
      }
    }
    auto& c = out.clusters[cluster];
    c.lambda_death = std::max(c.lambda_death, lambda);
  };

  const auto root = tree.atoms() + tree.merges.size() - 1;
  if (tree.is_leaf(root)) {
    fall_out(root, 0, 0.0);
    return out;
  }

  std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    const auto [node, cluster] = stack.back();
    stack.pop_back();
    const auto& m = tree.merges[node - tree.atoms()];
    const double lambda = 1.0 / m.weight;
    const bool left_big = tree.size(m.left) >= min_cluster_size;
    const bool right_big = tree.size(m.right) >= min_cluster_size;

    // A kept child that is an atom cannot split further: its points leave at
    // this level.
    auto continue_into = [&](std::size_t child, std::size_t owner) {
      if (tree.is_leaf(child))
        fall_out(child, owner, lambda);
      else
        stack.emplace_back(child, owner);
    };

    if (left_big && right_big) {
      out.clusters[cluster].lambda_death = std::max(out.clusters[cluster].lambda_death, lambda);
      std::size_t ids[2];
      const std::size_t sides[2] = {m.left, m.right};
      for (int s = 0; s < 2; ++s) {
        ids[s] = out.clusters.size();
        out.clusters.push_back({static_cast<int>(cluster), lambda, lambda, tree.size(sides[s]), {}});
        out.clusters[cluster].children.push_back(ids[s]);
      }
      // Push right first so the left subtree is numbered first.
      continue_into(m.right, ids[1]);
      continue_into(m.left, ids[0]);
    } else if (!left_big && !right_big) {
      fall_out(m.left, cluster, lambda);
      fall_out(m.right, cluster, lambda);
    } else if (left_big) {
      fall_out(m.right, cluster, lambda);
      continue_into(m.left, cluster);
    } else {
      fall_out(m.left, cluster, lambda);
      continue_into(m.right, cluster);
    }
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const PointFallout& a, const PointFallout& b) { return a.point < b.point; });
  return out;
}

std::vector<double> CondensedTree::stability() const {
  std::vector<double> s(clusters.size(), 0.0);
  for (const auto& p : points) s[p.cluster] += p.lambda - clusters[p.cluster].lambda_birth;
  for (std::size_t c = 1; c < clusters.size(); ++c) {
    const auto parent = static_cast<std::size_t>(clusters[c].parent);
    s[parent] += (clusters[c].lambda_birth - clusters[parent].lambda_birth) * static_cast<double>(clusters[c].size);
  }
  return s;
}

std::string CondensedTree::to_json() const {
  const auto stab = stability();
  json nodes = json::array();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& k = clusters[c];
    nodes.push_back({{"id", c},
                     {"parent", k.parent},
                     {"lambda_birth", k.lambda_birth},
                     {"lambda_death", k.lambda_death},
                     {"size", k.size},
                     {"stability", stab[c]},
                     {"children", k.children}});
  }
  json pts = json::array();
  for (const auto& p : points) pts.push_back({{"point", p.point}, {"cluster", p.cluster}, {"lambda", p.lambda}});
  return json{{"n_points", n_points}, {"min_cluster_size", min_cluster_size}, {"clusters", nodes}, {"points", pts}}
             .dump() +
         "\n";
}

std::size_t ClusterLabels::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

ClusterLabels extract_clusters(const CondensedTree& tree) {
  const auto count = tree.clusters.size();
  const auto stab = tree.stability();
  std::vector<bool> selected(count, true);
  selected[0] = false;
  std::vector<double> subtree(count, 0.0);

  auto deselect_below = [&](std::size_t c) {
    std::vector<std::size_t> stack(tree.clusters[c].children.begin(), tree.clusters[c].children.end());
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      selected[k] = false;
      stack.insert(stack.end(), tree.clusters[k].children.begin(), tree.clusters[k].children.end());
    }
  };

  for (std::size_t c = count; c-- > 1;) {
    const auto& node = tree.clusters[c];
    double children = 0;
    for (auto k : node.children) children += subtree[k];
    if (!node.children.empty() && children > stab[c]) {
      selected[c] = false;
      subtree[c] = children;
    } else {
      subtree[c] = stab[c];
      deselect_below(c);
    }
  }

  ClusterLabels out;
  std::vector<int> dense(count, kNoise);
  for (std::size_t c = 1; c < count; ++c) {
    if (!selected[c]) continue;
    dense[c] = static_cast<int>(out.tree_nodes.size());
    out.tree_nodes.push_back(c);
    out.stability.push_back(stab[c]);
  }

  out.labels.assign(tree.n_points, kNoise);
  for (const auto& p : tree.points) {
    for (auto c = static_cast<int>(p.cluster); c > 0; c = tree.clusters[static_cast<std::size_t>(c)].parent) {
      if (selected[static_cast<std::size_t>(c)]) {
        out.labels[p.point] = dense[static_cast<std::size_t>(c)];
        break;
      }
    }
  }
  return out;
}

ClusterResult cluster(const RowMatrixd& points, std::size_t min_cluster_size, std::size_t min_samples,
                      std::size_t workers) {
  if (min_samples == 0) min_samples = min_cluster_size;
  const auto cores = core_distances(points, min_samples, workers);
  const auto edges = mst(points, cores);
  ClusterResult result;
  result.tree = condense(edges, static_cast<std::size_t>(points.rows()), min_cluster_size);
  result.labels = extract_clusters(result.tree);
  return result;
}

std::string labels_csv(std::span<const std::string> ids, const ClusterLabels& labels) {
  if (ids.size() != labels.labels.size()) throw Error("labels_csv: id count does not match label count");
  std::string out = "post_id,cluster_id\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out += io::csv_row({ids[i], std::to_string(labels.labels[i])});
  return out;
}

}  // namespace qforge::hdbscan
