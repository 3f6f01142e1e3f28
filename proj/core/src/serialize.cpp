#include "treesobol/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace treesobol {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw std::runtime_error("malformed ensemble file: " + what);
}

// returns index of the node appended to tree.nodes
int parse_node(const json& j, Tree& tree, const Domain& domain,
               std::vector<double>& lo, std::vector<double>& hi) {
  if (!j.is_object()) malformed("tree node must be an object");
  const bool has_split = j.contains("split");
  const bool has_leaf = j.contains("leaf");
  if (has_split == has_leaf) malformed("tree node needs exactly one of 'split' or 'leaf'");

  if (has_leaf) {
    if (j.contains("left") || j.contains("right")) malformed("leaf node with children");
    if (!j["leaf"].is_number()) malformed("'leaf' must be a number");
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{-1, -1, {}, j["leaf"].get<double>()});
    return idx;
  }

  if (j.contains("left") != j.contains("right") || !j.contains("left"))
    malformed("unary node (internal node needs both 'left' and 'right')");
  const json& split = j["split"];
  if (!split.is_object() || !split.contains("dim") || !split.contains("cut") ||
      !split["dim"].is_number_integer() || !split["cut"].is_number())
    malformed("'split' must be {dim: int, cut: number}");

  const int file_dim = split["dim"].get<int>();
  if (file_dim < 1 || file_dim > domain.dim())
    throw std::runtime_error("dimension mismatch: split dim " + std::to_string(file_dim) +
                             " outside 1.." + std::to_string(domain.dim()));
  const int dim = file_dim - 1;
  const double cut = split["cut"].get<double>();
  if (!(cut > lo[dim] && cut < hi[dim]))
    throw std::runtime_error("degenerate split: cut " + std::to_string(cut) +
                             " not strictly inside node box on dim " + std::to_string(file_dim));

  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  tree.nodes[idx].split = SplitRule{dim, cut};

  const double save_hi = hi[dim];
  hi[dim] = cut;
  const int left = parse_node(j["left"], tree, domain, lo, hi);
  hi[dim] = save_hi;

  const double save_lo = lo[dim];
  lo[dim] = cut;
  const int right = parse_node(j["right"], tree, domain, lo, hi);
  lo[dim] = save_lo;

  tree.nodes[idx].left = left;
  tree.nodes[idx].right = right;
  return idx;
}

Domain parse_domain(const json& j) {
  if (!j.is_object() || !j.contains("domain")) malformed("missing 'domain'");
  const json& d = j["domain"];
  if (!d.is_object() || !d.contains("lo") || !d.contains("hi") || !d["lo"].is_array() ||
      !d["hi"].is_array())
    malformed("'domain' must be {lo: [...], hi: [...]}");
  auto lo = d["lo"].get<std::vector<double>>();
  auto hi = d["hi"].get<std::vector<double>>();
  if (lo.empty() || lo.size() != hi.size())
    throw std::runtime_error("dimension mismatch: domain lo/hi lengths differ or are empty");
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (!(lo[k] < hi[k])) malformed("domain margin " + std::to_string(k + 1) + " has no width");
  return Domain(std::move(lo), std::move(hi));
}

std::vector<Tree> parse_trees(const json& arr, const Domain& domain) {
  if (!arr.is_array() || arr.empty()) malformed("'trees' must be a nonempty array");
  std::vector<Tree> trees;
  trees.reserve(arr.size());
  for (const json& t : arr) {
    Tree tree;
    std::vector<double> lo = domain.lo, hi = domain.hi;
    parse_node(t, tree, domain, lo, hi);
    trees.push_back(std::move(tree));
  }
  return trees;
}

json node_to_json(const Tree& tree, int idx) {
  const TreeNode& node = tree.nodes[idx];
  if (node.is_leaf()) return json{{"leaf", node.leaf}};
  return json{{"split", {{"dim", node.split.dim + 1}, {"cut", node.split.cut}}},
              {"left", node_to_json(tree, node.left)},
              {"right", node_to_json(tree, node.right)}};
}

json domain_to_json(const Domain& domain) {
  return json{{"lo", domain.lo}, {"hi", domain.hi}};
}

json trees_to_json(const std::vector<Tree>& trees) {
  json arr = json::array();
  for (const Tree& tree : trees) arr.push_back(node_to_json(tree, 0));
  return arr;
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) malformed("invalid JSON");
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

}  // namespace

Ensemble read_ensemble_json(const std::string& text) {
  const json j = parse_text(text);
  Ensemble ens;
  ens.domain = parse_domain(j);
  if (!j.contains("trees")) malformed("missing 'trees'");
  ens.trees = parse_trees(j["trees"], ens.domain);
  validate_ensemble(ens);
  return ens;
}

Ensemble load_ensemble(const std::string& path) { return read_ensemble_json(slurp(path)); }

std::string ensemble_to_json(const Ensemble& ens) {
  json j{{"domain", domain_to_json(ens.domain)}, {"trees", trees_to_json(ens.trees)}};
  return j.dump();
}

void save_ensemble(const Ensemble& ens, const std::string& path) {
  spit(path, ensemble_to_json(ens));
}

std::vector<PosteriorDraw> read_posterior_json(const std::string& text) {
  const json j = parse_text(text);
  const Domain domain = parse_domain(j);
  if (!j.contains("draws") || !j["draws"].is_array() || j["draws"].empty())
    malformed("posterior file needs a nonempty 'draws' array");
  std::vector<PosteriorDraw> draws;
  draws.reserve(j["draws"].size());
  for (const json& d : j["draws"]) {
    if (!d.is_object() || !d.contains("sigma") || !d.contains("trees") ||
        !d["sigma"].is_number())
      malformed("each draw needs 'sigma' and 'trees'");
    PosteriorDraw draw;
    draw.sigma = d["sigma"].get<double>();
    if (!(draw.sigma > 0.0)) malformed("draw sigma must be positive");
    draw.ensemble.domain = domain;
    draw.ensemble.trees = parse_trees(d["trees"], domain);
    validate_ensemble(draw.ensemble);
    draws.push_back(std::move(draw));
  }
  return draws;
}

std::vector<PosteriorDraw> load_posterior(const std::string& path) {
  return read_posterior_json(slurp(path));
}

std::string posterior_to_json(const std::vector<PosteriorDraw>& draws) {
  if (draws.empty()) throw std::invalid_argument("posterior_to_json: no draws");
  json arr = json::array();
  for (const PosteriorDraw& d : draws)
    arr.push_back(json{{"sigma", d.sigma}, {"trees", trees_to_json(d.ensemble.trees)}});
  json j{{"domain", domain_to_json(draws.front().ensemble.domain)}, {"draws", std::move(arr)}};
  return j.dump();
}

void save_posterior(const std::vector<PosteriorDraw>& draws, const std::string& path) {
  spit(path, posterior_to_json(draws));
}

bool is_posterior_file(const std::string& path) {
  const json j = parse_text(slurp(path));
  return j.is_object() && j.contains("draws");
}

}  // namespace treesobol
