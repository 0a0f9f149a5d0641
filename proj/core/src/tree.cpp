#include "ltm/tree.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>

namespace ltm {

LatentTree::LatentTree(std::vector<int> observed_dims, int hidden_dim)
    : observed_dims_(std::move(observed_dims)),
      observed_count_(static_cast<int>(observed_dims_.size())),
      hidden_dim_(hidden_dim),
      adj_(observed_dims_.size()) {
  if (hidden_dim_ < 1) throw invalid_argument_error("hidden_dim must be >= 1");
  for (int d : observed_dims_) {
    if (d < hidden_dim_)
      throw invalid_argument_error("observed dimension below hidden_dim");
  }
}

int LatentTree::add_hidden() {
  adj_.emplace_back();
  return node_count() - 1;
}

void LatentTree::check_node(int v) const {
  if (v < 0 || v >= node_count())
    throw invalid_argument_error("node id out of range: " + std::to_string(v));
}

void LatentTree::add_edge(int a, int b) {
  check_node(a);
  check_node(b);
  if (a == b) throw invalid_argument_error("self edge");
  if (has_edge(a, b)) return;
  adj_[a].push_back(b);
  adj_[b].push_back(a);
  std::sort(adj_[a].begin(), adj_[a].end());
  std::sort(adj_[b].begin(), adj_[b].end());
  ++edge_count_;
}

void LatentTree::remove_edge(int a, int b) {
  check_node(a);
  check_node(b);
  auto drop = [](std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it == v.end()) return false;
    v.erase(it);
    return true;
  };
  if (drop(adj_[a], b)) {
    drop(adj_[b], a);
    --edge_count_;
    transitions_.erase({a, b});
    transitions_.erase({b, a});
  }
}

bool LatentTree::has_edge(int a, int b) const {
  check_node(a);
  check_node(b);
  return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
}

std::vector<std::pair<int, int>> LatentTree::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int v = 0; v < node_count(); ++v)
    for (int u : adj_[v])
      if (v < u) out.emplace_back(v, u);
  return out;
}

void LatentTree::set_transition(int child, int parent, Matrix m) {
  check_node(child);
  check_node(parent);
  if (!has_edge(child, parent))
    throw invalid_argument_error("transition on a non-edge");
  if (m.rows() != dim(child) || m.cols() != dim(parent))
    throw invalid_argument_error("transition shape mismatch");
  transitions_.erase({parent, child});
  transitions_[{child, parent}] = std::move(m);
}

const Matrix* LatentTree::transition(int child, int parent) const {
  auto it = transitions_.find({child, parent});
  return it == transitions_.end() ? nullptr : &it->second;
}

void LatentTree::set_prior(int hidden, Vector pi) {
  check_node(hidden);
  if (!is_hidden(hidden)) throw invalid_argument_error("prior on observed node");
  if (pi.size() != hidden_dim_) throw invalid_argument_error("prior length mismatch");
  priors_[hidden] = std::move(pi);
}

const Vector* LatentTree::prior(int hidden) const {
  auto it = priors_.find(hidden);
  return it == priors_.end() ? nullptr : &it->second;
}

bool LatentTree::fully_parameterized() const {
  for (const auto& [a, b] : edges()) {
    if (!transition(a, b) && !transition(b, a)) return false;
  }
  for (int v = observed_count_; v < node_count(); ++v)
    if (!prior(v)) return false;
  return true;
}

Matrix reverse_transition(const Matrix& t_b_given_a, const Vector& prior_a,
                          const Vector& prior_b) {
  // E[y_a y_b^T] = diag(pi_a) T^T  =>  E[y_a | y_b] = diag(pi_a) T^T diag(pi_b)^-1
  Matrix rev = prior_a.asDiagonal() * t_b_given_a.transpose();
  for (int j = 0; j < rev.cols(); ++j) rev.col(j) /= prior_b(j);
  return rev;
}

Matrix LatentTree::directed_transition(int child, int parent) const {
  if (const Matrix* m = transition(child, parent)) return *m;
  const Matrix* fwd = transition(parent, child);
  if (!fwd) throw invalid_argument_error("no transition stored for edge");
  if (!is_hidden(child) || !is_hidden(parent))
    throw invalid_argument_error("cannot reverse a transition onto an observed node");
  const Vector* pa = prior(parent);
  const Vector* pc = prior(child);
  if (!pa || !pc) throw invalid_argument_error("reversal needs both priors");
  return reverse_transition(*fwd, *pc, *pa);
}

bool LatentTree::is_connected_tree() const {
  const int n = node_count();
  if (n == 0) return false;
  if (edge_count_ != n - 1) return false;
  std::vector<char> seen(n, 0);
  std::deque<int> q{0};
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : adj_[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        q.push_back(u);
      }
  }
  return reached == n;
}

std::vector<int> LatentTree::path(int a, int b) const {
  check_node(a);
  check_node(b);
  std::vector<int> parent(node_count(), -1);
  std::vector<char> seen(node_count(), 0);
  std::deque<int> q{a};
  seen[a] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (v == b) break;
    for (int u : adj_[v])
      if (!seen[u]) {
        seen[u] = 1;
        parent[u] = v;
        q.push_back(u);
      }
  }
  if (!seen[b]) throw invalid_argument_error("nodes not connected");
  std::vector<int> rev;
  for (int v = b; v != -1; v = parent[v]) {
    rev.push_back(v);
    if (v == a) break;
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

int LatentTree::meeting_node(int a, int b, int c) const {
  auto pab = path(a, b);
  auto pac = path(a, c);
  // last common prefix node of the two paths from a
  int m = a;
  for (std::size_t i = 0; i < std::min(pab.size(), pac.size()); ++i) {
    if (pab[i] != pac[i]) break;
    m = pab[i];
  }
  return m;
}

Matrix LatentTree::path_mean_map(int target, int source) const {
  if (target == source) {
    return Matrix::Identity(dim(source), dim(source));
  }
  if (!is_hidden(source))
    throw invalid_argument_error("path_mean_map source must be hidden");
  auto p = path(source, target);
  Matrix m = Matrix::Identity(hidden_dim_, hidden_dim_);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    m = directed_transition(p[i + 1], p[i]) * m;
  }
  return m;
}

void LatentTree::reroot(int root) {
  check_node(root);
  if (!is_hidden(root) && hidden_count() > 0)
    throw invalid_argument_error("root must be hidden");
  if (!is_connected_tree()) throw invalid_argument_error("reroot on non-tree");
  const Vector* root_prior = prior(root);
  if (!root_prior) throw invalid_argument_error("root has no prior");

  std::map<std::pair<int, int>, Matrix> oriented;
  std::map<int, Vector> new_priors;
  new_priors[root] = *root_prior;

  std::deque<int> q{root};
  std::vector<char> seen(node_count(), 0);
  seen[root] = 1;
  while (!q.empty()) {
    int par = q.front();
    q.pop_front();
    for (int ch : adj_[par]) {
      if (seen[ch]) continue;
      seen[ch] = 1;
      Matrix t = directed_transition(ch, par);
      if (is_hidden(ch)) new_priors[ch] = t * new_priors.at(par);
      oriented[{ch, par}] = std::move(t);
      q.push_back(ch);
    }
  }
  transitions_ = std::move(oriented);
  priors_ = std::move(new_priors);
}

std::vector<std::string> LatentTree::validate(double tol) const {
  std::vector<std::string> issues;
  if (!is_connected_tree()) issues.push_back("edge set is not a spanning tree");
  for (int v = observed_count_; v < node_count(); ++v) {
    if (degree(v) < 3)
      issues.push_back("hidden node " + std::to_string(v) + " has degree " +
                       std::to_string(degree(v)) + " < 3");
  }
  for (const auto& [k, m] : transitions_) {
    Eigen::JacobiSVD<Matrix> svd(m);
    if (svd.rank() < m.cols() ||
        svd.singularValues()(m.cols() - 1) < 1e-12) {
      std::ostringstream os;
      os << "transition " << k.first << "|" << k.second
         << " is column rank deficient";
      issues.push_back(os.str());
    }
  }
  for (const auto& [v, pi] : priors_) {
    if (pi.minCoeff() <= 0.0)
      issues.push_back("prior of node " + std::to_string(v) + " not entrywise > 0");
    if (std::abs(pi.sum() - 1.0) > tol)
      issues.push_back("prior of node " + std::to_string(v) + " does not sum to 1");
  }
  return issues;
}

}  // namespace ltm
