#include "dualgap/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualgap {

namespace {
constexpr double kInfCap = std::numeric_limits<double>::infinity();
constexpr signed char kUpper = -1, kTree = 0, kLower = 1;
constexpr signed char kDirUp = 1, kDirDown = -1;
}  // namespace

NetworkSimplex::NetworkSimplex(std::size_t nodes)
    : node_num_(static_cast<int>(nodes)), root_(static_cast<int>(nodes)), supply_(nodes + 1, 0.0) {}

std::size_t NetworkSimplex::add_arc(std::size_t from, std::size_t to, double cost, double capacity) {
  if (from >= static_cast<std::size_t>(node_num_) || to >= static_cast<std::size_t>(node_num_))
    throw std::out_of_range("arc endpoint out of range");
  if (!(capacity >= 0)) throw std::invalid_argument("arc capacity must be nonnegative");
  if (!std::isfinite(cost)) throw std::invalid_argument("arc cost must be finite");
  source_.push_back(static_cast<int>(from));
  target_.push_back(static_cast<int>(to));
  cost_.push_back(cost);
  cap_.push_back(capacity);
  return static_cast<std::size_t>(arc_num_++);
}

std::size_t NetworkSimplex::add_arc(std::size_t from, std::size_t to, double cost) {
  return add_arc(from, to, cost, kInfCap);
}

void NetworkSimplex::set_supply(std::size_t node, double supply) { supply_.at(node) = supply; }

double NetworkSimplex::reduced_cost(std::size_t a) const {
  return cost_[a] + pi_[source_[a]] - pi_[target_[a]];
}

double NetworkSimplex::total_cost() const {
  double c = 0;
  for (int a = 0; a < arc_num_; ++a) c += cost_[a] * flow_[a];
  return c;
}

void NetworkSimplex::init() {
  const int all = arc_num_ + node_num_;
  source_.resize(all);
  target_.resize(all);
  cost_.resize(all);
  cap_.resize(all);
  flow_.assign(all, 0.0);
  state_.assign(all, kLower);
  pi_.assign(node_num_ + 1, 0.0);
  parent_.assign(node_num_ + 1, -1);
  pred_.assign(node_num_ + 1, -1);
  thread_.assign(node_num_ + 1, 0);
  rev_thread_.assign(node_num_ + 1, 0);
  succ_num_.assign(node_num_ + 1, 0);
  last_succ_.assign(node_num_ + 1, 0);
  pred_dir_.assign(node_num_ + 1, kDirUp);

  double max_cost = 0, sum = 0;
  for (int a = 0; a < arc_num_; ++a) max_cost = std::max(max_cost, std::abs(cost_[a]));
  for (int v = 0; v < node_num_; ++v) sum += supply_[v];
  const double art_cost = (max_cost + 1) * (node_num_ + 1);
  eps_ = 1e-13 * art_cost;

  supply_[root_] = -sum;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = node_num_ + 1;
  last_succ_[root_] = root_ - 1;
  for (int u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
    parent_[u] = root_;
    pred_[u] = e;
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    cap_[e] = kInfCap;
    state_[e] = kTree;
    if (supply_[u] >= 0) {
      pred_dir_[u] = kDirUp;
      pi_[u] = 0;
      source_[e] = u;
      target_[e] = root_;
      flow_[e] = supply_[u];
      cost_[e] = 0;
    } else {
      pred_dir_[u] = kDirDown;
      pi_[u] = art_cost;
      source_[e] = root_;
      target_[e] = u;
      flow_[e] = -supply_[u];
      cost_[e] = art_cost;
    }
  }
  block_size_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(arc_num_))));
  next_arc_ = 0;
}

bool NetworkSimplex::find_entering_arc() {
  if (arc_num_ == 0) return false;
  double min = -eps_;
  int cnt = block_size_;
  int e;
  bool found = false;
  for (e = next_arc_; e != arc_num_; ++e) {
    const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = e;
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e + 1 == arc_num_ ? 0 : e + 1;
        return true;
      }
      cnt = block_size_;
    }
  }
  for (e = 0; e != next_arc_; ++e) {
    const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = e;
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e + 1;
        return true;
      }
      cnt = block_size_;
    }
  }
  return found;
}

void NetworkSimplex::find_join_node() {
  int u = source_[in_arc_], v = target_[in_arc_];
  while (u != v) {
    if (succ_num_[u] < succ_num_[v]) u = parent_[u];
    else v = parent_[v];
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
  int first, second;
  if (state_[in_arc_] == kLower) {
    first = source_[in_arc_];
    second = target_[in_arc_];
  } else {
    first = target_[in_arc_];
    second = source_[in_arc_];
  }
  delta_ = cap_[in_arc_];
  int result = 0;
  // Flow runs from join down to `first`, across the entering arc, then from
  // `second` up to join.
  for (int u = first; u != join_; u = parent_[u]) {
    const int e = pred_[u];
    double d;
    bool to_upper;
    if (pred_dir_[u] == kDirDown) {
      d = cap_[e] == kInfCap ? kInfCap : cap_[e] - flow_[e];
      to_upper = true;
    } else {
      d = flow_[e];
      to_upper = false;
    }
    d = std::max(d, 0.0);
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      out_to_upper_ = to_upper;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[u]) {
    const int e = pred_[u];
    double d;
    bool to_upper;
    if (pred_dir_[u] == kDirUp) {
      d = cap_[e] == kInfCap ? kInfCap : cap_[e] - flow_[e];
      to_upper = true;
    } else {
      d = flow_[e];
      to_upper = false;
    }
    d = std::max(d, 0.0);
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      out_to_upper_ = to_upper;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void NetworkSimplex::change_flow(bool change) {
  if (delta_ > 0) {
    const double val = state_[in_arc_] * delta_;
    flow_[in_arc_] += val;
    for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
    for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
  }
  if (change) {
    state_[in_arc_] = kTree;
    const int out = pred_[u_out_];
    if (out_to_upper_) {
      state_[out] = kUpper;
      flow_[out] = cap_[out];
    } else {
      state_[out] = kLower;
      flow_[out] = 0;
    }
  } else {
    state_[in_arc_] = static_cast<signed char>(-state_[in_arc_]);
    flow_[in_arc_] = state_[in_arc_] == kUpper ? cap_[in_arc_] : 0.0;
  }
}

void NetworkSimplex::update_tree_structure() {
  const int old_rev_thread = rev_thread_[u_out_];
  const int old_succ_num = succ_num_[u_out_];
  const int old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
    if (thread_[v_in_] != u_out_) {
      int after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    // When old_rev_thread == v_in, join and v_out coincide.
    const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

    // Re-hang the stem u_in → ... → u_out, reversing parent links.
    int stem = u_in_;
    int par_stem = v_in_;
    int next_stem;
    int last = last_succ_[u_in_];
    int before, after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);

      before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;

      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;

    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }
    for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

    int tmp_sc = 0, tmp_ls = last_succ_[u_out_];
    for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = static_cast<signed char>(-pred_dir_[p]);
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ_[u_out_];
  for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
      last_succ_[u] = old_rev_thread;
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
      last_succ_[u] = last_succ_out;
  }

  for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
  const int end = thread_[last_succ_[u_in_]];
  for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

void NetworkSimplex::recompute_potentials() {
  // Thread order is a preorder walk from the root, so parents come first.
  pi_[root_] = 0;
  for (int u = thread_[root_]; u != root_; u = thread_[u]) {
    const int e = pred_[u];
    pi_[u] = pi_[parent_[u]] - pred_dir_[u] * cost_[e];
  }
}

NetworkSimplex::Status NetworkSimplex::run() {
  init();
  // Incremental potentials drift by rounding; a final exact recomputation
  // followed by another pricing pass removes any spurious entering arcs.
  for (int round = 0; round < 4; ++round) {
    bool pivoted = false;
    while (find_entering_arc()) {
      pivoted = true;
      find_join_node();
      const bool change = find_leaving_arc();
      if (delta_ >= kInfCap) return Status::Unbounded;
      change_flow(change);
      if (change) {
        update_tree_structure();
        update_potential();
      }
      ++pivots_;
    }
    recompute_potentials();
    if (!pivoted) break;
  }
  double tot = 0;
  for (int v = 0; v <= node_num_; ++v) tot += std::abs(supply_[v]);
  for (int e = arc_num_; e < arc_num_ + node_num_; ++e)
    if (flow_[e] > 1e-9 * std::max(1.0, tot)) return Status::Infeasible;
  return Status::Optimal;
}

bool NetworkSimplex::tree_is_consistent() const {
  const int n = node_num_ + 1;
  // Walk the thread from the root; must visit every node exactly once.
  std::vector<int> order;
  std::vector<bool> seen(n, false);
  int u = root_;
  for (int k = 0; k < n; ++k) {
    if (seen[u]) return false;
    seen[u] = true;
    order.push_back(u);
    u = thread_[u];
  }
  if (u != root_) return false;
  for (int k = 0; k < n; ++k)
    if (rev_thread_[thread_[order[k]]] != order[k]) return false;
  // Subtree sizes and last successors from the preorder.
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[order[k]] = k;
  for (int v = 0; v < n; ++v) {
    int size = 1, k = pos[v] + 1;
    while (k < n) {
      int w = order[k], a = w;
      bool inside = false;
      while (a != -1) {
        if (a == v) {
          inside = true;
          break;
        }
        a = parent_[a];
      }
      if (!inside) break;
      ++size;
      ++k;
    }
    if (succ_num_[v] != size) return false;
    if (last_succ_[v] != order[pos[v] + size - 1]) return false;
  }
  for (int v = 0; v < node_num_; ++v) {
    const int e = pred_[v];
    if (state_[e] != kTree) return false;
    const bool up = source_[e] == v && target_[e] == parent_[v];
    const bool down = target_[e] == v && source_[e] == parent_[v];
    if (!(pred_dir_[v] == kDirUp ? up : down)) return false;
  }
  return true;
}

}  // namespace dualgap
