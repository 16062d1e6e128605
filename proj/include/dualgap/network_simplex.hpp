#pragma once

#include <cstddef>
#include <vector>

namespace dualgap {

// Primal network simplex for min-cost flow with real supplies and costs.
// Spanning-tree bases are stored with parent/thread/subtree-size arrays so a
// pivot touches only the re-hung subtree. The tree is kept strongly feasible
// (last blocking arc leaves), which rules out cycling on degenerate pivots.
// Entering arcs come from a block search; the first minimum in a block wins.
class NetworkSimplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  explicit NetworkSimplex(std::size_t nodes);

  // Lower bound is 0; capacity may be infinite.
  std::size_t add_arc(std::size_t from, std::size_t to, double cost, double capacity);
  std::size_t add_arc(std::size_t from, std::size_t to, double cost);
  // Positive supply = source. Supplies must sum to zero up to rounding.
  void set_supply(std::size_t node, double supply);

  Status run();

  double total_cost() const;
  double flow(std::size_t arc) const { return flow_[arc]; }
  // Optimality certificate: cost + π(from) − π(to) ≥ 0 on arcs with spare
  // capacity and ≤ 0 on saturated arcs.
  double potential(std::size_t node) const { return pi_[node]; }
  double reduced_cost(std::size_t arc) const;
  std::size_t pivots() const { return pivots_; }
  std::size_t num_arcs() const { return arc_num_; }

  // Recomputes tree bookkeeping from scratch and compares; for tests.
  bool tree_is_consistent() const;

 private:
  void init();
  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();
  void recompute_potentials();

  int node_num_;
  int arc_num_ = 0;
  int root_;
  std::vector<int> source_, target_;
  std::vector<double> cost_, cap_, flow_, supply_, pi_;
  std::vector<signed char> state_;
  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<int> dirty_revs_;

  int in_arc_ = -1, join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
  bool out_to_upper_ = false;
  double delta_ = 0;
  double eps_ = 0;
  int next_arc_ = 0, block_size_ = 1;
  std::size_t pivots_ = 0;
};

}  // namespace dualgap
