#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dualgap/duality.hpp"

namespace dualgap {

enum class MetricKind { Euclidean, Discrete, RandomMetric };
// identity and permutation need n_z = n_x; random-surjection needs n_z ≥ n_x;
// random-map is any map Z → X and is usually neither.
enum class GKind { Identity, Permutation, RandomSurjection, RandomMap };

MetricKind parse_metric_kind(const std::string& s);
GKind parse_g_kind(const std::string& s);
std::string to_string(MetricKind k);
std::string to_string(GKind k);

struct InstanceSpec {
  std::size_t n_x = 4, n_z = 4;
  MetricKind metric = MetricKind::Euclidean;
  std::string generator = "tv";
  double lambda = 1;
  double gamma = 1;
  GKind g_kind = GKind::Permutation;
  std::uint64_t seed = 0;
  // Draw n_x (and n_z where the map allows it) uniformly from [1, n].
  bool vary_sizes = false;

  void validate() const;
};

struct Instance {
  FiniteMetricSpace space;
  DiscreteDistribution P_X, P_Z, P_G;
  PushforwardMap G;
  std::uint64_t seed;
};

// Instance `index` of the family; its randomness comes only from
// derive_seed(spec.seed, index).
Instance make_instance(const InstanceSpec& spec, std::size_t index);

struct InstanceRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> values;
  std::map<std::string, double> gaps;
  bool pass = true;
  bool skipped = false;
  std::string note;
};

struct TheoremReport {
  std::string suite;
  std::map<std::string, double> tolerances;
  std::vector<InstanceRecord> instances;

  std::size_t passed() const;
  std::size_t failed() const;
  std::size_t skipped() const;
  bool pass() const { return failed() == 0; }
};

// GAN_{λf} ≤ WAE + 1e−6; |GAN − WAE| ≤ 1e−5 when G is a permutation.
TheoremReport verify_theorem1(const InstanceSpec& spec, std::size_t count,
                              const SolverConfig& cfg = {});
// Discrete metric; f-WAE with cost γ·c at γ ∈ {γ*, 2γ*} against D_f(P_X, P_G).
TheoremReport verify_theorem2(const InstanceSpec& spec, std::size_t count,
                              const SolverConfig& cfg = {});
// At λ ∈ {λ̂*, 2λ̂*, 10λ̂*}: GAN, f-WAE, WAE all equal W_c within 1e−5.
TheoremReport verify_theorem3(const InstanceSpec& spec, std::size_t count,
                              const SolverConfig& cfg = {});
// f-WAE ≤ W_c ≤ W_{c,ε} for each ε, and the entropic value is monotone in ε.
TheoremReport verify_theorem5(const InstanceSpec& spec, std::size_t count,
                              const std::vector<double>& eps_list, const SolverConfig& cfg = {});
// D_f(G#P, G#Q) ≤ D_f(P,Q), with equality for permutations and for P/Q
// ratios constant on the fibers of G.
TheoremReport verify_data_processing(const InstanceSpec& spec, std::size_t count);
TheoremReport verify_fwae_equals_wae(const InstanceSpec& spec, std::size_t count,
                                     const SolverConfig& cfg = {});
// Builds E with (G∘E)#P_X = P' for random P'; throws ContractError unless G
// is invertible.
TheoremReport verify_reparametrization(const InstanceSpec& spec, std::size_t count);

}  // namespace dualgap
