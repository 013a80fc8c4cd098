// Copyright 2026 The B-EED Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "beed/container.hpp"
#include "beed/eed.hpp"
#include "beed/image.hpp"

namespace beed {

enum class ChannelGroup { kLuma, kChroma };

// Parameters used to build masks before the parameter search.
inline constexpr eed::EEDParams kStandardParams{0.8, 1.0};

// Looser solver used inside the search loops.
inline constexpr eed::SolverConfig kSearchSolver{1e-4, 20, 10000, 50};

struct SparsifyConfig {
  double c_ps = 0.10;            // candidate fraction of kept blocks per round
  double r_ps = 0.50;            // fraction of candidates removed per round
  double target_density = 1.0;
  std::uint64_t seed = 1;
};
void validate(const SparsifyConfig& cfg);

struct NLBEConfig {
  double c_nlbe = 0.10;  // candidate fraction of removed blocks per cycle
  double r_nlbe = 0.30;  // fraction of candidates inserted per cycle
  int max_cycles = 200;
  int patience = 10;     // consecutive rejected cycles before stopping
  std::uint64_t seed = 1;
};
void validate(const NLBEConfig& cfg);

struct ParamSearchConfig {
  int sigma_evals = 5;   // outer golden-section budget
  int lambda_evals = 5;  // inner budget per sigma; lambda is searched in log space
  double sigma_min = 0.4;
  double sigma_max = 4.0;
  double lambda_min = 0.1;
  double lambda_max = 10.0;
};
void validate(const ParamSearchConfig& cfg);

struct RatioTarget {
  double target_ratio = 0.0;  // raw RGB bytes / container bytes
  double tolerance = 0.05;    // relative
};

// MSE over the real pixels of one block, averaged over the given planes
// (Y alone for luma, Cb and Cr for chroma).
double block_local_error(std::span<const PixelPlane> recon,
                         std::span<const PixelPlane> orig, const BlockGrid& grid,
                         int index);
double block_local_error(const YCbCrImage& recon, const YCbCrImage& orig,
                         const BlockGrid& grid, int index, ChannelGroup group);

// Reconstruction of one channel group from a block mask. Luma uses EED with
// its own tensor; chroma uses the fixed tensor of `guide_luma` under the
// chroma parameters. Known values come from `init`, errors are measured
// against `orig`. Not thread-safe (keeps solver statistics).
class GroupModel {
 public:
  GroupModel(const YCbCrImage& init, const YCbCrImage& orig, ChannelGroup group,
             const eed::EEDParams& params, const PixelPlane& guide_luma,
             const eed::SolverConfig& solver = kSearchSolver);

  ChannelGroup group() const { return group_; }
  const BlockGrid& grid() const { return grid_; }
  const eed::EEDParams& params() const { return params_; }

  std::vector<PixelPlane> reconstruct(const BlockMask& mask) const;
  // Group MSE vs the original (Cb and Cr are averaged).
  double mse(std::span<const PixelPlane> recon) const;
  double block_error(std::span<const PixelPlane> recon, int index) const;

  std::size_t solves() const { return solves_; }
  std::size_t unconverged() const { return unconverged_; }

 private:
  ChannelGroup group_;
  BlockGrid grid_;
  eed::EEDParams params_;
  eed::SolverConfig solver_;
  std::vector<PixelPlane> init_;
  std::vector<PixelPlane> orig_;
  eed::TensorField guide_;
  mutable std::size_t solves_ = 0;
  mutable std::size_t unconverged_ = 0;
};

// Probabilistic sparsification as an incrementally extended removal order.
// The mask with k kept blocks is the full mask minus the first N - k removed
// blocks; this equals sparsify() with target density k / N.
class SparsificationPath {
 public:
  SparsificationPath(std::shared_ptr<const GroupModel> model, const SparsifyConfig& cfg);

  // Runs rounds until at most `kept` blocks remain (kept >= 1).
  void extend_to(int kept);
  // Mask with exactly `kept` blocks; extends the path as needed.
  BlockMask mask_at(int kept);

  int blocks() const { return model_->grid().count(); }
  int rounds() const { return rounds_; }
  const std::vector<int>& removal_order() const { return order_; }
  const GroupModel& model() const { return *model_; }

 private:
  void round();

  std::shared_ptr<const GroupModel> model_;
  SparsifyConfig cfg_;
  std::mt19937_64 rng_;
  BlockMask mask_;
  std::vector<int> order_;
  int rounds_ = 0;
};

// Number of kept blocks for a density: floor(density * N). Throws
// InvalidArgument if fewer than one block would remain.
int kept_for_density(double density, int blocks);

// Sparsifies `group` of `init` towards cfg.target_density. `params` holds the
// luma and chroma parameters; chroma is guided by the tensor of init.y.
BlockMask sparsify(const YCbCrImage& init, const YCbCrImage& orig,
                   const SparsifyConfig& cfg, const eed::EEDParams& luma_params,
                   const eed::EEDParams& chroma_params, ChannelGroup group,
                   const eed::SolverConfig& solver = kSearchSolver);

struct NLBEResult {
  BlockMask mask;
  double initial_mse = 0.0;
  double final_mse = 0.0;
  std::vector<double> accepted_mse;  // after each accepted cycle
  int cycles = 0;
  int accepted = 0;
};

// Nonlocal block exchange. `admissible`, when set, vetoes candidate masks
// before they are evaluated (used to respect a byte budget).
NLBEResult nlbe(const BlockMask& mask, const GroupModel& model, const NLBEConfig& cfg,
                const std::function<bool(const BlockMask&)>& admissible = {});

struct ParamEval {
  eed::EEDParams params;
  double mse = 0.0;
};

struct ParamSearchResult {
  eed::EEDParams params;      // chosen, 8.8 fixed-point representable
  double standard_mse = 0.0;  // at kStandardParams
  double best_mse = 0.0;      // at `params`
  bool fell_back = false;     // no evaluated point beat the standard pair
  std::vector<ParamEval> trace;
};

// Nested golden-section search: sigma outside, log(lambda) inside.
ParamSearchResult search_params(const std::function<double(const eed::EEDParams&)>& objective,
                                const ParamSearchConfig& cfg);

struct ParameterChoice {
  ParamSearchResult luma;
  ParamSearchResult chroma;
  std::size_t solves = 0;
  std::size_t unconverged = 0;
};

// Luma first; chroma is then searched with the tensor of the luma
// reconstruction under the chosen luma parameters.
ParameterChoice optimize_parameters(const BlockMask& luma_mask,
                                    const BlockMask& chroma_mask,
                                    const YCbCrImage& init, const YCbCrImage& orig,
                                    const ParamSearchConfig& cfg = {},
                                    const eed::SolverConfig& solver = kSearchSolver);

struct RatioSearchConfig {
  std::vector<int> qualities{10, 20, 30, 40, 50, 60, 70};
  std::vector<double> alphas{0.25, 0.5, 1.0};  // chroma density / luma density
  SparsifyConfig sparsify;
  NLBEConfig nlbe;
  ParamSearchConfig params;
  eed::SolverConfig search_solver = kSearchSolver;
  eed::SolverConfig final_solver;
  bool run_nlbe = true;
  bool run_param_search = true;
  // Fixed parameters replace the search for that group when set.
  std::optional<eed::EEDParams> luma_params;
  std::optional<eed::EEDParams> chroma_params;
};
void validate(const RatioSearchConfig& cfg);

struct StageRecord {
  std::string stage;
  double density = 0.0;
  double mse = 0.0;
  std::size_t bytes = 0;
};

struct CandidateRecord {
  int quality = 0;
  double alpha = 0.0;
  int luma_kept = 0;
  int chroma_kept = 0;
  std::size_t bytes = 0;
  double psnr = 0.0;
};

struct OptimizationReport {
  double target_ratio = 0.0;
  double achieved_ratio = 0.0;
  bool within_tolerance = false;
  std::size_t bytes = 0;
  int q_base = 0;
  double alpha = 0.0;
  double luma_density = 0.0;
  double chroma_density = 0.0;
  bool chroma_above_luma = false;
  eed::EEDParams luma_params;
  eed::EEDParams chroma_params;
  double psnr = 0.0;  // of the decoded container, full solver tolerance

  // Group MSE after each stage, in pipeline order.
  double luma_mse_sparsified = 0.0;
  double luma_mse_params = 0.0;
  double luma_mse_nlbe = 0.0;
  double chroma_mse_sparsified = 0.0;
  double chroma_mse_params = 0.0;
  double chroma_mse_nlbe = 0.0;
  int nlbe_accepted_luma = 0;
  int nlbe_accepted_chroma = 0;
  ParameterChoice parameter_search;

  double relaxed_tolerance = 0.0;  // solver tolerance used during the search
  std::size_t search_solves = 0;
  std::size_t unconverged_solves = 0;

  std::vector<StageRecord> stages;
  std::vector<CandidateRecord> candidates;
};

// stage,density,mse,bytes
std::string stages_csv(const OptimizationReport& report);

struct EncodeResult {
  std::vector<std::uint8_t> bytes;
  Container container;
  OptimizationReport report;
};

// Searches (q_base, alpha, luma density) for a byte budget, then per group:
// parameter search on the standard-parameter mask, NLBE under the found
// parameters (luma first, chroma guided by the final luma). Sparsification
// paths are cached per quality, so repeated calls for different targets on
// the same image share work and return what single calls would.
class RatioOptimizer {
 public:
  RatioOptimizer(const RgbImage& orig, RatioSearchConfig cfg = {});
  ~RatioOptimizer();

  // Throws UnattainableTarget when no candidate fits the budget and
  // InvalidArgument when target_ratio <= 1.
  EncodeResult optimize(const RatioTarget& target);

 private:
  struct QualityState;
  QualityState& state(int quality);
  std::size_t container_bytes(QualityState& s, int luma_kept, int chroma_kept);

  RgbImage orig_rgb_;
  YCbCrImage orig_;
  BlockGrid grid_;
  RatioSearchConfig cfg_;
  std::map<int, std::unique_ptr<QualityState>> states_;
};

EncodeResult optimize_for_ratio(const RgbImage& orig, const RatioTarget& target,
                                const RatioSearchConfig& cfg = {});

}  // namespace beed
