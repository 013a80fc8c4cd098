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

#include "beed/mask_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "beed/codec.hpp"
#include "beed/errors.hpp"
#include "beed/golden_section.hpp"

namespace beed {

namespace {

constexpr double kEps = 1e-9;
constexpr std::uint64_t kChromaSeedOffset = 0x9E3779B97F4A7C15ull;

int ceil_count(double x) { return static_cast<int>(std::ceil(x - kEps)); }

// Uniform integer in [0, n) by rejection, independent of the standard
// library's distribution implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// First k entries of a partial Fisher-Yates shuffle of `pool`.
std::vector<int> sample(std::mt19937_64& rng, std::vector<int> pool, int k) {
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   uniform_below(rng, pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

struct Scored {
  int index;
  double error;
};

// Largest error first, ascending block index on ties.
void sort_by_error(std::vector<Scored>& v) {
  std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
    if (a.error != b.error) return a.error > b.error;
    return a.index < b.index;
  });
}

std::uint64_t group_seed(std::uint64_t seed, ChannelGroup g) {
  return g == ChannelGroup::kLuma ? seed : seed + kChromaSeedOffset;
}

void check_fraction(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in (0, 1)");
  }
}

double plane_block_mse(const PixelPlane& a, const PixelPlane& b, const BlockRect& r) {
  double sum = 0.0;
  for (int y = r.y0; y < r.y0 + r.h; ++y)
    for (int x = r.x0; x < r.x0 + r.w; ++x) {
      const double d = a.at(x, y) - b.at(x, y);
      sum += d * d;
    }
  return sum / (static_cast<double>(r.w) * r.h);
}

std::vector<PixelPlane> group_planes(const YCbCrImage& img, ChannelGroup g) {
  if (g == ChannelGroup::kLuma) return {img.y()};
  return {img.cb(), img.cr()};
}

}  // namespace

void validate(const SparsifyConfig& cfg) {
  check_fraction(cfg.c_ps, "c_ps");
  check_fraction(cfg.r_ps, "r_ps");
  if (!(cfg.target_density > 0.0 && cfg.target_density <= 1.0)) {
    throw InvalidArgument("target density must lie in (0, 1]");
  }
}

void validate(const NLBEConfig& cfg) {
  check_fraction(cfg.c_nlbe, "c_nlbe");
  check_fraction(cfg.r_nlbe, "r_nlbe");
  if (cfg.max_cycles < 1 || cfg.patience < 1) {
    throw InvalidArgument("NLBE budgets must be at least 1");
  }
}

void validate(const ParamSearchConfig& cfg) {
  if (cfg.sigma_evals < 4 || cfg.lambda_evals < 4) {
    throw InvalidArgument("parameter search needs at least 4 evaluations per level");
  }
  if (!(cfg.sigma_min > 0.0 && cfg.sigma_min < cfg.sigma_max) ||
      !(cfg.lambda_min > 0.0 && cfg.lambda_min < cfg.lambda_max)) {
    throw InvalidArgument("parameter search ranges must be positive and non-empty");
  }
}

void validate(const RatioSearchConfig& cfg) {
  if (cfg.qualities.empty() || cfg.alphas.empty()) {
    throw InvalidArgument("ratio search needs at least one quality and one alpha");
  }
  for (int q : cfg.qualities) {
    if (q < 1 || q > 100) throw InvalidArgument("quality candidates must lie in [1, 100]");
  }
  for (double a : cfg.alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("alpha candidates must lie in (0, 1]");
  }
  SparsifyConfig s = cfg.sparsify;
  s.target_density = 1.0;
  validate(s);
  validate(cfg.nlbe);
  validate(cfg.params);
  eed::validate(cfg.search_solver);
  eed::validate(cfg.final_solver);
  for (const auto& p : {cfg.luma_params, cfg.chroma_params}) {
    if (p) {
      eed::validate(*p);
      static_cast<void>(to_fixed(p->sigma));
      static_cast<void>(to_fixed(p->lambda));
    }
  }
}

double block_local_error(std::span<const PixelPlane> recon,
                         std::span<const PixelPlane> orig, const BlockGrid& grid,
                         int index) {
  if (recon.size() != orig.size() || recon.empty()) {
    throw InvalidArgument("block_local_error needs matching plane sets");
  }
  const BlockRect r = grid.rect(index);
  double sum = 0.0;
  for (std::size_t p = 0; p < recon.size(); ++p) {
    if (!recon[p].same_shape(orig[p]) || recon[p].width != grid.width() ||
        recon[p].height != grid.height()) {
      throw InvalidArgument("block_local_error: plane dimensions differ");
    }
    sum += plane_block_mse(recon[p], orig[p], r);
  }
  return sum / static_cast<double>(recon.size());
}

double block_local_error(const YCbCrImage& recon, const YCbCrImage& orig,
                         const BlockGrid& grid, int index, ChannelGroup group) {
  const auto a = group_planes(recon, group);
  const auto b = group_planes(orig, group);
  return block_local_error(a, b, grid, index);
}

// ---------------------------------------------------------------------------

GroupModel::GroupModel(const YCbCrImage& init, const YCbCrImage& orig,
                       ChannelGroup group, const eed::EEDParams& params,
                       const PixelPlane& guide_luma, const eed::SolverConfig& solver)
    : group_(group),
      grid_(init.width(), init.height()),
      params_(params),
      solver_(solver),
      init_(group_planes(init, group)),
      orig_(group_planes(orig, group)) {
  eed::validate(params);
  eed::validate(solver);
  for (int c = 0; c < 3; ++c) {
    if (!init.channels[c].same_shape(init.y()) || !orig.channels[c].same_shape(init.y())) {
      throw InvalidArgument("GroupModel: image dimensions differ");
    }
  }
  if (group == ChannelGroup::kChroma) {
    if (!guide_luma.same_shape(init.y())) {
      throw InvalidArgument("GroupModel: guide luma dimensions differ");
    }
    guide_ = eed::diffusion_tensor(guide_luma, params);
  }
}

std::vector<PixelPlane> GroupModel::reconstruct(const BlockMask& mask) const {
  if (!(mask.grid() == grid_)) throw InvalidArgument("mask grid does not match image");
  const PixelMask known = mask.pixel_mask();
  std::vector<PixelPlane> out;
  for (const auto& plane : init_) {
    auto r = group_ == ChannelGroup::kLuma
                 ? eed::inpaint(plane, known, params_, solver_)
                 : eed::inpaint_guided(plane, known, guide_, solver_);
    ++solves_;
    if (!r.converged) ++unconverged_;
    out.push_back(std::move(r.image));
  }
  return out;
}

double GroupModel::mse(std::span<const PixelPlane> recon) const {
  double sum = 0.0;
  for (std::size_t p = 0; p < orig_.size(); ++p) sum += beed::mse(recon[p], orig_[p]);
  return sum / static_cast<double>(orig_.size());
}

double GroupModel::block_error(std::span<const PixelPlane> recon, int index) const {
  return block_local_error(recon, orig_, grid_, index);
}

// ---------------------------------------------------------------------------

SparsificationPath::SparsificationPath(std::shared_ptr<const GroupModel> model,
                                       const SparsifyConfig& cfg)
    : model_(std::move(model)),
      cfg_(cfg),
      rng_(group_seed(cfg.seed, model_->group())),
      mask_(model_->grid(), true) {
  SparsifyConfig c = cfg;
  c.target_density = 1.0;
  validate(c);
}

void SparsificationPath::round() {
  const int kept = mask_.kept_count();
  // At least one block stays known during the trial inpainting.
  const int cand = std::clamp(ceil_count(cfg_.c_ps * kept), 1, std::max(1, kept - 1));
  const auto candidates = sample(rng_, mask_.kept_indices(), cand);
  BlockMask trial = mask_;
  for (int i : candidates) trial.set_kept(i, false);

  const auto recon = model_->reconstruct(trial);
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (int i : candidates) scored.push_back({i, model_->block_error(recon, i)});
  sort_by_error(scored);

  const int readd = ceil_count((1.0 - cfg_.r_ps) * cand);
  // At least one removal per round so that the loop terminates; never drop
  // the last block.
  const int remove = std::min(std::max(1, cand - readd), kept - 1);
  for (int k = 0; k < remove; ++k) {
    const int idx = scored[static_cast<std::size_t>(cand - 1 - k)].index;
    mask_.set_kept(idx, false);
    order_.push_back(idx);
  }
  ++rounds_;
}

void SparsificationPath::extend_to(int kept) {
  if (kept < 1) throw InvalidArgument("at least one block must remain");
  while (mask_.kept_count() > kept) round();
}

BlockMask SparsificationPath::mask_at(int kept) {
  if (kept > blocks()) throw InvalidArgument("more kept blocks than the grid holds");
  extend_to(kept);
  BlockMask m(model_->grid(), true);
  for (int k = 0; k < blocks() - kept; ++k) m.set_kept(order_[static_cast<std::size_t>(k)], false);
  return m;
}

int kept_for_density(double density, int blocks) {
  if (!(density > 0.0 && density <= 1.0)) {
    throw InvalidArgument("density must lie in (0, 1]");
  }
  const int kept = static_cast<int>(std::floor(density * blocks + kEps));
  if (kept < 1) {
    throw InvalidArgument("target density leaves no block (need at least one)");
  }
  return std::min(kept, blocks);
}

BlockMask sparsify(const YCbCrImage& init, const YCbCrImage& orig,
                   const SparsifyConfig& cfg, const eed::EEDParams& luma_params,
                   const eed::EEDParams& chroma_params, ChannelGroup group,
                   const eed::SolverConfig& solver) {
  validate(cfg);
  const BlockGrid grid(init.width(), init.height());
  const int kept = kept_for_density(cfg.target_density, grid.count());
  auto model = std::make_shared<const GroupModel>(
      init, orig, group, group == ChannelGroup::kLuma ? luma_params : chroma_params,
      init.y(), solver);
  SparsificationPath path(model, cfg);
  return path.mask_at(kept);
}

// ---------------------------------------------------------------------------

NLBEResult nlbe(const BlockMask& mask, const GroupModel& model, const NLBEConfig& cfg,
                const std::function<bool(const BlockMask&)>& admissible) {
  validate(cfg);
  const int n = mask.size();
  const int kept = mask.kept_count();
  if (kept < 1 || kept >= n) {
    throw InvalidArgument("NLBE needs a mask density strictly between 0 and 1");
  }
  std::mt19937_64 rng(group_seed(cfg.seed, model.group()));
  NLBEResult res;
  res.mask = mask;
  auto recon = model.reconstruct(mask);
  res.initial_mse = res.final_mse = model.mse(recon);

  int idle = 0;
  while (res.cycles < cfg.max_cycles && idle < cfg.patience) {
    ++res.cycles;
    const auto removed = res.mask.removed_indices();
    const int cand = std::clamp(ceil_count(cfg.c_nlbe * static_cast<double>(removed.size())),
                                1, static_cast<int>(removed.size()));
    const auto candidates = sample(rng, removed, cand);
    const int insert = std::min(ceil_count(cfg.r_nlbe * cand), kept);
    if (insert < 1) {
      ++idle;
      continue;
    }
    std::vector<Scored> scored;
    for (int i : candidates) scored.push_back({i, model.block_error(recon, i)});
    sort_by_error(scored);
    const auto drop = sample(rng, res.mask.kept_indices(), insert);

    BlockMask trial = res.mask;
    for (int k = 0; k < insert; ++k) trial.set_kept(scored[static_cast<std::size_t>(k)].index, true);
    for (int i : drop) trial.set_kept(i, false);
    if (admissible && !admissible(trial)) {
      ++idle;
      continue;
    }
    auto trial_recon = model.reconstruct(trial);
    const double e = model.mse(trial_recon);
    if (e < res.final_mse) {
      res.mask = std::move(trial);
      recon = std::move(trial_recon);
      res.final_mse = e;
      res.accepted_mse.push_back(e);
      ++res.accepted;
      idle = 0;
    } else {
      ++idle;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

ParamSearchResult search_params(
    const std::function<double(const eed::EEDParams&)>& objective,
    const ParamSearchConfig& cfg) {
  validate(cfg);
  ParamSearchResult res;
  auto eval = [&](double sigma, double lambda) {
    const eed::EEDParams p = quantize_params({sigma, lambda});
    const double e = objective(p);
    res.trace.push_back({p, e});
    return e;
  };
  const double log_lo = std::log(cfg.lambda_min);
  const double log_hi = std::log(cfg.lambda_max);
  golden_section(
      [&](double sigma) {
        const auto inner = golden_section(
            [&](double t) { return eval(sigma, std::exp(t)); }, log_lo, log_hi,
            cfg.lambda_evals);
        return inner.best.f;
      },
      cfg.sigma_min, cfg.sigma_max, cfg.sigma_evals);

  const eed::EEDParams standard = quantize_params(kStandardParams);
  res.standard_mse = objective(standard);
  const ParamEval* best = &res.trace.front();
  for (const auto& e : res.trace)
    if (e.mse < best->mse) best = &e;
  if (best->mse < res.standard_mse) {
    res.params = best->params;
    res.best_mse = best->mse;
  } else {
    res.params = standard;
    res.best_mse = res.standard_mse;
    res.fell_back = true;
  }
  return res;
}

ParameterChoice optimize_parameters(const BlockMask& luma_mask,
                                    const BlockMask& chroma_mask,
                                    const YCbCrImage& init, const YCbCrImage& orig,
                                    const ParamSearchConfig& cfg,
                                    const eed::SolverConfig& solver) {
  ParameterChoice out;
  auto run = [&](const GroupModel& m, const BlockMask& mask) {
    const double e = m.mse(m.reconstruct(mask));
    out.solves += m.solves();
    out.unconverged += m.unconverged();
    return e;
  };
  out.luma = search_params(
      [&](const eed::EEDParams& p) {
        return run(GroupModel(init, orig, ChannelGroup::kLuma, p, init.y(), solver),
                   luma_mask);
      },
      cfg);
  const GroupModel luma(init, orig, ChannelGroup::kLuma, out.luma.params, init.y(), solver);
  const PixelPlane luma_recon = luma.reconstruct(luma_mask).front();
  out.solves += luma.solves();
  out.unconverged += luma.unconverged();
  out.chroma = search_params(
      [&](const eed::EEDParams& p) {
        return run(GroupModel(init, orig, ChannelGroup::kChroma, p, luma_recon, solver),
                   chroma_mask);
      },
      cfg);
  return out;
}

// ---------------------------------------------------------------------------

std::string stages_csv(const OptimizationReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "stage,density,mse,bytes\n";
  for (const auto& s : report.stages) {
    os << s.stage << ',' << s.density << ',' << s.mse << ',' << s.bytes << '\n';
  }
  return os.str();
}

struct RatioOptimizer::QualityState {
  int quality = 0;
  YCbCrImage init;
  std::unique_ptr<SparsificationPath> luma;
  std::unique_ptr<SparsificationPath> chroma;
  std::map<std::pair<int, int>, std::size_t> sizes;
};

RatioOptimizer::RatioOptimizer(const RgbImage& orig, RatioSearchConfig cfg)
    : orig_rgb_(orig),
      orig_(rgb_to_ycbcr(orig)),
      grid_(orig.width(), orig.height()),
      cfg_(std::move(cfg)) {
  validate(cfg_);
  if (orig.width() < kBlockSize || orig.height() < kBlockSize) {
    throw InvalidArgument("image must be at least 8x8");
  }
}

RatioOptimizer::~RatioOptimizer() = default;

RatioOptimizer::QualityState& RatioOptimizer::state(int quality) {
  auto& slot = states_[quality];
  if (!slot) {
    slot = std::make_unique<QualityState>();
    slot->quality = quality;
    slot->init = baseline_planes(orig_, quality);
    const eed::EEDParams std_params = quantize_params(kStandardParams);
    auto luma = std::make_shared<const GroupModel>(slot->init, orig_, ChannelGroup::kLuma,
                                                   std_params, slot->init.y(),
                                                   cfg_.search_solver);
    auto chroma = std::make_shared<const GroupModel>(slot->init, orig_,
                                                     ChannelGroup::kChroma, std_params,
                                                     slot->init.y(), cfg_.search_solver);
    slot->luma = std::make_unique<SparsificationPath>(luma, cfg_.sparsify);
    slot->chroma = std::make_unique<SparsificationPath>(chroma, cfg_.sparsify);
  }
  return *slot;
}

std::size_t RatioOptimizer::container_bytes(QualityState& s, int luma_kept,
                                             int chroma_kept) {
  const auto key = std::make_pair(luma_kept, chroma_kept);
  if (auto it = s.sizes.find(key); it != s.sizes.end()) return it->second;
  const Container c =
      build_container(orig_, s.quality, s.luma->mask_at(luma_kept),
                      s.chroma->mask_at(chroma_kept), kStandardParams, kStandardParams);
  const std::size_t n = write_container(c).size();
  s.sizes.emplace(key, n);
  return n;
}

namespace {

int chroma_kept_for(double alpha, int luma_kept) {
  return std::max(1, static_cast<int>(std::floor(alpha * luma_kept + kEps)));
}

std::size_t single_block_bytes(const YCbCrImage& orig, int quality) {
  BlockMask m(BlockGrid(orig.width(), orig.height()), false);
  m.set_kept(0, true);
  return write_container(
             build_container(orig, quality, m, m, kStandardParams, kStandardParams))
      .size();
}

}  // namespace

EncodeResult RatioOptimizer::optimize(const RatioTarget& target) {
  if (!(target.target_ratio > 1.0) || !std::isfinite(target.target_ratio)) {
    throw InvalidArgument("target ratio must be greater than 1");
  }
  if (!(target.tolerance >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  const std::size_t raw = raw_size(grid_.width(), grid_.height());
  const auto budget =
      static_cast<std::size_t>(std::floor(static_cast<double>(raw) / target.target_ratio));
  // Smallest container still inside the ratio tolerance.
  const auto window_bytes = static_cast<std::size_t>(std::ceil(
      static_cast<double>(raw) / (target.target_ratio * (1.0 + target.tolerance))));
  const int n = grid_.count();

  std::size_t solves_before = 0, unconverged_before = 0;
  for (auto& [q, s] : states_) {
    solves_before += s->luma->model().solves() + s->chroma->model().solves();
    unconverged_before += s->luma->model().unconverged() + s->chroma->model().unconverged();
  }
  std::size_t extra_solves = 0, extra_unconverged = 0;

  OptimizationReport rep;
  rep.target_ratio = target.target_ratio;
  rep.relaxed_tolerance = cfg_.search_solver.residual_tol;

  std::vector<double> alphas = cfg_.alphas;
  std::sort(alphas.begin(), alphas.end(), std::greater<>());

  struct Best {
    int quality = 0;
    double alpha = 0.0;
    int luma_kept = 0;
    int chroma_kept = 0;
    double psnr = -1.0;
  } best;
  std::size_t smallest = std::numeric_limits<std::size_t>::max();

  for (int q : cfg_.qualities) {
    const std::size_t floor_bytes = single_block_bytes(orig_, q);
    smallest = std::min(smallest, floor_bytes);
    if (floor_bytes > budget) continue;
    QualityState& s = state(q);
    for (double alpha : alphas) {
      auto bytes_at = [&](int k) { return container_bytes(s, k, chroma_kept_for(alpha, k)); };
      int feasible = -1;
      int infeasible = n + 1;
      if (bytes_at(n) <= budget) {
        feasible = n;
      } else {
        infeasible = n;
        int k = n;
        while (k > 1) {
          k = std::max(1, static_cast<int>(std::floor(k * (1.0 - cfg_.sparsify.c_ps))));
          if (bytes_at(k) <= budget) {
            feasible = k;
            break;
          }
          infeasible = k;
        }
        if (feasible < 0) continue;
        while (infeasible - feasible > 1) {
          const int mid = feasible + (infeasible - feasible) / 2;
          if (bytes_at(mid) <= budget) {
            feasible = mid;
          } else {
            infeasible = mid;
          }
        }
      }
      CandidateRecord cand;
      cand.quality = q;
      cand.alpha = alpha;
      cand.luma_kept = feasible;
      cand.chroma_kept = chroma_kept_for(alpha, feasible);
      cand.bytes = bytes_at(feasible);

      const BlockMask ym = s.luma->mask_at(cand.luma_kept);
      const BlockMask cm = s.chroma->mask_at(cand.chroma_kept);
      const auto std_params = quantize_params(kStandardParams);
      GroupModel luma(s.init, orig_, ChannelGroup::kLuma, std_params, s.init.y(),
                      cfg_.search_solver);
      YCbCrImage recon = s.init;
      recon.y() = luma.reconstruct(ym).front();
      GroupModel chroma(s.init, orig_, ChannelGroup::kChroma, std_params, recon.y(),
                        cfg_.search_solver);
      auto c = chroma.reconstruct(cm);
      recon.cb() = std::move(c[0]);
      recon.cr() = std::move(c[1]);
      extra_solves += luma.solves() + chroma.solves();
      extra_unconverged += luma.unconverged() + chroma.unconverged();
      cand.psnr = psnr(orig_rgb_, quantize_rgb(ycbcr_to_rgb(recon))).value_or(99.0);
      rep.candidates.push_back(cand);
      if (cand.psnr > best.psnr) {
        best = {q, alpha, cand.luma_kept, cand.chroma_kept, cand.psnr};
      }
      // Full density already fits: smaller alphas only discard chroma.
      if (feasible == n && alpha >= 1.0) break;
    }
  }
  if (best.quality == 0) {
    throw UnattainableTarget(target.target_ratio,
                             static_cast<double>(raw) / static_cast<double>(smallest));
  }

  QualityState& s = state(best.quality);
  rep.q_base = best.quality;
  rep.alpha = best.alpha;
  BlockMask ym = s.luma->mask_at(best.luma_kept);
  BlockMask cm = s.chroma->mask_at(best.chroma_kept);
  const auto std_params = quantize_params(kStandardParams);

  auto size_of = [&](const BlockMask& y, const BlockMask& c, const eed::EEDParams& py,
                     const eed::EEDParams& pc) {
    return write_container(build_container(orig_, best.quality, y, c, py, pc)).size();
  };
  auto record = [&](const std::string& stage, double density, double mse,
                    std::size_t bytes) { rep.stages.push_back({stage, density, mse, bytes}); };

  record("baseline", 1.0, beed::mse(std::span<const PixelPlane>(s.init.channels),
                                    std::span<const PixelPlane>(orig_.channels)),
         size_of(BlockMask(grid_, true), BlockMask(grid_, true), std_params, std_params));

  eed::EEDParams py = std_params;
  eed::EEDParams pc = std_params;
  auto count = [&](const GroupModel& m) {
    extra_solves += m.solves();
    extra_unconverged += m.unconverged();
  };
  auto group_mse = [&](ChannelGroup g, const eed::EEDParams& p, const PixelPlane& guide,
                       const BlockMask& m) {
    const GroupModel model(s.init, orig_, g, p, guide, cfg_.search_solver);
    const double e = model.mse(model.reconstruct(m));
    count(model);
    return e;
  };

  // Luma: mask from the standard parameters, parameter search, then NLBE
  // under the found parameters.
  rep.luma_mse_sparsified = group_mse(ChannelGroup::kLuma, std_params, s.init.y(), ym);
  record("sparsify_luma", ym.density(), rep.luma_mse_sparsified,
         size_of(ym, cm, std_params, std_params));
  rep.luma_mse_params = rep.luma_mse_sparsified;
  if (cfg_.luma_params) {
    py = quantize_params(*cfg_.luma_params);
    rep.luma_mse_params = group_mse(ChannelGroup::kLuma, py, s.init.y(), ym);
  } else if (cfg_.run_param_search) {
    rep.parameter_search.luma = search_params(
        [&](const eed::EEDParams& p) {
          return group_mse(ChannelGroup::kLuma, p, s.init.y(), ym);
        },
        cfg_.params);
    py = rep.parameter_search.luma.params;
    rep.luma_mse_params = rep.parameter_search.luma.best_mse;
  }
  record("params_luma", ym.density(), rep.luma_mse_params, size_of(ym, cm, py, pc));

  const GroupModel luma(s.init, orig_, ChannelGroup::kLuma, py, s.init.y(),
                        cfg_.search_solver);
  rep.luma_mse_nlbe = rep.luma_mse_params;
  if (cfg_.run_nlbe && ym.kept_count() < n) {
    const std::size_t lo = std::min(window_bytes, size_of(ym, cm, py, pc));
    auto r = nlbe(ym, luma, cfg_.nlbe, [&](const BlockMask& m) {
      const std::size_t b = size_of(m, cm, py, pc);
      return b <= budget && b >= lo;
    });
    ym = r.mask;
    rep.luma_mse_nlbe = r.final_mse;
    rep.nlbe_accepted_luma = r.accepted;
  }
  record("nlbe_luma", ym.density(), rep.luma_mse_nlbe, size_of(ym, cm, py, pc));
  const PixelPlane luma_recon = luma.reconstruct(ym).front();
  count(luma);

  // Chroma, guided by the final luma reconstruction.
  rep.chroma_mse_sparsified = group_mse(ChannelGroup::kChroma, std_params, luma_recon, cm);
  record("sparsify_chroma", cm.density(), rep.chroma_mse_sparsified,
         size_of(ym, cm, py, pc));
  rep.chroma_mse_params = rep.chroma_mse_sparsified;
  if (cfg_.chroma_params) {
    pc = quantize_params(*cfg_.chroma_params);
    rep.chroma_mse_params = group_mse(ChannelGroup::kChroma, pc, luma_recon, cm);
  } else if (cfg_.run_param_search) {
    rep.parameter_search.chroma = search_params(
        [&](const eed::EEDParams& p) {
          return group_mse(ChannelGroup::kChroma, p, luma_recon, cm);
        },
        cfg_.params);
    pc = rep.parameter_search.chroma.params;
    rep.chroma_mse_params = rep.parameter_search.chroma.best_mse;
  }
  record("params_chroma", cm.density(), rep.chroma_mse_params, size_of(ym, cm, py, pc));

  const GroupModel chroma(s.init, orig_, ChannelGroup::kChroma, pc, luma_recon,
                          cfg_.search_solver);
  rep.chroma_mse_nlbe = rep.chroma_mse_params;
  if (cfg_.run_nlbe && cm.kept_count() < n) {
    const std::size_t lo = std::min(window_bytes, size_of(ym, cm, py, pc));
    auto r = nlbe(cm, chroma, cfg_.nlbe, [&](const BlockMask& m) {
      const std::size_t b = size_of(ym, m, py, pc);
      return b <= budget && b >= lo;
    });
    cm = r.mask;
    rep.chroma_mse_nlbe = r.final_mse;
    rep.nlbe_accepted_chroma = r.accepted;
  }
  record("nlbe_chroma", cm.density(), rep.chroma_mse_nlbe, size_of(ym, cm, py, pc));
  count(chroma);

  EncodeResult out;
  out.container = build_container(orig_, best.quality, ym, cm, py, pc);
  out.bytes = write_container(out.container);
  const RgbImage decoded = decode_container(out.bytes, cfg_.final_solver);

  rep.bytes = out.bytes.size();
  rep.achieved_ratio = static_cast<double>(raw) / static_cast<double>(rep.bytes);
  rep.within_tolerance =
      std::abs(rep.achieved_ratio - target.target_ratio) <=
      target.tolerance * target.target_ratio + kEps;
  rep.luma_density = ym.density();
  rep.chroma_density = cm.density();
  rep.chroma_above_luma = rep.chroma_density > rep.luma_density;
  rep.luma_params = out.container.luma_params;
  rep.chroma_params = out.container.chroma_params;
  rep.psnr = psnr(orig_rgb_, decoded).value_or(99.0);
  record("final", rep.luma_density,
         beed::mse(std::span<const PixelPlane>(orig_rgb_.channels),
                   std::span<const PixelPlane>(decoded.channels)),
         rep.bytes);

  std::size_t solves_after = 0, unconverged_after = 0;
  for (auto& [q, st] : states_) {
    solves_after += st->luma->model().solves() + st->chroma->model().solves();
    unconverged_after += st->luma->model().unconverged() + st->chroma->model().unconverged();
  }
  rep.search_solves = solves_after - solves_before + extra_solves;
  rep.unconverged_solves = unconverged_after - unconverged_before + extra_unconverged;
  out.report = std::move(rep);
  return out;
}

EncodeResult optimize_for_ratio(const RgbImage& orig, const RatioTarget& target,
                                const RatioSearchConfig& cfg) {
  RatioOptimizer opt(orig, cfg);
  return opt.optimize(target);
}

}  // namespace beed
