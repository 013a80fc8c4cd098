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

// beed: encoder, decoder and rate-distortion harness.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beed/codec.hpp"
#include "beed/container.hpp"
#include "beed/corner_demo.hpp"
#include "beed/errors.hpp"
#include "beed/mask_opt.hpp"
#include "beed/ppm.hpp"

namespace {

namespace fs = std::filesystem;
using namespace beed;

enum ExitCode { kOk = 0, kUsage = 1, kFormat = 2, kUnattainable = 3 };

void add_solver_options(CLI::App* app, eed::SolverConfig& cfg, const std::string& prefix,
                        const std::string& what) {
  app->add_option("--" + prefix + "residual-tol", cfg.residual_tol,
                  "Relative residual tolerance of the " + what + " solver")
      ->capture_default_str();
  app->add_option("--" + prefix + "max-outer", cfg.max_outer,
                  "Tensor rebuilds of the " + what + " solver")
      ->capture_default_str();
  app->add_option("--" + prefix + "max-inner", cfg.max_inner,
                  "CG iteration cap of the " + what + " solver")
      ->capture_default_str();
  app->add_option("--" + prefix + "tensor-refresh", cfg.tensor_refresh,
                  "CG iterations between tensor rebuilds of the " + what + " solver")
      ->capture_default_str();
}

// Options shared by encode and rd-sweep.
struct SearchOptions {
  RatioSearchConfig cfg;
  std::uint64_t seed = 1;
  double tolerance = 0.05;
  std::optional<double> sigma_luma, lambda_luma, sigma_chroma, lambda_chroma;
  bool no_nlbe = false;
  bool no_param_search = false;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Seed of sparsification and NLBE")->capture_default_str();
    app->add_option("--tolerance", tolerance, "Relative ratio tolerance")
        ->capture_default_str();
    app->add_option("--qualities", cfg.qualities, "Baseline JPEG qualities to try")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--alphas", cfg.alphas, "Chroma to luma density ratios to try")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--c-ps", cfg.sparsify.c_ps, "Sparsification candidate fraction")
        ->capture_default_str();
    app->add_option("--r-ps", cfg.sparsify.r_ps, "Sparsification removal fraction")
        ->capture_default_str();
    app->add_option("--c-nlbe", cfg.nlbe.c_nlbe, "NLBE candidate fraction")
        ->capture_default_str();
    app->add_option("--r-nlbe", cfg.nlbe.r_nlbe, "NLBE insertion fraction")
        ->capture_default_str();
    app->add_option("--nlbe-cycles", cfg.nlbe.max_cycles, "NLBE cycle cap")
        ->capture_default_str();
    app->add_option("--nlbe-patience", cfg.nlbe.patience,
                    "Consecutive rejected NLBE cycles before stopping")
        ->capture_default_str();
    app->add_flag("--no-nlbe", no_nlbe, "Skip nonlocal block exchange");
    app->add_option("--sigma-evals", cfg.params.sigma_evals, "Golden-section budget for sigma")
        ->capture_default_str();
    app->add_option("--lambda-evals", cfg.params.lambda_evals,
                    "Golden-section budget for lambda per sigma")
        ->capture_default_str();
    app->add_option("--sigma-min", cfg.params.sigma_min)->capture_default_str();
    app->add_option("--sigma-max", cfg.params.sigma_max)->capture_default_str();
    app->add_option("--lambda-min", cfg.params.lambda_min)->capture_default_str();
    app->add_option("--lambda-max", cfg.params.lambda_max)->capture_default_str();
    app->add_flag("--no-param-search", no_param_search,
                  "Keep the standard EED parameters");
    app->add_option("--sigma-luma", sigma_luma, "Fixed luma sigma (skips its search)");
    app->add_option("--lambda-luma", lambda_luma, "Fixed luma lambda (skips its search)");
    app->add_option("--sigma-chroma", sigma_chroma, "Fixed chroma sigma (skips its search)");
    app->add_option("--lambda-chroma", lambda_chroma,
                    "Fixed chroma lambda (skips its search)");
    add_solver_options(app, cfg.search_solver, "search-", "search");
    add_solver_options(app, cfg.final_solver, "", "final");
  }

  RatioSearchConfig resolve() const {
    RatioSearchConfig c = cfg;
    c.sparsify.seed = seed;
    c.nlbe.seed = seed;
    c.run_nlbe = !no_nlbe;
    c.run_param_search = !no_param_search;
    auto fixed = [](std::optional<double> s, std::optional<double> l)
        -> std::optional<eed::EEDParams> {
      if (!s && !l) return std::nullopt;
      return eed::EEDParams{s.value_or(kStandardParams.sigma),
                            l.value_or(kStandardParams.lambda)};
    };
    c.luma_params = fixed(sigma_luma, lambda_luma);
    c.chroma_params = fixed(sigma_chroma, lambda_chroma);
    validate(c);
    return c;
  }
};

std::string format_psnr(std::optional<double> v) {
  if (!v) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

void print_report(const OptimizationReport& r, std::optional<double> psnr) {
  std::printf("ratio %.3f:1 (target %.3f:1, %zu bytes%s)\n", r.achieved_ratio,
              r.target_ratio, r.bytes, r.within_tolerance ? "" : ", outside tolerance");
  std::printf("psnr %s dB\n", format_psnr(psnr).c_str());
  std::printf("quality %d alpha %.2f\n", r.q_base, r.alpha);
  std::printf("density luma %.4f chroma %.4f\n", r.luma_density, r.chroma_density);
  std::printf("luma sigma %.4f lambda %.4f\n", r.luma_params.sigma, r.luma_params.lambda);
  std::printf("chroma sigma %.4f lambda %.4f\n", r.chroma_params.sigma,
              r.chroma_params.lambda);
  std::printf("luma mse sparsify %.4f params %.4f nlbe %.4f (%d exchanges)\n",
              r.luma_mse_sparsified, r.luma_mse_params, r.luma_mse_nlbe,
              r.nlbe_accepted_luma);
  std::printf("chroma mse sparsify %.4f params %.4f nlbe %.4f (%d exchanges)\n",
              r.chroma_mse_sparsified, r.chroma_mse_params, r.chroma_mse_nlbe,
              r.nlbe_accepted_chroma);
  std::printf("search solves %zu (%zu not converged)\n", r.search_solves,
              r.unconverged_solves);
}

int cmd_encode(const fs::path& in, const fs::path& out, double ratio,
               const SearchOptions& opts, const std::optional<fs::path>& log) {
  const RatioSearchConfig cfg = opts.resolve();
  const RgbImage orig = read_pnm(in).rgb;
  const EncodeResult res = optimize_for_ratio(orig, {ratio, opts.tolerance}, cfg);
  write_file(out, res.bytes);

  const auto stored = read_file(out);
  const RgbImage decoded = decode_container(stored, cfg.final_solver);
  print_report(res.report, psnr(orig, decoded));
  if (log) {
    const std::string csv = stages_csv(res.report);
    write_file(*log, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  }
  return kOk;
}

int cmd_decode(const fs::path& in, const fs::path& out, const eed::SolverConfig& solver) {
  eed::validate(solver);
  DecodeStats stats;
  const RgbImage img = decode_container(read_file(in), solver, &stats);
  write_ppm(out, img);
  if (!stats.converged) {
    std::fprintf(stderr, "warning: solver stopped before reaching its tolerance\n");
  }
  return kOk;
}

int cmd_psnr(const fs::path& a, const fs::path& b) {
  const RgbImage x = read_pnm(a).rgb;
  const RgbImage y = read_pnm(b).rgb;
  if (x.width() != y.width() || x.height() != y.height()) {
    throw InvalidArgument("images differ in size");
  }
  std::printf("%s\n", format_psnr(psnr(x, y)).c_str());
  return kOk;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

int cmd_rd_sweep(const fs::path& in, const std::vector<double>& ratios,
                 const SearchOptions& opts, std::string name,
                 const std::optional<fs::path>& out) {
  const RatioSearchConfig cfg = opts.resolve();
  const RgbImage orig = read_pnm(in).rgb;
  if (name.empty()) name = in.stem().string();
  const auto curve = jpeg_rd_curve(orig);
  RatioOptimizer optimizer(orig, cfg);

  std::ofstream file;
  if (out) {
    file.open(*out);
    if (!file) throw std::runtime_error("cannot write " + out->string());
  }
  std::ostream& os = out ? file : std::cout;
  os << "image,codec,ratio,psnr,error\n";
  char buf[64];
  auto row = [&](const char* codec, double r, std::optional<double> p, const std::string& err) {
    os << name << ',' << codec << ',';
    std::snprintf(buf, sizeof buf, "%.4f", r);
    os << buf << ',';
    if (p) {
      std::snprintf(buf, sizeof buf, "%.4f", *p);
      os << buf;
    }
    os << ',' << (err.empty() ? "" : csv_quote(err)) << '\n';
    os.flush();
  };
  for (double ratio : ratios) {
    double at = ratio;
    try {
      const EncodeResult res = optimizer.optimize({ratio, opts.tolerance});
      at = res.report.achieved_ratio;
      row("beed", at, res.report.psnr, "");
    } catch (const std::exception& e) {
      row("beed", ratio, std::nullopt, e.what());
    }
    try {
      row("jpeg", at, jpeg_psnr_at_ratio(curve, at), "");
    } catch (const std::exception& e) {
      row("jpeg", at, std::nullopt, e.what());
    }
  }
  return kOk;
}

int cmd_corner_demo(const CornerDemoConfig& cfg, const fs::path& dir) {
  const CornerDemoResult r = run_corner_demo(cfg);
  fs::create_directories(dir);
  write_pgm(dir / "corner_original.pgm", r.original);
  write_pgm(dir / "corner_mask.pgm", r.mask_panel);
  write_pgm(dir / "corner_reconstruction.pgm", r.reconstruction);

  const int nx = r.mask.grid().nx();
  std::printf("kept blocks (index row col corner):\n");
  for (int k : r.kept) {
    const bool corner = std::binary_search(r.corners.begin(), r.corners.end(), k);
    std::printf("  %3d %2d %2d %s\n", k, k / nx, k % nx, corner ? "yes" : "no");
  }
  std::printf("corner hits %d/%zu (after sparsification %d)\n", r.corner_hits,
              r.corners.size(), r.sparsified_hits);
  std::printf("sigma %.4f lambda %.4f\n", r.params.sigma, r.params.lambda);
  std::printf("psnr %.4f dB\n", r.psnr);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-EED block-based edge-enhancing diffusion image codec"};
  app.require_subcommand(1);

  fs::path enc_in, enc_out;
  double enc_ratio = 0.0;
  std::optional<fs::path> enc_log;
  SearchOptions enc_opts;
  auto* enc = app.add_subcommand("encode", "Encode a P6/P5 image at a target ratio");
  enc->add_option("--in,input", enc_in, "Input image")->required();
  enc->add_option("--out", enc_out, "Output container")->required();
  enc->add_option("--ratio", enc_ratio, "Target compression ratio X (for X:1)")->required();
  enc->add_option("--log", enc_log, "Write per-stage CSV here");
  enc_opts.attach(enc);

  fs::path dec_in, dec_out;
  eed::SolverConfig dec_solver;
  auto* dec = app.add_subcommand("decode", "Decode a container to P6");
  dec->add_option("--in,input", dec_in, "Input container")->required();
  dec->add_option("--out", dec_out, "Output image")->required();
  add_solver_options(dec, dec_solver, "", "decoder");

  fs::path psnr_a, psnr_b;
  auto* ps = app.add_subcommand("psnr", "PSNR between two images (inf when identical)");
  ps->add_option("a", psnr_a)->required();
  ps->add_option("b", psnr_b)->required();

  fs::path rd_in;
  std::vector<double> rd_ratios;
  std::string rd_name;
  std::optional<fs::path> rd_out;
  SearchOptions rd_opts;
  auto* rd = app.add_subcommand("rd-sweep", "B-EED and JPEG PSNR over target ratios");
  rd->add_option("--in,input", rd_in, "Input image")->required();
  rd->add_option("--ratios", rd_ratios, "Target ratios")->delimiter(',')->required();
  rd->add_option("--name", rd_name, "Image column value (default: input stem)");
  rd->add_option("--out", rd_out, "CSV output (default: stdout)");
  rd_opts.attach(rd);

  CornerDemoConfig cd;
  fs::path cd_dir = ".";
  bool cd_no_params = false, cd_no_nlbe = false;
  auto* corner = app.add_subcommand("corner-demo", "Sparsify the T-shaped corner test image");
  corner->add_option("--seed", cd.seed)->capture_default_str();
  corner->add_option("--out-dir", cd_dir, "Directory for the three PGM panels")
      ->capture_default_str();
  corner->add_option("--quality", cd.quality, "Baseline JPEG quality")->capture_default_str();
  corner->add_option("--kept", cd.kept_blocks, "Blocks to keep")->capture_default_str();
  corner->add_option("--c-ps", cd.c_ps)->capture_default_str();
  corner->add_option("--r-ps", cd.r_ps)->capture_default_str();
  corner->add_flag("--no-param-search", cd_no_params);
  corner->add_option("--sigma-evals", cd.param_search.sigma_evals)->capture_default_str();
  corner->add_option("--lambda-evals", cd.param_search.lambda_evals)->capture_default_str();
  corner->add_flag("--no-nlbe", cd_no_nlbe);
  corner->add_option("--c-nlbe", cd.nlbe.c_nlbe)->capture_default_str();
  corner->add_option("--r-nlbe", cd.nlbe.r_nlbe)->capture_default_str();
  corner->add_option("--nlbe-cycles", cd.nlbe.max_cycles)->capture_default_str();
  corner->add_option("--nlbe-patience", cd.nlbe.patience)->capture_default_str();
  add_solver_options(corner, cd.search_solver, "search-", "search");
  add_solver_options(corner, cd.final_solver, "", "final");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*enc) return cmd_encode(enc_in, enc_out, enc_ratio, enc_opts, enc_log);
    if (*dec) return cmd_decode(dec_in, dec_out, dec_solver);
    if (*ps) return cmd_psnr(psnr_a, psnr_b);
    if (*rd) return cmd_rd_sweep(rd_in, rd_ratios, rd_opts, rd_name, rd_out);
    if (*corner) {
      cd.optimize_params = !cd_no_params;
      cd.run_nlbe = !cd_no_nlbe;
      return cmd_corner_demo(cd, cd_dir);
    }
  } catch (const UnattainableTarget& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    std::printf("closest achievable ratio %.3f:1\n", e.closest());
    return kUnattainable;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kFormat;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
