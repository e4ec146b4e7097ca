#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bench.hpp"

namespace {

using bdl::bench::BenchConfig;
using bdl::bench::BenchResult;
using bdl::bench::DatasetSpec;

void add_dataset_options(CLI::App* cmd, DatasetSpec* spec,
                         std::string* synthetic, std::string* format) {
  cmd->add_option("--data", spec->path, "point file to load");
  cmd->add_option("--synthetic", *synthetic,
                  "generate the dataset instead: uniform or visualvar")
      ->check(CLI::IsMember({"uniform", "visualvar"}));
  cmd->add_option("--n", spec->n, "synthetic point count");
  cmd->add_option("--d", spec->d, "synthetic dimension");
  cmd->add_option("--data-seed", spec->seed, "synthetic generator seed");
  cmd->add_option("--format", *format, "point file format: binary or text")
      ->check(CLI::IsMember({"binary", "text"}));
  cmd->add_option("--vv-step", spec->vv.step,
                  "visualvar step size (default domain/1000)");
  cmd->add_option("--vv-jump-prob", spec->vv.jump_prob,
                  "visualvar teleport probability");
  cmd->add_option("--vv-domain", spec->vv.domain,
                  "visualvar domain side (default sqrt(n))");
}

void finish_dataset(DatasetSpec* spec, const std::string& synthetic,
                    const std::string& format) {
  spec->format =
      format == "text" ? bdl::FileFormat::Text : bdl::FileFormat::Binary;
  if (!spec->path.empty()) {
    spec->kind = DatasetSpec::Kind::File;
    return;
  }
  if (synthetic.empty()) {
    throw CLI::ValidationError("dataset", "pass --data or --synthetic");
  }
  if (spec->n == 0 || spec->d == 0) {
    throw CLI::ValidationError("dataset", "--synthetic needs --n and --d");
  }
  spec->kind = synthetic == "uniform" ? DatasetSpec::Kind::Uniform
                                      : DatasetSpec::Kind::VisualVar;
}

void add_common_options(CLI::App* cmd, BenchConfig* cfg, std::string* impl,
                        std::string* split, std::string* out) {
  cmd->add_option("--impl", *impl, "implementation: bdl, b1 or b2")
      ->check(CLI::IsMember({"bdl", "b1", "b2"}));
  cmd->add_option("--split", *split, "split heuristic: object or spatial")
      ->check(CLI::IsMember({"object", "spatial"}));
  cmd->add_option("--threads", cfg->threads, "thread cap (0 = all cores)");
  cmd->add_option("--seed", cfg->seed, "harness seed (shuffles)");
  cmd->add_option("--runs", cfg->runs, "measured runs per configuration")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--warmup", cfg->warmup, "warm-up runs")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--buffer-cap", cfg->buffer_cap, "BDL buffer capacity X");
  cmd->add_option("--leaf-cap", cfg->leaf_cap, "leaf coarsening factor");
  cmd->add_flag("--no-bloom", [cfg](std::int64_t) { cfg->use_bloom = false; },
                "disable the per-tree bloom filters");
  cmd->add_flag("--validate", cfg->validate,
                "check results against a brute-force oracle before timing");
  cmd->add_option("--validate-cap", cfg->validate_cap,
                  "largest n the oracle will run on");
  cmd->add_option("--out", *out, "write results as CSV to this path");
}

void deliver(const std::vector<BenchResult>& rows, const std::string& out) {
  if (out.empty()) {
    bdl::bench::emit_csv(rows, std::cout);
  } else {
    bdl::bench::emit_csv(rows, out);
    std::fprintf(stderr, "wrote %zu rows to %s\n", rows.size(), out.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch-dynamic k-d tree benchmark harness"};
  app.require_subcommand(1);

  BenchConfig cfg;
  std::string impl = "bdl", split = "object", out, synthetic, format = "binary";

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a synthetic point file");
  std::string gen_kind = "uniform", gen_out, gen_format = "binary";
  DatasetSpec gen_spec;
  gen->add_option("--kind", gen_kind, "uniform or visualvar")
      ->check(CLI::IsMember({"uniform", "visualvar"}));
  gen->add_option("--n", gen_spec.n, "point count")->required();
  gen->add_option("--d", gen_spec.d, "dimension")->required();
  gen->add_option("--seed", gen_spec.seed, "generator seed");
  gen->add_option("--vv-step", gen_spec.vv.step, "visualvar step size");
  gen->add_option("--vv-jump-prob", gen_spec.vv.jump_prob,
                  "visualvar teleport probability");
  gen->add_option("--vv-domain", gen_spec.vv.domain, "visualvar domain side");
  gen->add_option("--format", gen_format, "binary or text")
      ->check(CLI::IsMember({"binary", "text"}));
  gen->add_option("--out", gen_out, "output path")->required();

  // ---- measured commands ----
  auto* build = app.add_subcommand("build", "time single-batch construction");
  auto* insert = app.add_subcommand(
      "insert", "time batched insertion from an empty tree");
  auto* del = app.add_subcommand(
      "delete", "time batched deletion from a full tree");
  auto* knn = app.add_subcommand("knn", "time k-NN queries over a built tree");
  auto* mixed = app.add_subcommand(
      "mixed", "interleaved inserts, deletes and k-NN (INS0..DEL2 protocol)");

  std::vector<double> batch_pcts;
  std::vector<std::uint64_t> batch_sizes;
  std::vector<int> ks;
  std::pair<int, int> k_sweep{0, -1};
  for (CLI::App* cmd : {build, insert, del, knn, mixed}) {
    add_dataset_options(cmd, &cfg.dataset, &synthetic, &format);
    add_common_options(cmd, &cfg, &impl, &split, &out);
  }
  for (CLI::App* cmd : {insert, del}) {
    cmd->add_option("--batch-pct", batch_pcts,
                    "batch size as a fraction of n (repeatable)")
        ->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--batch-size", batch_sizes,
                    "batch size in points (repeatable, overrides --batch-pct)");
  }
  knn->add_option("--k", ks, "neighbor count (repeatable)");
  knn->add_option("--k-sweep", k_sweep, "inclusive k range, e.g. --k-sweep 2 11");
  knn->add_option("--query-pct", cfg.query_pct,
                  "fraction of the dataset used as queries")
      ->check(CLI::Range(1e-9, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_spec.kind = gen_kind == "uniform" ? DatasetSpec::Kind::Uniform
                                            : DatasetSpec::Kind::VisualVar;
      const bdl::RawPoints pts = bdl::bench::load_dataset(gen_spec);
      bdl::write_points(gen_out, pts,
                        gen_format == "text" ? bdl::FileFormat::Text
                                             : bdl::FileFormat::Binary);
      std::fprintf(stderr, "wrote %zu points (d=%u) to %s\n", pts.size(),
                   pts.dim, gen_out.c_str());
      return 0;
    }

    finish_dataset(&cfg.dataset, synthetic, format);
    cfg.impl = bdl::bench::parse_impl(impl);
    cfg.heuristic = bdl::bench::parse_heuristic(split);
    if (!batch_pcts.empty()) cfg.batch_pcts = batch_pcts;
    cfg.batch_sizes = batch_sizes;
    if (k_sweep.second >= k_sweep.first && k_sweep.second > 0) {
      for (int k = k_sweep.first; k <= k_sweep.second; ++k) ks.push_back(k);
    }
    if (!ks.empty()) cfg.ks = ks;

    std::vector<BenchResult> rows;
    if (build->parsed()) {
      rows.push_back(bdl::bench::run_build(cfg));
    } else if (insert->parsed()) {
      rows = bdl::bench::run_insert(cfg);
    } else if (del->parsed()) {
      rows = bdl::bench::run_delete(cfg);
    } else if (knn->parsed()) {
      rows = bdl::bench::run_knn(cfg);
    } else if (mixed->parsed()) {
      rows = bdl::bench::run_mixed(cfg);
    }
    deliver(rows, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
