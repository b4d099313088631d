#include "edmp/cli.hpp"

#include "edmp/bench.hpp"
#include "edmp/checkpoint.hpp"
#include "edmp/dataset.hpp"
#include "edmp/denoiser.hpp"
#include "edmp/gradcheck.hpp"
#include "edmp/kernels.hpp"
#include "edmp/planner.hpp"
#include "edmp/rng.hpp"
#include "edmp/train.hpp"
#include "edmp/worldgen.hpp"
#include "io_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace edmp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad flags, unreadable or malformed inputs.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
auto load(const std::string& what, F f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int default_threads() {
  if (const char* env = std::getenv("EDMP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return kernels::thread_count();
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string chain_path;
};

void add_common(CLI::App* app, Common& c, bool needs_out = true) {
  app->add_option("--seed", c.seed, "Seed for all randomness")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (default: EDMP_THREADS or all cores)");
  auto* out = app->add_option("--out", c.out, "Output directory");
  if (needs_out) out->required();
  app->add_option("--chain", c.chain_path, "Chain file (default: built-in desk3 arm)")->check(CLI::ExistingFile);
}

chain::ChainSpec load_chain(const Common& c) {
  if (c.chain_path.empty()) return chain::default_chain();
  return load("chain " + c.chain_path, [&] { return chain::read_chain(c.chain_path); });
}

fs::path prepare_out(const Common& c) {
  fs::path out(c.out);
  fs::create_directories(out);
  return out;
}

void write_config(const fs::path& out, json cfg, const Common& c) {
  cfg["seed"] = c.seed;
  cfg["chain"] = c.chain_path.empty() ? "builtin:desk3" : c.chain_path;
  io_util::write_text(out / "config.json", cfg.dump(2) + "\n");
}

std::vector<guidance::GuideConfig> load_guides(const std::string& path) {
  if (path.empty()) return guidance::default_guides();
  return load("guides " + path, [&] { return guidance::read_guides(path); });
}

ckpt::Checkpoint load_ckpt(const std::string& path) {
  return load("checkpoint " + path, [&] { return ckpt::load_checkpoint(path); });
}

// ---------------------------------------------------------------------------

struct GenScenes {
  Common common;
  std::vector<std::string> kinds;
  int count = 25;
  std::string config;
};

int gen_scenes(const GenScenes& o, std::ostream& out, std::ostream& err) {
  const chain::ChainSpec chain = load_chain(o.common);
  const worldgen::WorldgenConfig wcfg =
      o.config.empty() ? worldgen::WorldgenConfig{} : load("config " + o.config, [&] {
        return worldgen::read_config(o.config);
      });
  std::vector<worldgen::SceneKind> kinds;
  if (o.kinds.empty()) kinds.assign(worldgen::kAllKinds.begin(), worldgen::kAllKinds.end());
  for (const auto& k : o.kinds) kinds.push_back(load("--kinds", [&] { return worldgen::parse_kind(k); }));
  if (o.count < 1) throw UsageError("--count must be >= 1");

  const int total = static_cast<int>(kinds.size()) * o.count;
  std::vector<Scene> scenes(total);
  std::vector<std::string> errors(total);
  kernels::for_each_index(total, kernels::Exec::parallel, [&](int idx) {
    const auto kind = kinds[idx / o.count];
    const int i = idx % o.count;
    try {
      scenes[idx] = worldgen::gen_scene(
          kind, chain, rng::derive(o.common.seed, rng::Purpose::scene, static_cast<std::uint64_t>(kind), i), wcfg);
      char name[64];
      std::snprintf(name, sizeof name, "%s-%03d", worldgen::to_string(kind).c_str(), i);
      scenes[idx].name = name;
    } catch (const std::runtime_error& e) {
      errors[idx] = e.what();
    }
  });

  const fs::path dir = prepare_out(o.common);
  int failed = 0;
  for (int idx = 0; idx < total; ++idx) {
    if (!errors[idx].empty()) {
      err << "gen-scenes: " << errors[idx] << '\n';
      ++failed;
      continue;
    }
    worldgen::write_scene(scenes[idx], dir / (scenes[idx].name + ".json"));
  }
  json cfg{{"command", "gen-scenes"}, {"count", o.count}, {"worldgen", json::parse(worldgen::config_to_json(wcfg))}};
  json names = json::array();
  for (auto k : kinds) names.push_back(worldgen::to_string(k));
  cfg["kinds"] = names;
  write_config(dir, cfg, o.common);
  out << "wrote " << total - failed << " scenes to " << dir.string() << '\n';
  return failed ? kDomainFailure : kOk;
}

// ---------------------------------------------------------------------------

struct GenData {
  Common common;
  int count = 10000;
  std::string config;
};

int gen_data(const GenData& o, std::ostream& out) {
  const chain::ChainSpec chain = load_chain(o.common);
  const worldgen::WorldgenConfig wcfg =
      o.config.empty() ? worldgen::WorldgenConfig{} : load("config " + o.config, [&] {
        return worldgen::read_config(o.config);
      });
  if (o.count < 1) throw UsageError("--count must be >= 1");
  data::Dataset ds = worldgen::gen_dataset(chain, o.count, o.common.seed, wcfg);
  const fs::path dir = prepare_out(o.common);
  data::write_dataset(ds, dir / "dataset.bin");
  write_config(dir,
               {{"command", "gen-data"}, {"count", o.count}, {"worldgen", json::parse(worldgen::config_to_json(wcfg))}},
               o.common);
  out << "wrote " << o.count << " trajectories to " << (dir / "dataset.bin").string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct Train {
  Common common;
  std::string data;
  int T = 64;
  double beta_max = 0.02;
  int steps = 1000;
  int batch = 256;
  double lr = 2e-4;
  std::vector<int> widths{32, 64, 128};
  int kernel = 5;
  bool no_condition = false;
  int log_every = 100;
};

int train_cmd(const Train& o, std::ostream& out) {
  data::Dataset ds = load("dataset " + o.data, [&] { return data::read_dataset(o.data); });
  const diffusion::Schedule sched = load("schedule", [&] { return diffusion::make_schedule(o.T, o.beta_max); });
  if (o.widths.size() != 3) throw UsageError("--widths takes three values");
  if (o.steps < 0 || o.batch < 1 || !(o.lr > 0.0)) throw UsageError("--steps, --batch and --lr must be positive");
  nn::DenoiserConfig arch;
  arch.m = ds.meta.m;
  arch.h = ds.meta.h;
  arch.widths = {o.widths[0], o.widths[1], o.widths[2]};
  arch.kernel = o.kernel;
  load("architecture", [&] { return nn::Denoiser(arch).parameter_count(); });

  train::TrainConfig tc;
  tc.batch = o.batch;
  tc.steps = o.steps;
  tc.learning_rate = o.lr;
  tc.seed = o.common.seed;
  tc.condition = !o.no_condition;
  tc.on_step = [&](int step, double loss) {
    if (o.log_every > 0 && (step % o.log_every == 0 || step == o.steps))
      out << "step " << step << " loss " << loss << '\n';
  };
  train::TrainResult res = train::train(ds, sched, arch, tc);

  const fs::path dir = prepare_out(o.common);
  ckpt::CheckpointMeta meta{arch, o.T, o.beta_max, o.common.seed, o.steps, tc.condition};
  ckpt::save_checkpoint(res.net, meta, dir / "model.ckpt");
  std::ostringstream loss;
  loss << "step,loss\n";
  for (std::size_t i = 0; i < res.loss_history.size(); ++i) loss << i + 1 << ',' << fmt17(res.loss_history[i]) << '\n';
  io_util::write_text(dir / "loss.csv", loss.str());
  write_config(dir,
               {{"command", "train"},
                {"data", o.data},
                {"T", o.T},
                {"beta_max", o.beta_max},
                {"steps", o.steps},
                {"batch", o.batch},
                {"lr", o.lr},
                {"arch", arch.descriptor()},
                {"condition", tc.condition}},
               o.common);
  out << "wrote " << (dir / "model.ckpt").string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct Plan {
  Common common;
  std::string ckpt;
  std::string scene;
  std::string guides;
  std::string attach;
  int batch = 120;
  int substeps = 8;
  double multimodality = 0.0;
};

std::string trajectory_csv(const Trajectory& tau, const std::string& header) {
  std::ostringstream os;
  os << "# " << header << '\n';
  for (Eigen::Index k = 0; k < tau.rows(); ++k) {
    for (Eigen::Index j = 0; j < tau.cols(); ++j) os << (j ? "," : "") << fmt17(tau(k, j));
    os << '\n';
  }
  return os.str();
}

int plan_cmd(const Plan& o, std::ostream& out) {
  chain::ChainSpec chain = load_chain(o.common);
  if (!o.attach.empty()) {
    chain::Attachment att = load("attachment " + o.attach, [&] { return chain::read_attachment(o.attach); });
    chain = chain::attach_object(chain, att.half_extents, att.offset);
  }
  ckpt::Checkpoint ck = load_ckpt(o.ckpt);
  const Scene scene = load("scene " + o.scene, [&] { return worldgen::read_scene(o.scene, &chain); });
  const auto guides = load_guides(o.guides);
  const diffusion::Schedule sched = diffusion::make_schedule(ck.meta.T, ck.meta.beta_max);
  planner::PlanConfig pc;
  pc.batch = o.batch;
  pc.seed = o.common.seed;
  pc.substeps = o.substeps;
  pc.multimodality = o.multimodality;
  if (o.batch < static_cast<int>(guides.size())) throw UsageError("--batch must be at least the number of guides");
  if (o.substeps < 1) throw UsageError("--substeps must be >= 1");
  planner::PlanResult res =
      load("plan", [&] { return planner::plan(ck.net, sched, scene, chain, guides, pc); });

  const fs::path dir = prepare_out(o.common);
  std::ostringstream header;
  header << "scene=" << scene.name << " T=" << ck.meta.T << " seed=" << o.common.seed << " batch=" << o.batch
         << " guides=" << guides.size() << " selected=" << res.selected_index << " guide=" << res.records[res.selected_index].guide + 1
         << " success=" << res.success << " success_any=" << res.success_any
         << " j_swept=" << fmt17(res.records[res.selected_index].j_swept) << " h=" << res.selected.rows()
         << " m=" << res.selected.cols();
  io_util::write_text(dir / "trajectory.csv", trajectory_csv(res.selected, header.str()));
  std::ostringstream batch;
  batch << "index,guide,j_swept,collision_free,fallback\n";
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    batch << i << ',' << r.guide + 1 << ',' << fmt17(r.j_swept) << ',' << r.collision_free << ',' << r.fallback << '\n';
  }
  io_util::write_text(dir / "batch.csv", batch.str());
  write_config(dir,
               {{"command", "plan"},
                {"ckpt", o.ckpt},
                {"scene", o.scene},
                {"guides", o.guides.empty() ? json("builtin:default") : json(o.guides)},
                {"guide_list", json::parse(guidance::guides_to_json(guides))},
                {"attach", o.attach},
                {"batch", o.batch},
                {"substeps", o.substeps},
                {"multimodality", o.multimodality}},
               o.common);
  out << (res.success ? "success" : "no collision-free trajectory selected") << " (" << scene.name << ", selected "
      << res.selected_index << ")\n";
  return res.success ? kOk : kDomainFailure;
}

// ---------------------------------------------------------------------------

struct Bench {
  Common common;
  std::vector<std::string> ckpts;
  std::string scenes;
  std::string guides;
  int batch = 120;
  int substeps = 8;
  double multimodality = 0.0;
  bool timing = false;
  bool svg = false;
};

void write_report(const fs::path& dir, const bench::BenchReport& report, const Bench& o) {
  fs::create_directories(dir);
  io_util::write_text(dir / "report.csv", bench::report_csv(report, o.timing));
  io_util::write_text(dir / "summary.csv", bench::summary_csv(report));
  io_util::write_text(dir / "sweep.csv", bench::sweep_csv(report));
  if (o.svg) io_util::write_text(dir / "sweep.svg", bench::sweep_svg(report));
}

int bench_cmd(const Bench& o, std::ostream& out) {
  const chain::ChainSpec chain = load_chain(o.common);
  if (!fs::is_directory(o.scenes)) throw UsageError("--scenes: not a directory: " + o.scenes);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(o.scenes))
    if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "config.json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("--scenes: no scene files in " + o.scenes);
  std::vector<Scene> scenes;
  for (const auto& f : files)
    scenes.push_back(load("scene " + f.string(), [&] { return worldgen::read_scene(f, &chain); }));
  const auto guides = load_guides(o.guides);
  if (o.batch < static_cast<int>(guides.size())) throw UsageError("--batch must be at least the number of guides");
  if (o.substeps < 1) throw UsageError("--substeps must be >= 1");

  bench::BenchConfig bc;
  bc.plan.batch = o.batch;
  bc.plan.seed = o.common.seed;
  bc.plan.substeps = o.substeps;
  bc.plan.multimodality = o.multimodality;

  const fs::path dir = prepare_out(o.common);
  std::ostringstream sweep;
  sweep << "T,ckpt,success_selected,success_any\n";
  for (std::size_t c = 0; c < o.ckpts.size(); ++c) {
    ckpt::Checkpoint ck = load_ckpt(o.ckpts[c]);
    const diffusion::Schedule sched = diffusion::make_schedule(ck.meta.T, ck.meta.beta_max);
    bench::BenchReport report = bench::bench(ck.net, sched, scenes, chain, guides, bc);
    const fs::path sub = o.ckpts.size() == 1 ? dir : dir / ("ckpt" + std::to_string(c + 1) + "-T" + std::to_string(ck.meta.T));
    write_report(sub, report, o);
    sweep << ck.meta.T << ',' << o.ckpts[c] << ',' << fmt17(report.success_selected()) << ','
          << fmt17(report.success_any()) << '\n';
    out << o.ckpts[c] << ": success_selected " << report.success_selected() << " success_any "
        << report.success_any() << " over " << report.records.size() << " scenes\n";
  }
  if (o.ckpts.size() > 1) io_util::write_text(dir / "timestep_sweep.csv", sweep.str());
  write_config(dir,
               {{"command", "bench"},
                {"ckpt", o.ckpts},
                {"scenes", o.scenes},
                {"scene_count", files.size()},
                {"guides", o.guides.empty() ? json("builtin:default") : json(o.guides)},
                {"guide_list", json::parse(guidance::guides_to_json(guides))},
                {"batch", o.batch},
                {"substeps", o.substeps},
                {"multimodality", o.multimodality},
                {"timing", o.timing},
                {"svg", o.svg}},
               o.common);
  return kOk;
}

// ---------------------------------------------------------------------------

struct GradCheck {
  Common common;
  double tol = 1e-4;
  double net_tol = 1e-3;
  int cases = 100;
};

int gradcheck_cmd(const GradCheck& o, std::ostream& out) {
  const chain::ChainSpec chain = load_chain(o.common);
  if (o.cases < 1) throw UsageError("--cases must be >= 1");
  auto results = gradcheck::run_all(chain, o.cases, o.common.seed, o.tol, o.net_tol);
  std::ostringstream csv;
  csv << "suite,cases,failures,max_rel_err,tol\n";
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.cases - r.failures << "/" << r.cases
        << " within " << r.tol << " (max rel err " << r.max_rel_err << ")\n";
    csv << r.name << ',' << r.cases << ',' << r.failures << ',' << fmt17(r.max_rel_err) << ',' << r.tol << '\n';
    ok = ok && r.passed();
  }
  if (!o.common.out.empty()) {
    const fs::path dir = prepare_out(o.common);
    io_util::write_text(dir / "gradcheck.csv", csv.str());
    write_config(dir, {{"command", "gradcheck"}, {"tol", o.tol}, {"net_tol", o.net_tol}, {"cases", o.cases}},
                 o.common);
  }
  return ok ? kOk : kDomainFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble-of-costs guided diffusion motion planner", "edmp"};
  app.require_subcommand(1);

  GenScenes gs;
  auto* c_gs = app.add_subcommand("gen-scenes", "Generate benchmark scenes");
  add_common(c_gs, gs.common);
  c_gs->add_option("--kinds", gs.kinds, "Archetypes (tabletop, shelf, cubby, sphere_field)")->delimiter(',');
  c_gs->add_option("--count", gs.count, "Scenes per archetype")->capture_default_str();
  c_gs->add_option("--config", gs.config, "Worldgen config override")->check(CLI::ExistingFile);

  GenData gd;
  auto* c_gd = app.add_subcommand("gen-data", "Generate the prior trajectory dataset");
  add_common(c_gd, gd.common);
  c_gd->add_option("--count", gd.count, "Number of trajectories")->capture_default_str();
  c_gd->add_option("--config", gd.config, "Worldgen config override")->check(CLI::ExistingFile);

  Train tr;
  auto* c_tr = app.add_subcommand("train", "Train the denoiser");
  add_common(c_tr, tr.common);
  c_tr->add_option("--data", tr.data, "Dataset file")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--T", tr.T, "Diffusion steps")->capture_default_str();
  c_tr->add_option("--beta-max", tr.beta_max, "Final variance of the linear schedule")->capture_default_str();
  c_tr->add_option("--steps", tr.steps, "Optimiser steps")->capture_default_str();
  c_tr->add_option("--batch", tr.batch, "Samples per step")->capture_default_str();
  c_tr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  c_tr->add_option("--widths", tr.widths, "Channel widths of the three levels")->delimiter(',')->capture_default_str();
  c_tr->add_option("--kernel", tr.kernel, "Convolution kernel size")->capture_default_str();
  c_tr->add_flag("--no-condition", tr.no_condition, "Train without endpoint conditioning");
  c_tr->add_option("--log-every", tr.log_every, "Print the loss every N steps (0: never)")->capture_default_str();

  Plan pl;
  auto* c_pl = app.add_subcommand("plan", "Plan one scene");
  add_common(c_pl, pl.common);
  c_pl->add_option("--ckpt", pl.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  c_pl->add_option("--scene", pl.scene, "Scene file")->required()->check(CLI::ExistingFile);
  c_pl->add_option("--guides", pl.guides, "Guide list (default: built-in ensemble)")->check(CLI::ExistingFile);
  c_pl->add_option("--attach", pl.attach, "Object held by the last link")->check(CLI::ExistingFile);
  c_pl->add_option("--batch", pl.batch, "Trajectories per plan")->capture_default_str();
  c_pl->add_option("--substeps", pl.substeps, "Oracle interpolation substeps")->capture_default_str();
  c_pl->add_option("--multimodality", pl.multimodality, "Diversity gradient multiplier (0: off)")
      ->capture_default_str();

  Bench be;
  auto* c_be = app.add_subcommand("bench", "Benchmark a scene directory");
  add_common(c_be, be.common);
  c_be->add_option("--ckpt", be.ckpts, "Checkpoint(s); several give a timestep sweep")
      ->required()
      ->check(CLI::ExistingFile);
  c_be->add_option("--scenes", be.scenes, "Scene directory")->required();
  c_be->add_option("--guides", be.guides, "Guide list (default: built-in ensemble)")->check(CLI::ExistingFile);
  c_be->add_option("--batch", be.batch, "Trajectories per plan")->capture_default_str();
  c_be->add_option("--substeps", be.substeps, "Oracle interpolation substeps")->capture_default_str();
  c_be->add_option("--multimodality", be.multimodality, "Diversity gradient multiplier (0: off)")
      ->capture_default_str();
  c_be->add_flag("--timing", be.timing, "Record wall time in report.csv");
  c_be->add_flag("--svg", be.svg, "Write sweep.svg");

  GradCheck gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference gradient suites");
  add_common(c_gc, gc.common, false);
  c_gc->add_option("--tol", gc.tol, "Relative tolerance for the cost gradients")->capture_default_str();
  c_gc->add_option("--net-tol", gc.net_tol, "Relative tolerance for the denoiser gradient")->capture_default_str();
  c_gc->add_option("--cases", gc.cases, "Random cases per cost suite")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "edmp: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsageError;
  }

  auto* sub = app.get_subcommands().front();
  Common* common = sub == c_gs ? &gs.common
                   : sub == c_gd ? &gd.common
                   : sub == c_tr ? &tr.common
                   : sub == c_pl ? &pl.common
                   : sub == c_be ? &be.common
                                 : &gc.common;
  kernels::set_thread_count(common->threads > 0 ? common->threads : default_threads());

  try {
    if (sub == c_gs) return gen_scenes(gs, out, err);
    if (sub == c_gd) return gen_data(gd, out);
    if (sub == c_tr) return train_cmd(tr, out);
    if (sub == c_pl) return plan_cmd(pl, out);
    if (sub == c_be) return bench_cmd(be, out);
    return gradcheck_cmd(gc, out);
  } catch (const UsageError& e) {
    err << "edmp " << sub->get_name() << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "edmp " << sub->get_name() << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "edmp " << sub->get_name() << ": " << e.what() << '\n';
    return kDomainFailure;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace edmp::cli
