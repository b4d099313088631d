#include "edmp/bench.hpp"

#include "edmp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace edmp::bench {

namespace {

std::string fmt(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <typename F>
double mean_over(const std::vector<SceneRecord>& rs, F f) {
  if (rs.empty()) return 0.0;
  double s = 0.0;
  for (const SceneRecord& r : rs) s += f(r);
  return s / static_cast<double>(rs.size());
}

}  // namespace

double BenchReport::success_selected() const {
  return mean_over(records, [](const SceneRecord& r) { return r.success_selected ? 1.0 : 0.0; });
}

double BenchReport::success_any() const {
  return mean_over(records, [](const SceneRecord& r) { return r.success_any ? 1.0 : 0.0; });
}

double BenchReport::acsm() const {
  return mean_over(records, [](const SceneRecord& r) { return r.acsm; });
}

eval::Roughness BenchReport::roughness() const {
  return {mean_over(records, [](const SceneRecord& r) { return r.roughness.ar; }),
          mean_over(records, [](const SceneRecord& r) { return r.roughness.mresg; }),
          mean_over(records, [](const SceneRecord& r) { return r.roughness.rf2w; }),
          mean_over(records, [](const SceneRecord& r) { return r.roughness.rl2w; })};
}

std::vector<double> BenchReport::guide_contribution() const {
  std::vector<double> out(guides);
  for (int g = 0; g < guides; ++g)
    out[g] = mean_over(records, [g](const SceneRecord& r) { return r.guide_flags.empty() ? 0.0 : r.guide_flags[g]; });
  return out;
}

std::vector<double> BenchReport::guide_success_selected() const {
  std::vector<double> out(guides);
  for (int g = 0; g < guides; ++g)
    out[g] = mean_over(records,
                       [g](const SceneRecord& r) { return r.guide_selected.empty() ? 0.0 : r.guide_selected[g]; });
  return out;
}

std::vector<double> BenchReport::guide_acsm() const {
  std::vector<double> out(guides);
  for (int g = 0; g < guides; ++g)
    out[g] = mean_over(records, [g](const SceneRecord& r) {
      return r.guide_acsm.empty() ? std::numeric_limits<double>::quiet_NaN() : r.guide_acsm[g];
    });
  return out;
}

std::vector<double> BenchReport::prefix_success_any() const {
  std::vector<double> out(guides);
  for (int k = 0; k < guides; ++k)
    out[k] = mean_over(records, [k](const SceneRecord& r) {
      if (r.guide_flags.empty()) return 0.0;
      return std::any_of(r.guide_flags.begin(), r.guide_flags.begin() + k + 1, [](bool f) { return f; }) ? 1.0 : 0.0;
    });
  return out;
}

BenchReport bench(const nn::Denoiser& net, const diffusion::Schedule& sched, std::vector<Scene> scenes,
                  const chain::ChainSpec& chain, std::span<const guidance::GuideConfig> guides, const BenchConfig& cfg) {
  std::sort(scenes.begin(), scenes.end(), [](const Scene& a, const Scene& b) { return a.name < b.name; });
  BenchReport report;
  report.guides = static_cast<int>(guides.size());
  for (const Scene& scene : scenes) {
    SceneRecord rec;
    rec.scene = scene.name;
    rec.kind = scene.kind;
    try {
      planner::PlanResult res = planner::plan(net, sched, scene, chain, guides, cfg.plan);
      rec.success_selected = res.success;
      rec.success_any = res.success_any;
      rec.guide_flags = res.guide_success;
      rec.acsm = eval::acsm(res.batch);
      rec.roughness = eval::roughness(res.batch);
      rec.path_length = eval::path_length(res.selected);
      rec.wall_ms = res.wall_ms;
      const auto sizes = planner::partition(cfg.plan.batch, report.guides);
      int first = 0;
      for (int size : sizes) {
        std::span<const Trajectory> sub(res.batch.data() + first, size);
        int best = first;
        for (int i = first; i < first + size; ++i)
          if (planner::selects_before(res.records[i], res.records[best])) best = i;
        rec.guide_selected.push_back(res.records[best].collision_free);
        rec.guide_acsm.push_back(size >= 2 ? eval::acsm(sub) : std::numeric_limits<double>::quiet_NaN());
        first += size;
      }
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

std::string report_csv(const BenchReport& report, bool timing) {
  std::ostringstream os;
  os << "scene,kind,success_selected,success_any,guide_flags,path_length,wall_ms\n";
  for (const SceneRecord& r : report.records) {
    std::string flags;
    for (bool f : r.guide_flags) flags += f ? '1' : '0';
    if (flags.empty()) flags = std::string(report.guides, '0');
    os << r.scene << ',' << r.kind << ',' << r.success_selected << ',' << r.success_any << ',' << flags << ','
       << fmt(r.path_length) << ',' << (timing ? fmt(r.wall_ms, 3) : std::string("0")) << '\n';
  }
  return os.str();
}

std::string summary_csv(const BenchReport& report) {
  std::ostringstream os;
  const eval::Roughness rough = report.roughness();
  os << "metric,value\n";
  os << "scenes," << report.records.size() << '\n';
  os << "errors," << std::count_if(report.records.begin(), report.records.end(),
                                   [](const SceneRecord& r) { return !r.error.empty(); })
     << '\n';
  os << "success_selected," << fmt(report.success_selected()) << '\n';
  os << "success_any," << fmt(report.success_any()) << '\n';
  os << "acsm," << fmt(report.acsm()) << '\n';
  os << "ar," << fmt(rough.ar) << '\n';
  os << "mresg," << fmt(rough.mresg) << '\n';
  os << "rf2w," << fmt(rough.rf2w) << '\n';
  os << "rl2w," << fmt(rough.rl2w) << '\n';
  const auto contrib = report.guide_contribution();
  const auto sel = report.guide_success_selected();
  const auto acsm = report.guide_acsm();
  for (int g = 0; g < report.guides; ++g) {
    os << "guide" << g + 1 << "_contribution," << fmt(contrib[g]) << '\n';
    os << "guide" << g + 1 << "_success_selected," << fmt(sel[g]) << '\n';
    os << "guide" << g + 1 << "_acsm," << fmt(acsm[g]) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const BenchReport& report) {
  std::ostringstream os;
  os << "guides,success_any\n";
  const auto prefix = report.prefix_success_any();
  for (int k = 0; k < report.guides; ++k) os << k + 1 << ',' << fmt(prefix[k]) << '\n';
  return os.str();
}

std::string sweep_svg(const BenchReport& report) {
  const auto prefix = report.prefix_success_any();
  const double w = 480, h = 320, left = 50, right = 20, top = 20, bottom = 40;
  const double pw = w - left - right, ph = h - top - bottom;
  const int n = std::max(1, report.guides);
  auto x = [&](int k) { return left + (n == 1 ? pw / 2 : pw * k / (n - 1)); };
  auto y = [&](double v) { return top + ph * (1.0 - v); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << fmt(y(v) + 4, 1) << "\" font-size=\"11\" text-anchor=\"end\">"
       << fmt(v, 2) << "</text>\n";
  }
  for (int k = 0; k < report.guides; ++k)
    os << "<text x=\"" << fmt(x(k), 1) << "\" y=\"" << top + ph + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
       << k + 1 << "</text>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 6 << "\" font-size=\"12\" text-anchor=\"middle\">"
     << "number of guides</text>\n";
  os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (int k = 0; k < report.guides; ++k) os << (k ? " " : "") << fmt(x(k), 1) << ',' << fmt(y(prefix[k]), 1);
  os << "\"/>\n";
  for (int k = 0; k < report.guides; ++k)
    os << "<circle cx=\"" << fmt(x(k), 1) << "\" cy=\"" << fmt(y(prefix[k]), 1) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace edmp::bench
