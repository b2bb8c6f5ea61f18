#include "hypercube/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

#include "json.hpp"

namespace hypercube {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad floating-point field '" + std::string(s) + "'", line);
  return v;
}

long long parse_ll(std::string_view s, int line) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad integer field '" + std::string(s) + "'", line);
  return v;
}

std::uint64_t parse_u64(std::string_view s, int line) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad unsigned field '" + std::string(s) + "'", line);
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

void write_records(const std::string& path, const std::vector<SweepRecord>& rs) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << kRecordsHeader << '\n';
  for (const SweepRecord& r : rs) {
    os << r.order << ',' << r.loop_id << ',' << r.canonical_hash << ','
       << fmt_double(r.n_v_norm) << ',' << fmt_double(r.H_min) << ','
       << fmt_double(r.B_min) << ',' << fmt_double(r.R_min) << ','
       << fmt_double(r.H_norm) << ',' << fmt_double(r.B_norm) << ','
       << fmt_double(r.R_norm) << ',' << fmt_double(r.feas_residual) << ','
       << (r.converged ? 1 : 0) << ',' << r.restarts_used << ',' << r.seed
       << '\n';
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

std::vector<SweepRecord> read_records(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line)) throw ParseError("missing header row", 1);
  if (line != kRecordsHeader)
    throw ParseError("unexpected header '" + line + "'", 1);

  std::vector<SweepRecord> rs;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 14)
      throw ParseError("expected 14 fields, got " + std::to_string(f.size()),
                       lineno);
    SweepRecord r;
    r.order = static_cast<int>(parse_ll(f[0], lineno));
    r.loop_id = static_cast<int>(parse_ll(f[1], lineno));
    r.canonical_hash = parse_u64(f[2], lineno);
    r.n_v_norm = parse_double(f[3], lineno);
    r.H_min = parse_double(f[4], lineno);
    r.B_min = parse_double(f[5], lineno);
    r.R_min = parse_double(f[6], lineno);
    r.H_norm = parse_double(f[7], lineno);
    r.B_norm = parse_double(f[8], lineno);
    r.R_norm = parse_double(f[9], lineno);
    r.feas_residual = parse_double(f[10], lineno);
    r.converged = parse_ll(f[11], lineno) != 0;
    r.restarts_used = static_cast<int>(parse_ll(f[12], lineno));
    r.seed = parse_u64(f[13], lineno);
    rs.push_back(r);
  }
  return rs;
}

namespace {

std::string meta_path(const std::string& out_path) {
  return out_path + ".meta.json";
}

void write_meta(const std::string& out_path, std::uint64_t fingerprint,
                const SweepConfig& cfg) {
  nlohmann::json j;
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(fingerprint));
  j["config_fingerprint"] = fp;
  j["orders"] = cfg.orders;
  j["sample_count"] = cfg.sample_count;
  j["enum_seed"] = cfg.enum_seed;
  j["restarts"] = cfg.opt.restarts;
  j["max_steps"] = cfg.opt.max_steps;
  j["step_size"] = cfg.opt.step_size;
  j["feas_tol"] = cfg.opt.feas_tol;
  j["seed"] = cfg.opt.seed;
  std::ofstream os(meta_path(out_path));
  os << j.dump(2) << '\n';
}

std::uint64_t sweep_fingerprint(const SweepConfig& cfg) {
  // Sampling parameters feed the loop population, so they are part of the
  // result identity alongside the optimizer config.
  std::uint64_t h = opt_config_fingerprint(cfg.opt);
  h = fnv1a(&cfg.sample_count, sizeof cfg.sample_count, h);
  h = fnv1a(&cfg.enum_seed, sizeof cfg.enum_seed, h);
  return h;
}

}  // namespace

SweepSummary run_sweep(const SweepConfig& cfg) {
  cfg.opt.validate();
  if (cfg.orders.empty()) throw Error("sweep: no orders requested");
  for (int o : cfg.orders)
    if (o < 2 || o > 8) throw EnumRange("sweep orders must lie in [2, 8]");
  if (cfg.workers < 1) throw Error("sweep: workers must be positive");

  const std::uint64_t fingerprint = sweep_fingerprint(cfg);

  // Load resumable records keyed by (order, canonical hash).
  std::map<std::pair<int, std::uint64_t>, SweepRecord> have;
  if (!cfg.out_path.empty() && std::filesystem::exists(cfg.out_path)) {
    const std::string mpath = meta_path(cfg.out_path);
    if (!std::filesystem::exists(mpath))
      throw StaleResults("records at '" + cfg.out_path +
                         "' lack a meta file; refusing to resume");
    std::ifstream is(mpath);
    nlohmann::json j;
    is >> j;
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx",
                  static_cast<unsigned long long>(fingerprint));
    if (j.value("config_fingerprint", "") != fp)
      throw StaleResults(
          "records at '" + cfg.out_path +
          "' were produced under a different config; use a fresh path");
    for (const SweepRecord& r : read_records(cfg.out_path))
      have[{r.order, r.canonical_hash}] = r;
  }

  struct Task {
    CayleyTable table;
    int order;
    std::uint64_t hash;
  };
  std::vector<Task> tasks;
  SweepSummary summary;
  std::set<std::pair<int, std::uint64_t>> planned;

  for (int order : cfg.orders) {
    std::vector<CayleyTable> loops;
    if (order <= 6) {
      loops = enumerate_loops_upto_iso(order);
    } else {
      loops = sample_random_loops(order, cfg.sample_count,
                                  cfg.enum_seed + static_cast<std::uint64_t>(order));
    }
    for (CayleyTable& t : loops) {
      const std::uint64_t h = table_hash(t.n(), t.cells());
      planned.insert({order, h});
      const auto it = have.find({order, h});
      if (it != have.end()) {
        summary.records.push_back(it->second);
        ++summary.resumed;
      } else {
        tasks.push_back(Task{std::move(t), order, h});
      }
    }
  }

  std::vector<SweepRecord> fresh(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      const Task& task = tasks[i];
      OptConfig oc = cfg.opt;
      oc.seed = splitmix64(cfg.opt.seed ^ task.hash ^
                           (static_cast<std::uint64_t>(task.order) << 56));
      const MinimizeOutcome mo = minimize(task.table, oc);

      SweepRecord r;
      r.order = task.order;
      r.canonical_hash = task.hash;
      r.n_v_norm = assoc_report(task.table).n_v_norm;
      r.H_min = mo.best.H;
      r.B_min = mo.best.B;
      r.R_min = mo.best.R;
      const double n2 = static_cast<double>(task.order) * task.order;
      r.H_norm = r.H_min / n2;
      r.B_norm = r.B_min / n2;
      r.R_norm = r.R_min / n2;
      r.feas_residual = mo.best.feas_residual;
      r.converged = mo.best.converged;
      r.restarts_used = static_cast<int>(mo.runs.size());
      r.seed = oc.seed;
      fresh[i] = r;
    }
  };

  const int nthreads = std::min(
      cfg.workers, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  summary.computed = static_cast<int>(fresh.size());
  for (SweepRecord& r : fresh) summary.records.push_back(std::move(r));

  const auto by_order_hash = [](const SweepRecord& a, const SweepRecord& b) {
    if (a.order != b.order) return a.order < b.order;
    return a.canonical_hash < b.canonical_hash;
  };

  // Persist the union: records loaded from disk but outside the current
  // orders plan survive a narrower rerun instead of being dropped.
  std::vector<SweepRecord> persisted = summary.records;
  for (const auto& [key, rec] : have)
    if (!planned.count(key)) persisted.push_back(rec);

  for (auto* list : {&summary.records, &persisted}) {
    std::sort(list->begin(), list->end(), by_order_hash);
    int id = 0;
    int prev_order = -1;
    for (SweepRecord& r : *list) {
      if (r.order != prev_order) {
        prev_order = r.order;
        id = 0;
      }
      r.loop_id = id++;
    }
  }

  if (!cfg.out_path.empty()) {
    write_records(cfg.out_path, persisted);
    write_meta(cfg.out_path, fingerprint, cfg);
  }
  return summary;
}

FitResult fit_scaling(const std::vector<SweepRecord>& rs, bool fixed_intercepts) {
  std::vector<const SweepRecord*> used;
  for (const SweepRecord& r : rs)
    if (r.converged) used.push_back(&r);

  std::vector<double> xs;
  for (const SweepRecord* r : used) xs.push_back(r->n_v_norm);
  std::sort(xs.begin(), xs.end());
  const int distinct = static_cast<int>(std::unique(xs.begin(), xs.end()) - xs.begin());
  if (used.size() < 2 || distinct < 2)
    throw InsufficientData("need converged records at two or more distinct "
                           "violation levels");

  FitResult fit;
  fit.n_points = static_cast<int>(used.size());
  fit.fixed_intercept_mode = fixed_intercepts;

  // series index: 0 = R_norm, 1 = B_norm, 2 = H_norm
  auto value = [](const SweepRecord& r, int series) {
    return series == 0 ? r.R_norm : series == 1 ? r.B_norm : r.H_norm;
  };
  const double pinned[3] = {0.0, 3.0, 3.0};

  double slopes[3], inters[3];
  for (int s = 0; s < 3; ++s) {
    if (fixed_intercepts) {
      double sxx = 0.0, sxy = 0.0;
      for (const SweepRecord* r : used) {
        const double x = r->n_v_norm;
        sxx += x * x;
        sxy += x * (value(*r, s) - pinned[s]);
      }
      slopes[s] = sxy / sxx;
      inters[s] = pinned[s];
    } else {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      const double m = static_cast<double>(used.size());
      for (const SweepRecord* r : used) {
        const double x = r->n_v_norm, y = value(*r, s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      slopes[s] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      inters[s] = (sy - slopes[s] * sx) / m;
    }
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    for (const SweepRecord* r : used) mean += value(*r, s);
    mean /= static_cast<double>(used.size());
    for (const SweepRecord* r : used) {
      const double y = value(*r, s);
      const double yhat = inters[s] + slopes[s] * r->n_v_norm;
      ss_res += (y - yhat) * (y - yhat);
      ss_tot += (y - mean) * (y - mean);
    }
    fit.r_squared[s] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  }

  fit.c_R = slopes[0];
  fit.c_B = -slopes[1];  // B_norm decreases in n_v_norm
  fit.c_H = slopes[2];
  fit.intercept_R = inters[0];
  fit.intercept_B = inters[1];
  fit.intercept_H = inters[2];
  fit.c_ratio = fit.c_B / fit.c_R;
  return fit;
}

// ---------------------------------------------------------------------------
// SVG rendering (no plotting dependency; fixed formatting keeps the output
// byte-stable).

namespace {

struct Panel {
  const char* title;
  int series;  // 0=R,1=B,2=H, matching fit_scaling order
};

std::string fmt2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

const char* order_color(int order) {
  switch (order) {
    case 5: return "#1f77b4";
    case 6: return "#d62728";
    case 7: return "#2ca02c";
    case 8: return "#9467bd";
    default: return "#7f7f7f";
  }
}

}  // namespace

std::string render_scatter_svg(const std::vector<SweepRecord>& rs,
                               const FitResult* fit) {
  if (rs.empty()) throw Error("render_scatter_svg: no records");

  const int pw = 360, ph = 300, ml = 52, mt = 34, mb = 44, gap = 28;
  const int width = 3 * pw + 2 * gap + ml + 16;
  const int height = ph + mt + mb;

  double xmax = 0.0;
  for (const SweepRecord& r : rs) xmax = std::max(xmax, r.n_v_norm);
  if (xmax <= 0.0) xmax = 1.0;
  xmax *= 1.06;

  const Panel panels[3] = {{"H/n^2 vs violations", 2},
                           {"R/n^2 vs violations", 0},
                           {"B/n^2 vs violations", 1}};

  auto series_value = [](const SweepRecord& r, int s) {
    return s == 0 ? r.R_norm : s == 1 ? r.B_norm : r.H_norm;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::vector<int> orders;
  for (const SweepRecord& r : rs)
    if (std::find(orders.begin(), orders.end(), r.order) == orders.end())
      orders.push_back(r.order);
  std::sort(orders.begin(), orders.end());

  for (int p = 0; p < 3; ++p) {
    const int x0 = ml + p * (pw + gap);
    const int y0 = mt;
    const int s = panels[p].series;

    double ymin = 1e300, ymax = -1e300;
    for (const SweepRecord& r : rs) {
      ymin = std::min(ymin, series_value(r, s));
      ymax = std::max(ymax, series_value(r, s));
    }
    if (s != 0) {  // keep the pinned intercept 3 in frame for H and B
      ymin = std::min(ymin, 3.0);
      ymax = std::max(ymax, 3.0);
    } else {
      ymin = std::min(ymin, 0.0);
    }
    double pad = (ymax - ymin) * 0.08;
    if (pad <= 0.0) pad = 0.5;
    ymin -= pad;
    ymax += pad;

    auto px = [&](double x) { return x0 + x / xmax * pw; };
    auto py = [&](double y) { return y0 + (ymax - y) / (ymax - ymin) * ph; };

    svg += "<rect x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y0) +
           "\" width=\"" + std::to_string(pw) + "\" height=\"" +
           std::to_string(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + std::to_string(x0 + pw / 2) + "\" y=\"" +
           std::to_string(y0 - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" +
           panels[p].title + "</text>\n";

    // axis ticks: 5 on each axis
    for (int i = 0; i <= 4; ++i) {
      const double xv = xmax * i / 4.0;
      const double yv = ymin + (ymax - ymin) * i / 4.0;
      svg += "<line x1=\"" + fmt2(px(xv)) + "\" y1=\"" +
             std::to_string(y0 + ph) + "\" x2=\"" + fmt2(px(xv)) + "\" y2=\"" +
             std::to_string(y0 + ph + 5) + "\" stroke=\"#333\"/>\n";
      svg += "<text x=\"" + fmt2(px(xv)) + "\" y=\"" +
             std::to_string(y0 + ph + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\">" +
             fmt2(xv) + "</text>\n";
      svg += "<line x1=\"" + std::to_string(x0 - 5) + "\" y1=\"" +
             fmt2(py(yv)) + "\" x2=\"" + std::to_string(x0) + "\" y2=\"" +
             fmt2(py(yv)) + "\" stroke=\"#333\"/>\n";
      svg += "<text x=\"" + std::to_string(x0 - 8) + "\" y=\"" +
             fmt2(py(yv) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">" +
             fmt2(yv) + "</text>\n";
    }

    if (fit) {
      const double pinned[3] = {fit->intercept_R, fit->intercept_B,
                                fit->intercept_H};
      const double slope =
          s == 0 ? fit->c_R : s == 1 ? -fit->c_B : fit->c_H;
      const double yA = pinned[s], yB = pinned[s] + slope * xmax;
      svg += "<line x1=\"" + fmt2(px(0.0)) + "\" y1=\"" + fmt2(py(yA)) +
             "\" x2=\"" + fmt2(px(xmax)) + "\" y2=\"" + fmt2(py(yB)) +
             "\" stroke=\"#555\" stroke-dasharray=\"5,4\"/>\n";
      const char* name = s == 0 ? "c_R = " : s == 1 ? "c_B = " : "c_H = ";
      const double cval = s == 0 ? fit->c_R : s == 1 ? fit->c_B : fit->c_H;
      svg += "<text x=\"" + std::to_string(x0 + 10) + "\" y=\"" +
             std::to_string(y0 + 18) +
             "\" font-family=\"sans-serif\" font-size=\"12\">" + name +
             fmt3(cval) + "</text>\n";
    }

    for (const SweepRecord& r : rs) {
      svg += "<circle cx=\"" + fmt2(px(r.n_v_norm)) + "\" cy=\"" +
             fmt2(py(series_value(r, s))) + "\" r=\"3\" fill=\"" +
             order_color(r.order) + "\" fill-opacity=\"0.75\"/>\n";
    }
  }

  // legend
  int lx = ml;
  for (int o : orders) {
    svg += "<circle cx=\"" + std::to_string(lx) + "\" cy=\"" +
           std::to_string(height - 12) + "\" r=\"4\" fill=\"" +
           order_color(o) + "\"/>\n";
    svg += "<text x=\"" + std::to_string(lx + 8) + "\" y=\"" +
           std::to_string(height - 8) +
           "\" font-family=\"sans-serif\" font-size=\"12\">order " +
           std::to_string(o) + "</text>\n";
    lx += 80;
  }

  svg += "</svg>\n";
  return svg;
}

void emit_scatter_svg(const std::vector<SweepRecord>& rs, const FitResult* fit,
                      const std::string& path) {
  const std::string svg = render_scatter_svg(rs, fit);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << svg;
  if (!os) throw Error("write failed for '" + path + "'");
}

}  // namespace hypercube
