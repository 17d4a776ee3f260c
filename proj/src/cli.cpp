#include "kpzlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "kpzlab/distributions.hpp"
#include "kpzlab/duality.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

template <typename Config, typename Fn>
void for_each_field(Config& c, Fn&& fn) {
  fn("seed", c.seed);
  fn("n", c.n);
  fn("size", c.size);
  fn("k", c.k);
  fn("replicas", c.replicas);
  fn("sizes", c.sizes);
  fn("scales", c.scales);
  fn("gaps", c.gaps);
  fn("count", c.count);
  fn("dual_count", c.dual_count);
  fn("rw_steps", c.rw_steps);
  fn("rw_scales", c.rw_scales);
  fn("rw_replicas", c.rw_replicas);
  fn("grid", c.grid);
  fn("spacing", c.spacing);
  fn("sources", c.sources);
  fn("heights", c.heights);
  fn("tri_sources", c.tri_sources);
  fn("tri_spacing", c.tri_spacing);
  fn("tri_height", c.tri_height);
  fn("tri_k_factor", c.tri_k_factor);
  fn("tri_replicas", c.tri_replicas);
  fn("m_values", c.m_values);
  fn("interval_i", c.interval_i);
  fn("interval_j", c.interval_j);
}

const std::map<std::string, std::vector<std::string>>& used_fields() {
  static const std::map<std::string, std::vector<std::string>> table{
      {"simulate", {"seed", "size"}},
      {"duality", {"seed", "size", "k"}},
      {"dimension", {"seed", "n", "scales", "replicas", "rw_steps", "rw_scales", "rw_replicas"}},
      {"exponent", {"seed", "sizes", "replicas"}},
      {"holder", {"seed", "n", "gaps"}},
      {"occupation", {"seed", "n", "replicas", "m_values", "interval_i", "interval_j"}},
      {"busemann", {"seed", "size", "k", "count", "dual_count"}},
      {"highways", {"seed", "n", "size", "grid", "replicas"}},
      {"frame", {"seed", "n", "grid", "replicas"}},
      {"one-ended",
       {"seed", "spacing", "sources", "heights", "replicas", "tri_sources", "tri_spacing", "tri_height",
        "tri_k_factor", "tri_replicas"}},
      {"export", {"seed", "size", "k"}},
  };
  return table;
}

bool uses(const ExperimentConfig& c, const std::string& key) {
  const auto& keys = used_fields().at(c.command);
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

// ---------------------------------------------------------------------------
// JSON field conversion

bool assign(const nlohmann::json& v, std::uint64_t& out) {
  if (v.is_number_unsigned()) {
    out = v.get<std::uint64_t>();
    return true;
  }
  if (v.is_string()) {
    out = parse_seed(v.get<std::string>());
    return true;
  }
  return false;
}

bool assign(const nlohmann::json& v, int& out) {
  if (!v.is_number_integer()) return false;
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(x);
  return true;
}

bool assign(const nlohmann::json& v, std::int64_t& out) {
  if (!v.is_number_integer()) return false;
  out = v.get<std::int64_t>();
  return true;
}

bool assign(const nlohmann::json& v, double& out) {
  if (!v.is_number()) return false;
  out = v.get<double>();
  return true;
}

template <typename T>
bool assign(const nlohmann::json& v, std::vector<T>& out) {
  if (!v.is_array()) return false;
  std::vector<T> values(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!assign(v[k], values[k])) return false;
  out = std::move(values);
  return true;
}

template <typename T>
const char* type_name() {
  if constexpr (std::is_same_v<T, std::uint64_t>) return "an unsigned integer or a decimal/hex string";
  if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::int64_t>) return "an integer";
  if constexpr (std::is_same_v<T, std::vector<int>>) return "a list of integers";
  if constexpr (std::is_same_v<T, std::vector<double>>) return "a list of numbers";
  return "a value";
}

std::string locate(const std::string& source, const std::string& text, const std::string& key) {
  if (text.empty()) return source;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return source;
  return source + ":" + std::to_string(1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : os_(path, std::ios::binary) {
    if (!os_) throw Error(Errc::configuration, "cannot write " + path.string());
    os_ << header << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((os_ << (first ? "" : ",") << num(values), first = false), ...);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::configuration, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

ordered_json window_json(const Window& w) {
  if (w.empty()) return nullptr;
  return {{"lo", {w.lo.i, w.lo.j}}, {"hi", {w.hi.i, w.hi.j}}};
}

ordered_json certificate_json(const StabilizationCertificate& c) {
  return {{"direction", to_string(c.direction)},
          {"K", c.K},
          {"K_doubled", c.K_doubled},
          {"requested", window_json(c.requested)},
          {"certified", window_json(c.certified)},
          {"certified_lo", c.empty() ? ordered_json(nullptr) : ordered_json{c.certified.lo.i, c.certified.lo.j}},
          {"certified_hi", c.empty() ? ordered_json(nullptr) : ordered_json{c.certified.hi.i, c.certified.hi.j}},
          {"tree_certified", window_json(c.tree_certified)},
          {"busemann_certified", window_json(c.busemann_certified)}};
}

ordered_json assertion_json(const Assertion& a) {
  return {{"name", a.name},         {"relation", a.relation},   {"expected", a.expected},
          {"observed", a.observed}, {"tolerance", a.tolerance}, {"passed", a.passed}};
}

// the root has no step and gets no row
const char* step_name(Step s) {
  switch (s) {
    case Step::Right: return "R";
    case Step::Up: return "U";
    case Step::Left: return "L";
    case Step::Down: return "D";
    case Step::None: break;
  }
  return nullptr;
}

void write_path(const fs::path& file, const RescaledPath& path) {
  Csv csv(file, "t,x");
  for (Eigen::Index a = 0; a < path.size(); ++a) csv.row(path.times(a), path.xs(a));
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// ---------------------------------------------------------------------------
// Experiments

struct Context {
  const ExperimentConfig& config;
  fs::path dir;
  int threads;
  Outcome outcome;

  ordered_json& report() { return outcome.report; }
  void check(Assertion a) { outcome.assertions.push_back(std::move(a)); }
};

RescaledPath unit_geodesic(std::uint64_t seed, int n) {
  return rescale_path(streamed_geodesic(seed, {0, 0}, {n, n}).path, ScalingParams(n));
}

void run_simulate(Context& ctx) {
  const auto& c = ctx.config;
  const Window w = Window::square(c.size);
  const WeightField X = WeightField::generate(c.seed, w);
  const auto table = passage_table(X.values, w.lo, Orientation::from_source, w);
  const LatticePath path = backtrack(table, w.hi);
  const double weight = path_weight(X.values, path);
  const auto uniqueness = restriction_uniqueness_check(X.values, path);

  Csv weights(ctx.dir / "weights.csv", "i,j,weight");
  Csv passage(ctx.dir / "passage.csv", "i,j,value");
  w.for_each([&](LatticePoint p) {
    weights.row(p.i, p.j, X.values(p));
    passage.row(p.i, p.j, table.values(p));
  });
  {
    std::ofstream os(ctx.dir / "steps.csv", std::ios::binary);
    os << "i,j,step\n";
    w.for_each([&](LatticePoint p) {
      Step s = Step::None;
      if (!(p == w.lo)) s = table(p - e2) >= table(p - e1) ? Step::Down : Step::Left;
      if (s != Step::None) os << p.i << ',' << p.j << ',' << step_name(s) << '\n';
    });
  }
  Csv geo(ctx.dir / "geodesic.csv", "m,x");
  for (const RotatedCoord& r : path.rotated()) geo.row(r.m(), r.x());

  ctx.report()["window"] = window_json(w);
  ctx.report()["passage_time"] = table.values(w.hi);
  ctx.report()["geodesic_weight"] = weight;
  ctx.report()["geodesic_ties"] = path.tie_count;
  ctx.report()["uniqueness_segments"] = uniqueness.segments_checked;
  ctx.check(equal("geodesic_weight_equals_passage_time", table.values(w.hi), weight));
  ctx.check(equal("geodesic_ties", 0, path.tie_count));
  ctx.check(equal("restriction_uniqueness_violations", 0, static_cast<double>(uniqueness.violations)));
}

void run_duality(Context& ctx) {
  const auto& c = ctx.config;
  const Window w = Window::centered(c.size);
  auto& r = ctx.report();
  r["seed"] = c.seed;
  r["n"] = c.size;
  r["window"] = window_json(w);
  r["K"] = c.k;
  try {
    const DualityReport d = verify_duality(c.seed, w, c.k);
    r["certified"] = window_json(d.certified);
    r["match_down"] = d.match_down;
    r["match_up"] = d.match_up;
    r["compared_down"] = d.compared_down;
    r["compared_up"] = d.compared_up;
    r["dual_mean"] = d.dual_summary ? ordered_json(d.dual_summary->mean) : ordered_json(nullptr);
    r["dual_ks"] = d.dual_summary ? ordered_json(d.dual_summary->ks_distance) : ordered_json(nullptr);
    r["ties"] = d.ties;
    r["certificates"] = {{"primal", certificate_json(d.primal_certificate)},
                         {"dual", certificate_json(d.dual_certificate)}};
    ctx.check(equal("match_down", 1, d.match_down));
    ctx.check(equal("match_up", 1, d.match_up));
    ctx.check(equal("ties", 0, static_cast<double>(d.ties)));
  } catch (const InsufficientCertification& e) {
    r["certified"] = nullptr;
    r["error"] = e.what();
    r["certificates"] = {{"primal", certificate_json(e.primal())}, {"dual", certificate_json(e.dual())}};
    ctx.outcome.status = 3;
  }
}

void run_dimension(Context& ctx) {
  const auto& c = ctx.config;
  const auto scales = dyadic_scales(c.scales);
  std::vector<BoxCountResult> geo(static_cast<std::size_t>(c.replicas));
  parallel_for(geo.size(), ctx.threads, [&](std::size_t r) {
    geo[r] = box_dimension(unit_geodesic(derive_seed(c.seed, r), c.n), scales);
  });
  const auto rw_scales = dyadic_scales(c.rw_scales);
  std::vector<BoxCountResult> rw(static_cast<std::size_t>(c.rw_replicas));
  parallel_for(rw.size(), ctx.threads, [&](std::size_t r) {
    rw[r] = box_dimension(random_walk_path(derive_seed(~c.seed, r), c.rw_steps), rw_scales);
  });

  auto dims = [](const std::vector<BoxCountResult>& v) {
    std::vector<double> d;
    for (const auto& b : v) d.push_back(b.fitted_dimension);
    return d;
  };
  const auto gd = dims(geo);
  const auto rd = dims(rw);
  {
    Csv csv(ctx.dir / "boxcount.csv", "scale,count");
    for (std::size_t k = 0; k < geo[0].scales.size(); ++k) csv.row(geo[0].scales[k], geo[0].counts[k]);
  }
  {
    Csv csv(ctx.dir / "rw_boxcount.csv", "scale,count");
    for (std::size_t k = 0; k < rw[0].scales.size(); ++k) csv.row(rw[0].scales[k], rw[0].counts[k]);
  }
  {
    std::ofstream os(ctx.dir / "dimensions.csv", std::ios::binary);
    os << "kind,replica,dimension\n";
    for (std::size_t r = 0; r < gd.size(); ++r) os << "geodesic," << r << ',' << num(gd[r]) << '\n';
    for (std::size_t r = 0; r < rd.size(); ++r) os << "random_walk," << r << ',' << num(rd[r]) << '\n';
  }
  write_path(ctx.dir / "path.csv", unit_geodesic(derive_seed(c.seed, 0), c.n));

  auto& rep = ctx.report();
  rep["fit"] = {{"fitted_dimension", geo[0].fitted_dimension},
                {"fit_stderr", geo[0].fit_stderr},
                {"scale_range_used", {geo[0].scale_range_used.first, geo[0].scale_range_used.second}}};
  rep["dimension_mean"] = mean(gd);
  rep["dimension_stderr"] = standard_error(gd);
  rep["random_walk_mean"] = mean(rd);
  rep["random_walk_stderr"] = standard_error(rd);
  ctx.check(within("geodesic_dimension", 1.33, mean(gd), 0.10));
  ctx.check(within("random_walk_dimension", 1.50, mean(rd), 0.05));
}

void run_exponent(Context& ctx) {
  const auto& c = ctx.config;
  if (c.replicas < 32) throw Error(Errc::invalid_config, "exponent needs at least 32 replicas per size");
  std::vector<std::vector<double>> displacements;
  for (int L : c.sizes) displacements.push_back(transversal_displacements(c.seed, L, c.replicas, ctx.threads));
  const ExponentFit fit = fluctuation_fit(c.sizes, displacements);

  double flip_ks = 0;
  Csv d(ctx.dir / "displacements.csv", "size,x");
  for (std::size_t k = 0; k < c.sizes.size(); ++k) {
    std::vector<double> flipped;
    for (double x : displacements[k]) {
      d.row(c.sizes[k], x);
      flipped.push_back(-x);
    }
    flip_ks = std::max(flip_ks, ks_two_sample(displacements[k], flipped));
  }
  Csv csv(ctx.dir / "exponent.csv", "size,rms");
  for (std::size_t k = 0; k < fit.sizes.size(); ++k) csv.row(fit.sizes[k], fit.statistics[k]);

  ctx.report()["fitted_exponent"] = fit.fitted_exponent;
  ctx.report()["fit_stderr"] = fit.fit_stderr;
  ctx.report()["flip_ks_max"] = flip_ks;
  ctx.check(within("wandering_exponent", 0.667, fit.fitted_exponent, 0.05));
}

void run_holder(Context& ctx) {
  const auto& c = ctx.config;
  const RescaledPath path = unit_geodesic(c.seed, c.n);
  const ExponentFit fit = holder_exponent(path, c.gaps);
  Csv csv(ctx.dir / "holder.csv", "gap,max_increment");
  for (std::size_t k = 0; k < fit.sizes.size(); ++k) csv.row(fit.sizes[k], fit.statistics[k]);
  write_path(ctx.dir / "path.csv", path);
  ctx.report()["fitted_exponent"] = fit.fitted_exponent;
  ctx.report()["fit_stderr"] = fit.fit_stderr;
  ctx.check(within("holder_exponent", 0.67, fit.fitted_exponent, 0.07));
}

void run_occupation(Context& ctx) {
  const auto& c = ctx.config;
  std::vector<RescaledPath> paths(static_cast<std::size_t>(c.replicas));
  parallel_for(paths.size(), ctx.threads,
               [&](std::size_t r) { paths[r] = unit_geodesic(derive_seed(c.seed, r), c.n); });
  const Interval I{c.interval_i[0], c.interval_i[1]};
  const Interval J{c.interval_j[0], c.interval_j[1]};
  const OccupationResult res = occupation_exceedance(paths, I, J, c.m_values);
  Csv csv(ctx.dir / "occupation.csv", "m,frequency");
  for (std::size_t k = 0; k < res.M.size(); ++k) csv.row(res.M[k], res.frequency[k]);

  int violations = 0;
  for (std::size_t a = 0; a < res.M.size(); ++a)
    for (std::size_t b = 0; b < res.M.size(); ++b)
      if (res.M[a] < res.M[b] && res.frequency[a] < res.frequency[b]) ++violations;
  ctx.report()["frequencies"] = res.frequency;
  ctx.check(equal("monotonicity_violations", 0, violations));
  for (std::size_t k = 0; k < res.M.size(); ++k)
    if (res.M[k] == 10) ctx.check(below("frequency_at_M_10", 0.05, res.frequency[k]));
}

void run_busemann(Context& ctx) {
  const auto& c = ctx.config;
  const auto z = pooled_busemann_increments(c.seed, c.size, c.k, static_cast<std::size_t>(c.count), ctx.threads);
  const IncrementLaw law = increment_law(z);
  {
    Csv csv(ctx.dir / "increments.csv", "z");
    for (double v : z) csv.row(v);
  }
  const auto patches = pooled_dual_weights(c.seed, c.size, c.k, static_cast<std::size_t>(c.dual_count), ctx.threads);
  const DualWeightSummary dual = dual_weight_distribution(patches);
  std::int64_t nonpositive = 0;
  for (const auto& g : patches) nonpositive += (g.array() <= 0).count();

  auto& rep = ctx.report();
  rep["increments"] = {{"count", law.count}, {"mean", law.mean}, {"variance", law.variance}, {"ks", law.ks_distance}};
  rep["dual_weights"] = {{"count", dual.count},         {"patches", patches.size()}, {"mean", dual.mean},
                         {"variance", dual.variance},   {"ks", dual.ks_distance},    {"lag1_e1", dual.lag1_e1},
                         {"lag1_e2", dual.lag1_e2},     {"min", dual.min_value}};
  ctx.check(within("increment_mean", 0, law.mean, 0.05));
  ctx.check(within("increment_variance", 8, law.variance, 0.4));
  ctx.check(below("increment_ks", 0.01, law.ks_distance));
  ctx.check(equal("dual_nonpositive", 0, static_cast<double>(nonpositive)));
  ctx.check(within("dual_mean", 1, dual.mean, 0.02));
  ctx.check(within("dual_variance", 1, dual.variance, 0.05));
  ctx.check(below("dual_ks", 0.01, dual.ks_distance));
  ctx.check(below("dual_lag1", 0.02, std::max(std::abs(dual.lag1_e1), std::abs(dual.lag1_e2))));
}

void run_highways(Context& ctx) {
  const auto& c = ctx.config;
  const int T = c.n;
  const int hw = c.size;
  const Interval strip{T / 3.0, 2.0 * T / 3.0};
  struct Row {
    HighwayCensus coarse, fine;
  };
  std::vector<Row> rows(static_cast<std::size_t>(c.replicas));
  parallel_for(rows.size(), ctx.threads, [&](std::size_t r) {
    const WeightField X = WeightField::generate(derive_seed(c.seed, r), Window{{-hw, -hw}, {T + hw, T + hw}, 0});
    rows[r].coarse = highway_census(X.values, 0, T, strip, endpoint_grid(hw, c.grid), endpoint_grid(hw, c.grid));
    rows[r].fine =
        highway_census(X.values, 0, T, strip, endpoint_grid(hw, 2 * c.grid), endpoint_grid(hw, 2 * c.grid));
  });
  Csv csv(ctx.dir / "highways.csv", "replica,grid,pairs,distinct");
  double growth = 0;
  double ratio = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    csv.row(r, c.grid, rows[r].coarse.pairs, rows[r].coarse.distinct);
    csv.row(r, 2 * c.grid, rows[r].fine.pairs, rows[r].fine.distinct);
    growth = std::max(growth, static_cast<double>(rows[r].fine.distinct - rows[r].coarse.distinct) /
                                  static_cast<double>(rows[r].coarse.distinct));
    ratio = std::max(ratio, static_cast<double>(rows[r].fine.distinct) / static_cast<double>(rows[r].fine.pairs));
  }
  ctx.report()["max_growth"] = growth;
  ctx.report()["max_distinct_fraction"] = ratio;
  ctx.check(below("refinement_growth", 0.10, growth));
  ctx.check(at_most("distinct_per_pair", 1, ratio));
}

void run_frame(Context& ctx) {
  const auto& c = ctx.config;
  std::vector<std::pair<FrameScale, FrameScale>> rows(static_cast<std::size_t>(c.replicas));
  parallel_for(rows.size(), ctx.threads, [&](std::size_t r) {
    rows[r] = {rescaled_frame_coverage(derive_seed(c.seed, r), c.n, c.grid),
               rescaled_frame_coverage(derive_seed(c.seed, r), 4 * c.n, c.grid)};
  });
  Csv csv(ctx.dir / "frame.csv", "replica,n,fraction");
  double largest = 0;
  int not_decreasing = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    csv.row(r, rows[r].first.n, rows[r].first.fraction);
    csv.row(r, rows[r].second.n, rows[r].second.fraction);
    largest = std::max({largest, rows[r].first.fraction, rows[r].second.fraction});
    not_decreasing += !(rows[r].second.fraction < rows[r].first.fraction);
  }
  ctx.report()["max_fraction"] = largest;
  ctx.check(below("covered_fraction", 1, largest));
  ctx.check(equal("replicas_not_decreasing", 0, not_decreasing));
}

void run_one_ended(Context& ctx) {
  const auto& c = ctx.config;
  const auto fractions = portrait_one_endedness(c.seed, c.heights, c.sources, c.spacing, c.replicas, ctx.threads);
  {
    Csv csv(ctx.dir / "oneended.csv", "height,fraction");
    for (std::size_t k = 0; k < fractions.size(); ++k) csv.row(c.heights[k], fractions[k]);
  }
  int decreases = 0;
  for (std::size_t k = 1; k < fractions.size(); ++k) decreases += fractions[k] < fractions[k - 1];
  ctx.report()["fractions"] = fractions;
  ctx.check(equal("fraction_decreases", 0, decreases));
  for (std::size_t k = 0; k < fractions.size(); ++k)
    if (c.heights[k] == 8 * c.spacing) ctx.check(at_least("coalesced_fraction_at_8_spacings", 0.9, fractions[k]));

  struct Row {
    std::size_t h = 0, h2 = 0;
    bool merged = false, certified = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(c.tri_replicas));
  parallel_for(rows.size(), ctx.threads, [&](std::size_t r) {
    const auto a = trace_top_interfaces(derive_seed(c.seed, r), c.tri_height, c.tri_sources, c.tri_spacing,
                                        c.tri_k_factor);
    const auto b = trace_top_interfaces(derive_seed(c.seed, r), 2 * c.tri_height, c.tri_sources, c.tri_spacing,
                                        c.tri_k_factor);
    rows[r] = {a.trifurcations.size(), b.trifurcations.size(), a.all_merged(),
               a.certificate.certified == a.window && b.certificate.certified == b.window};
  });
  Csv csv(ctx.dir / "trifurcations.csv", "replica,count_h,count_2h,merged,certified");
  std::size_t largest = 0;
  int qualifying = 0;
  int mismatches = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    csv.row(r, row.h, row.h2, static_cast<int>(row.merged), static_cast<int>(row.certified));
    largest = std::max({largest, row.h, row.h2});
    if (row.merged && row.certified) {
      ++qualifying;
      mismatches += row.h != row.h2;
    }
  }
  ctx.report()["trifurcations"] = {
      {"max_count", largest}, {"qualifying", qualifying}, {"mismatches", mismatches}};
  ctx.check(at_most("trifurcation_count", c.tri_sources - 1, static_cast<double>(largest)));
  ctx.check(at_least("stabilization_replicas", 1, qualifying));
  ctx.check(equal("stabilization_mismatches", 0, mismatches));
}

void run_export(Context& ctx) {
  const auto& c = ctx.config;
  const Window w = Window::centered(c.size);
  const Window support =
      certification_support(w, c.k, Direction::down).united(certification_support(w, c.k, Direction::up));
  const WeightField X = WeightField::generate(c.seed, support);
  const GeodesicTree down = build_tree(X.values, w, Direction::down, c.k);
  const GeodesicTree up = build_tree(X.values, w, Direction::up, c.k);
  const InterfaceForest up_portrait = interface_portrait(down);
  const InterfaceForest down_portrait = interface_portrait(up);

  {
    Csv csv(ctx.dir / "weights.csv", "i,j,weight");
    w.for_each([&](LatticePoint p) { csv.row(p.i, p.j, X.values(p)); });
  }
  {
    const BusemannField B = busemann_field(X.values, w, c.k, Direction::down);
    Csv csv(ctx.dir / "busemann.csv", "i,j,value");
    w.for_each([&](LatticePoint p) { csv.row(p.i, p.j, B(p)); });
  }
  ctx.report()["certificate"] = certificate_json(certify_stabilization(X.values, w, c.k, Direction::down));
  {
    std::ofstream os(ctx.dir / "steps.csv", std::ios::binary);
    os << "i,j,step\n";
    w.for_each([&](LatticePoint p) {
      if (const char* s = step_name(down.step(p))) os << p.i << ',' << p.j << ',' << s << '\n';
    });
  }
  ordered_json counts;
  {
    std::ofstream os(ctx.dir / "edges.csv", std::ios::binary);
    os << "x1,y1,x2,y2,kind\n";
    auto emit = [&](const char* kind, const Window& bases, auto&& edge_of) {
      std::int64_t n = 0;
      bases.for_each([&](LatticePoint b) {
        if (const auto e = edge_of(b)) {
          os << num(e->x1 / 2.0) << ',' << num(e->y1 / 2.0) << ',' << num(e->x2 / 2.0) << ',' << num(e->y2 / 2.0)
             << ',' << kind << '\n';
          ++n;
        }
      });
      counts[kind] = n;
    };
    emit("tree_up", up.window, [&](LatticePoint b) { return outgoing_edge(up, b); });
    emit("tree_down", down.window, [&](LatticePoint b) { return outgoing_edge(down, b); });
    emit("portrait_up", up_portrait.window, [&](LatticePoint b) { return outgoing_edge(up_portrait, b); });
    emit("portrait_down", down_portrait.window, [&](LatticePoint b) { return outgoing_edge(down_portrait, b); });
  }
  const CrossingScan a = crossing_scan(down, up_portrait);
  const CrossingScan b = crossing_scan(up, down_portrait);
  ctx.report()["window"] = window_json(w);
  ctx.report()["K"] = c.k;
  ctx.report()["edge_counts"] = counts;
  ctx.report()["crossings"] = {{"tree_down_portrait_up", a.crossings}, {"tree_up_portrait_down", b.crossings}};
  ctx.check(equal("crossings_down", 0, static_cast<double>(a.crossings)));
  ctx.check(equal("crossings_up", 0, static_cast<double>(b.crossings)));
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"simulate", "duality",  "dimension", "exponent",  "holder", "occupation",
                                              "busemann", "highways", "frame",     "one-ended", "export"};
  return names;
}

ExperimentConfig defaults(const std::string& command) {
  if (!used_fields().count(command)) throw Error(Errc::invalid_config, "unknown command '" + command + "'");
  ExperimentConfig c;
  c.command = command;
  if (command == "simulate") {
    c.size = 64;
  } else if (command == "duality") {
    c.size = 256;
    c.k = 1024;
  } else if (command == "dimension") {
    c.n = 4096;
    c.scales = 12;
    c.replicas = 16;
    c.rw_steps = 1 << 24;
    c.rw_scales = 16;
    c.rw_replicas = 4;
  } else if (command == "exponent") {
    c.sizes = {256, 512, 1024, 2048, 4096, 8192};
    c.replicas = 64;
  } else if (command == "holder") {
    c.n = 16384;
    for (int k = 3; k <= 12; ++k) c.gaps.push_back(std::ldexp(1.0, -k));
  } else if (command == "occupation") {
    c.n = 256;
    c.replicas = 256;
    c.m_values = {0, 1, 2, 4, 8, 10};
    c.interval_i = {-0.02, 0.02};
    c.interval_j = {0, 0.25};
  } else if (command == "busemann") {
    c.size = 256;
    c.k = 1024;
    c.count = 100000;
    c.dual_count = 100000;
  } else if (command == "highways") {
    c.n = 1024;
    c.size = 64;
    c.grid = 32;
    c.replicas = 4;
  } else if (command == "frame") {
    c.n = 256;
    c.grid = 8;
    c.replicas = 5;
  } else if (command == "one-ended") {
    c.spacing = 2;
    c.sources = 16;
    c.heights = {8, 16, 32};
    c.replicas = 32;
    c.tri_sources = 4;
    c.tri_spacing = 4;
    c.tri_height = 32;
    c.tri_k_factor = 16;
    c.tri_replicas = 40;
  } else if (command == "export") {
    c.size = 64;
    c.k = 256;
  }
  return c;
}

void apply(ExperimentConfig& config, const nlohmann::json& object, const std::string& source,
           const std::string& text) {
  if (!object.is_object()) throw Error(Errc::invalid_config, source + ": configuration must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (key == "command") {
      if (!value.is_string() || value.get<std::string>() != config.command)
        throw Error(Errc::invalid_config, locate(source, text, key) + ": field 'command' does not match '" +
                                              config.command + "'");
      continue;
    }
    bool known = false;
    for_each_field(config, [&](const char* name, auto& member) {
      if (key != name) return;
      known = true;
      if (!uses(config, key))
        throw Error(Errc::invalid_config,
                    locate(source, text, key) + ": field '" + key + "' is not used by '" + config.command + "'");
      bool ok = false;
      try {
        ok = assign(value, member);
      } catch (const Error& e) {
        throw Error(Errc::invalid_config, locate(source, text, key) + ": field '" + key + "': " + e.what());
      }
      if (!ok)
        throw Error(Errc::invalid_config, locate(source, text, key) + ": field '" + key + "' must be " +
                                              type_name<std::decay_t<decltype(member)>>());
    });
    if (!known) throw Error(Errc::invalid_config, locate(source, text, key) + ": unknown field '" + key + "'");
  }
}

void validate(const ExperimentConfig& c) {
  auto fail = [&](const std::string& key, const std::string& what) {
    throw Error(Errc::invalid_config, "field '" + key + "' " + what);
  };
  auto positive = [&](const char* key, auto value) {
    if (uses(c, key) && !(value > 0)) fail(key, "must be positive");
  };
  positive("n", c.n);
  positive("size", c.size);
  positive("k", c.k);
  positive("replicas", c.replicas);
  positive("count", c.count);
  positive("dual_count", c.dual_count);
  positive("rw_steps", c.rw_steps);
  positive("rw_replicas", c.rw_replicas);
  positive("grid", c.grid);
  positive("spacing", c.spacing);
  positive("tri_spacing", c.tri_spacing);
  positive("tri_height", c.tri_height);
  positive("tri_k_factor", c.tri_k_factor);
  positive("tri_replicas", c.tri_replicas);
  if (c.threads < 0) fail("threads", "must be nonnegative");
  if (uses(c, "k") && c.command != "export" && c.k < c.size) fail("k", "must be at least the window side");
  if (c.command == "export" && c.k < c.size) fail("k", "must be at least the window side");
  if (uses(c, "scales") && c.scales < 5) fail("scales", "must be at least 5 (three scales are trimmed)");
  if (uses(c, "rw_scales") && c.rw_scales < 5) fail("rw_scales", "must be at least 5 (three scales are trimmed)");
  if (uses(c, "sizes")) {
    if (c.sizes.size() < 4) fail("sizes", "needs at least 4 sizes");
    for (int L : c.sizes)
      if (L < 2) fail("sizes", "entries must be at least 2");
    const auto [lo, hi] = std::minmax_element(c.sizes.begin(), c.sizes.end());
    if (*hi < 4 * *lo) fail("sizes", "must span at least 2 octaves");
    if (c.replicas < 32) fail("replicas", "must be at least 32 per size");
  }
  if (uses(c, "gaps")) {
    if (c.gaps.empty()) fail("gaps", "must not be empty");
    for (double g : c.gaps)
      if (!(g > 0)) fail("gaps", "entries must be positive");
  }
  if (uses(c, "sources") && c.sources < 2) fail("sources", "must be at least 2");
  if (uses(c, "tri_sources") && c.tri_sources < 1) fail("tri_sources", "must be positive");
  if (uses(c, "heights")) {
    if (c.heights.empty()) fail("heights", "must not be empty");
    for (int h : c.heights)
      if (h < 1) fail("heights", "entries must be positive");
  }
  if (uses(c, "m_values") && c.m_values.empty()) fail("m_values", "must not be empty");
  for (const char* key : {"interval_i", "interval_j"}) {
    if (!uses(c, key)) continue;
    const auto& v = std::string(key) == "interval_i" ? c.interval_i : c.interval_j;
    if (v.size() != 2 || !(v[0] < v[1])) fail(key, "must be [lo, hi] with lo < hi");
  }
  if (uses(c, "interval_j") && (c.interval_j[0] < 0 || c.interval_j[1] > 1))
    fail("interval_j", "must lie in the path time domain [0, 1]");
  if (c.command == "occupation" && c.replicas < 100) fail("replicas", "must be at least 100");
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["command"] = config.command;
  for_each_field(config, [&](const char* name, const auto& member) {
    if (uses(config, name)) j[name] = member;
  });
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  // FNV-1a over the canonical (key-sorted) serialisation
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Assertion within(std::string name, double expected, double observed, double tolerance) {
  return {std::move(name), "within", expected, observed, tolerance, std::abs(observed - expected) <= tolerance};
}
Assertion below(std::string name, double bound, double observed) {
  return {std::move(name), "below", bound, observed, 0, observed < bound};
}
Assertion at_least(std::string name, double bound, double observed) {
  return {std::move(name), "at_least", bound, observed, 0, observed >= bound};
}
Assertion at_most(std::string name, double bound, double observed) {
  return {std::move(name), "at_most", bound, observed, 0, observed <= bound};
}
Assertion equal(std::string name, double expected, double observed) {
  return {std::move(name), "equal", expected, observed, 0, observed == expected};
}

Outcome run(const ExperimentConfig& config) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  const fs::path dir = config.out;
  fs::create_directories(dir);

  Context ctx{config, dir, resolve_threads(config.threads), {}};
  const std::string hash = config_hash(config);
  ctx.report()["command"] = config.command;
  ctx.report()["config_hash"] = hash;

  static const std::map<std::string, void (*)(Context&)> table{
      {"simulate", run_simulate}, {"duality", run_duality},       {"dimension", run_dimension},
      {"exponent", run_exponent}, {"holder", run_holder},         {"occupation", run_occupation},
      {"busemann", run_busemann}, {"highways", run_highways},     {"frame", run_frame},
      {"one-ended", run_one_ended}, {"export", run_export}};
  table.at(config.command)(ctx);

  Outcome& out = ctx.outcome;
  bool all = true;
  ordered_json assertions = ordered_json::array();
  for (const auto& a : out.assertions) {
    assertions.push_back(assertion_json(a));
    all = all && a.passed;
  }
  out.report["assertions"] = assertions;
  out.report["passed"] = all && out.status == 0;
  if (out.status == 0 && !all) out.status = 1;

  write_json(dir / "report.json", out.report);
  write_json(dir / "config.lock.json", ordered_json{{"config", ordered_json::parse(to_json(config).dump())},
                                                    {"hash", hash}});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_json(dir / "timestamp.json", ordered_json{{"started", started_at},
                                                  {"finished", utc_now()},
                                                  {"wall_seconds", seconds},
                                                  {"threads", ctx.threads}});
  return out;
}

ExperimentConfig parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"Exponential last-passage percolation laboratory"};
  app.require_subcommand(1);
  std::string config_file;
  std::string out_dir;
  int threads = -1;
  app.add_option("--config", config_file, "JSON file with flat keys mirroring the flags");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--threads", threads, "worker threads (default: KPZLAB_THREADS or 1)");

  std::map<std::string, std::vector<std::string>> raw;
  ExperimentConfig probe;
  for_each_field(probe, [&](const char* name, auto& member) {
    auto* opt = app.add_option(flag_name(name), raw[name]);
    if constexpr (std::is_same_v<std::decay_t<decltype(member)>, std::vector<int>> ||
                  std::is_same_v<std::decay_t<decltype(member)>, std::vector<double>>) {
      opt->delimiter(',')->expected(1, -1);
    } else {
      opt->expected(1);
    }
  });
  for (const auto& name : commands()) app.add_subcommand(name)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    throw;
  }

  ExperimentConfig config = defaults(app.get_subcommands().front()->get_name());
  if (!config_file.empty()) {
    std::ifstream is(config_file);
    if (!is) throw Error(Errc::invalid_config, "cannot read " + config_file);
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::invalid_config, config_file + ": " + e.what());
    }
    apply(config, j, config_file, text);
  }

  nlohmann::json flags = nlohmann::json::object();
  for_each_field(config, [&](const char* name, auto& member) {
    const auto& values = raw[name];
    if (values.empty()) return;
    using T = std::decay_t<decltype(member)>;
    auto parse_number = [&](const std::string& s) -> nlohmann::json {
      try {
        std::size_t used = 0;
        if constexpr (std::is_same_v<T, std::vector<double>>) {
          const double v = std::stod(s, &used);
          if (used == s.size()) return v;
        } else {
          const long long v = std::stoll(s, &used);
          if (used == s.size()) return v;
        }
      } catch (const std::exception&) {
      }
      throw Error(Errc::invalid_config, "flag " + flag_name(name) + ": cannot parse '" + s + "'");
    };
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      flags[name] = values.front();
    } else if constexpr (std::is_same_v<T, std::vector<int>> || std::is_same_v<T, std::vector<double>>) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& s : values) list.push_back(parse_number(s));
      flags[name] = list;
    } else {
      flags[name] = parse_number(values.front());
    }
  });
  apply(config, flags, "command line");
  if (!out_dir.empty()) config.out = out_dir;
  if (threads >= 0) config.threads = threads;
  validate(config);
  return config;
}

int main(int argc, const char* const* argv) {
  try {
    const ExperimentConfig config = parse_command_line(argc, argv);
    const Outcome outcome = run(config);
    for (const auto& a : outcome.assertions)
      std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": observed " << num(a.observed) << ", expected "
                << a.relation << ' ' << num(a.expected)
                << (a.relation == "within" ? " +- " + num(a.tolerance) : std::string()) << '\n';
    if (outcome.status == 3) std::cerr << outcome.report.value("error", std::string()) << '\n';
    return outcome.status;
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == Errc::invalid_config || e.code() == Errc::configuration ? 2 : 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace kpzlab::cli
