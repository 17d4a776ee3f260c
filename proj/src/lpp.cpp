#include "kpzlab/lpp.hpp"

#include <algorithm>

namespace kpzlab {

std::vector<LatticePoint> LatticePath::points() const {
  std::vector<LatticePoint> out;
  out.reserve(size());
  LatticePoint p = start;
  out.push_back(p);
  for (Step s : steps) {
    p = p + displacement(s);
    out.push_back(p);
  }
  return out;
}

LatticePoint LatticePath::end() const {
  LatticePoint p = start;
  for (Step s : steps) p = p + displacement(s);
  return p;
}

std::vector<RotatedCoord> LatticePath::rotated() const {
  std::vector<RotatedCoord> out;
  out.reserve(size());
  for (const LatticePoint& p : points()) out.push_back({std::int64_t{p.i} + p.j + shift, std::int64_t{p.i} - p.j});
  return out;
}

UniquenessReport restriction_uniqueness_check(const Grid<double>& weights, const LatticePath& path) {
  const auto pts = path.points();
  const LatticePoint last = pts.back();
  for (Step s : path.steps)
    if (s != Step::Right && s != Step::Up) throw Error(Errc::consistency, "path is not up-right");

  UniquenessReport report;
  for (std::size_t a = 0; a + 1 < pts.size(); ++a) {
    const Window domain{pts[a], last, 0};
    if (!weights.window().contains(domain)) throw Error(Errc::precondition, "weights do not cover the path");
    // value and saturated count of maximisers from pts[a]
    Grid<double> value(domain, 0.0);
    Grid<std::uint8_t> count(domain, 0);
    count(pts[a]) = 1;
    for (int j = domain.lo.j; j <= domain.hi.j; ++j) {
      for (int i = domain.lo.i; i <= domain.hi.i; ++i) {
        const LatticePoint p{i, j};
        if (p == pts[a]) continue;
        const bool has_left = i > domain.lo.i;
        const bool has_below = j > domain.lo.j;
        double best = 0;
        int n = 0;
        if (has_left && has_below) {
          const double l = value(p - e1);
          const double b = value(p - e2);
          best = std::max(l, b);
          if (l == best) n += count(p - e1);
          if (b == best) n += count(p - e2);
        } else if (has_left) {
          best = value(p - e1);
          n = count(p - e1);
        } else {
          best = value(p - e2);
          n = count(p - e2);
        }
        value(p) = best + weights(p);
        count(p) = static_cast<std::uint8_t>(std::min(n, 2));
      }
    }
    if (a == 0) {
      double own = 0;
      for (std::size_t k = 1; k < pts.size(); ++k) own += weights(pts[k]);
      if (own != value(last)) throw Error(Errc::consistency, "path is not a geodesic under the given weights");
    }
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      ++report.segments_checked;
      if (count(pts[b]) > 1) ++report.violations;
    }
  }
  return report;
}

namespace {

template <typename OnRow>
double streamed_sweep(std::uint64_t seed, LatticePoint p, LatticePoint q, OnRow&& on_row) {
  if (!precedes(p, q)) throw Error(Errc::ordering, "endpoints are not ordered");
  const int width = q.i - p.i + 1;
  std::vector<double> row(static_cast<std::size_t>(width));
  std::vector<std::uint8_t> from_left(static_cast<std::size_t>(width));
  constexpr double minus_inf = -std::numeric_limits<double>::infinity();
  for (int j = p.j; j <= q.j; ++j) {
    for (int c = 0; c < width; ++c) {
      const LatticePoint u{p.i + c, j};
      if (c == 0 && j == p.j) {
        row[0] = 0;
        from_left[0] = 0;
        continue;
      }
      const double left = c > 0 ? row[static_cast<std::size_t>(c - 1)] : minus_inf;
      const double below = j > p.j ? row[static_cast<std::size_t>(c)] : minus_inf;
      from_left[static_cast<std::size_t>(c)] = left > below;
      row[static_cast<std::size_t>(c)] = std::max(left, below) + derive_weight(seed, u);
    }
    on_row(j, from_left, row);
  }
  return row.back();
}

}  // namespace

double streamed_passage_time(std::uint64_t seed, LatticePoint p, LatticePoint q) {
  return streamed_sweep(seed, p, q, [](int, const auto&, const auto&) {});
}

StreamedGeodesic streamed_geodesic(std::uint64_t seed, LatticePoint p, LatticePoint q) {
  if (!precedes(p, q)) throw Error(Errc::ordering, "geodesic endpoints are not ordered");
  const std::size_t width = static_cast<std::size_t>(q.i - p.i + 1);
  const std::size_t height = static_cast<std::size_t>(q.j - p.j + 1);
  std::vector<std::uint64_t> bits((width * height + 63) / 64, 0);
  // tie[c] is set when left == below at column c of the current row
  std::vector<std::uint64_t> tie_bits((width * height + 63) / 64, 0);
  std::vector<double> previous(width, 0.0);
  bool first_row = true;

  const double total = streamed_sweep(seed, p, q, [&](int j, const auto& from_left, const auto& row) {
    const std::size_t base = static_cast<std::size_t>(j - p.j) * width;
    for (std::size_t c = 0; c < width; ++c) {
      if (from_left[c]) bits[(base + c) / 64] |= std::uint64_t{1} << ((base + c) % 64);
      if (c > 0 && !first_row && row[c - 1] == previous[c])
        tie_bits[(base + c) / 64] |= std::uint64_t{1} << ((base + c) % 64);
    }
    previous = row;
    first_row = false;
  });

  StreamedGeodesic out;
  out.passage_time = total;
  out.path.start = p;
  std::vector<Step> reversed;
  reversed.reserve(width + height);
  std::size_t c = width - 1;
  std::size_t r = height - 1;
  while (c > 0 || r > 0) {
    const std::size_t idx = r * width + c;
    if ((tie_bits[idx / 64] >> (idx % 64)) & 1U) ++out.path.tie_count;
    if ((bits[idx / 64] >> (idx % 64)) & 1U) {
      reversed.push_back(Step::Right);
      --c;
    } else {
      reversed.push_back(Step::Up);
      --r;
    }
  }
  out.path.steps.assign(reversed.rbegin(), reversed.rend());
  return out;
}

}  // namespace kpzlab
