#include "kpzlab/lattice.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace kpzlab {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::precondition: return "precondition error";
    case Errc::ordering: return "ordering error";
    case Errc::consistency: return "consistency error";
    case Errc::configuration: return "configuration error";
    case Errc::estimator: return "estimator error";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::insufficient_certification: return "insufficient K/window";
    case Errc::invalid_config: return "invalid config";
  }
  return "error";
}

char step_letter(Step s) {
  switch (s) {
    case Step::Right: return 'R';
    case Step::Up: return 'U';
    case Step::Left: return 'L';
    case Step::Down: return 'D';
    case Step::None: break;
  }
  return '.';
}

LatticePoint primal_from_rotated(RotatedCoord r) {
  if ((r.twice_m + r.twice_x) % 2 != 0) throw Error(Errc::precondition, "rotated coordinate is not a primal point");
  return {static_cast<int>((r.twice_m + r.twice_x) / 2), static_cast<int>((r.twice_m - r.twice_x) / 2)};
}

DualPoint dual_from_rotated(RotatedCoord r) {
  const std::int64_t twice_i = r.twice_m + r.twice_x;  // = 2 i + 1
  if (twice_i % 2 == 0) throw Error(Errc::precondition, "rotated coordinate is not a dual point");
  const std::int64_t twice_j = r.twice_m - r.twice_x;
  return {{static_cast<int>((twice_i - 1) / 2), static_cast<int>((twice_j - 1) / 2)}};
}

LatticePoint box_of(const Eigen::Vector2d& q) {
  // q = p + s v + x w with p = M v + X w, M, X half-integers of equal parity.
  const double sigma = 0.5 * (q.x() + q.y());
  const double xi = 0.5 * (q.x() - q.y());
  // s = sigma - M in (-1/4, 1/4]  <=>  2M = ceil(2 sigma - 1/2).
  const auto twice_m = static_cast<std::int64_t>(std::ceil(2.0 * sigma - 0.5));
  // x = xi - X in (-1/2, 1/2]  <=>  X in [xi - 1/2, xi + 1/2) on the grid Z + offset.
  const double offset = (twice_m % 2 == 0) ? 0.0 : 0.5;
  const double big_x = offset + std::ceil(xi - 0.5 - offset);
  const auto twice_x = static_cast<std::int64_t>(2.0 * big_x);
  return primal_from_rotated({twice_m, twice_x});
}

bool in_box(LatticePoint p, const Eigen::Vector2d& q) {
  const double di = q.x() - p.i;
  const double dj = q.y() - p.j;
  const double s = 0.5 * (di + dj);
  const double x = 0.5 * (di - dj);
  return s > -0.25 && s <= 0.25 && x > -0.5 && x <= 0.5;
}

Window Window::spanning(LatticePoint a, LatticePoint b) {
  return {{std::min(a.i, b.i), std::min(a.j, b.j)}, {std::max(a.i, b.i), std::max(a.j, b.j)}, 0};
}

Window Window::united(const Window& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  return {{std::min(lo.i, other.lo.i), std::min(lo.j, other.lo.j)},
          {std::max(hi.i, other.hi.i), std::max(hi.j, other.hi.j)},
          std::max(margin, other.margin)};
}

Window Window::intersected(const Window& other) const {
  return {{std::max(lo.i, other.lo.i), std::max(lo.j, other.lo.j)},
          {std::min(hi.i, other.hi.i), std::min(hi.j, other.hi.j)},
          0};
}

std::string describe(const Window& w) {
  std::ostringstream os;
  if (w.empty()) return "[empty]";
  os << "[(" << w.lo.i << "," << w.lo.j << ")..(" << w.hi.i << "," << w.hi.j << ")]";
  if (w.margin) os << "+" << w.margin;
  return os.str();
}

namespace {

double uniform_from_mixed_seed(std::uint64_t mixed_seed, LatticePoint p) {
  const std::uint64_t cell =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.i)) << 32) | static_cast<std::uint32_t>(p.j);
  const std::uint64_t word = mix64(mixed_seed ^ mix64(cell ^ 0x3c6ef372fe94f82bULL));
  // 53 high bits, centred in their cell: U in [2^-54, 1 - 2^-54].
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

double weight_from_mixed_seed(std::uint64_t mixed_seed, LatticePoint p) {
  constexpr double up = 0x1.0p32;
  constexpr double down = 0x1.0p-32;
  static_assert(weight_quantum_bits == 32);
  return std::ceil(-std::log(uniform_from_mixed_seed(mixed_seed, p)) * up) * down;
}

}  // namespace

double derive_uniform(std::uint64_t seed, LatticePoint p) { return uniform_from_mixed_seed(mix64(seed), p); }

double derive_weight(std::uint64_t seed, LatticePoint p) { return weight_from_mixed_seed(mix64(seed), p); }

WeightField WeightField::generate(std::uint64_t seed, const Window& window) {
  WeightField field{seed, window, Grid<double>(window.enlarged(), 0.0)};
  const std::uint64_t mixed = mix64(seed);
  const Window e = window.enlarged();
  auto& a = field.values.array();
  for (int j = e.lo.j; j <= e.hi.j; ++j)
    for (int i = e.lo.i; i <= e.hi.i; ++i) a(i - e.lo.i, j - e.lo.j) = weight_from_mixed_seed(mixed, {i, j});
  return field;
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    first += 2;
    base = 16;
  }
  const auto [ptr, ec] = std::from_chars(first, last, value, base);
  if (ec != std::errc() || ptr != last || first == last)
    throw Error(Errc::invalid_config, "seed '" + text + "' is not a 64-bit unsigned integer");
  return value;
}

}  // namespace kpzlab
