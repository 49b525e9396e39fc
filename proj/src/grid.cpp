#include "thinlab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "thinlab/errors.hpp"

namespace thinlab {

Grid::Grid(int n, int m, double lo, double hi)
    : Grid(n, m, std::array<double, 3>{lo, lo, lo}, std::array<double, 3>{hi, hi, hi}) {}

Grid::Grid(int n, int m, const std::array<double, 3>& lo, const std::array<double, 3>& hi)
    : n_(n), m_(m), lo_(lo), hi_(hi) {
  if (n < 2 || n > 3) throw Error(ErrorKind::InvalidArgument, "Grid: n must be 2 or 3");
  if (m < 3 || m % 2 == 0) throw Error(ErrorKind::InvalidArgument, "Grid: m must be odd and >= 3");
  for (int k = 0; k < n; ++k) {
    const auto K = static_cast<std::size_t>(k);
    if (!(hi_[K] > lo_[K])) throw Error(ErrorKind::InvalidArgument, "Grid: empty box");
    h_[K] = (hi_[K] - lo_[K]) / (m - 1);
  }
  // thin plane must be the middle grid plane
  const auto last = static_cast<std::size_t>(n - 1);
  if (std::abs(lo_[last] + hi_[last]) > 1e-12 * (hi_[last] - lo_[last]))
    throw Error(ErrorKind::InvalidArgument, "Grid: box must be symmetric in x_n");
  size_ = 1;
  for (int k = n - 1; k >= 0; --k) {
    stride_[static_cast<std::size_t>(k)] = size_;
    size_ *= static_cast<std::size_t>(m);
  }
}

bool Grid::isotropic() const {
  for (int k = 1; k < n_; ++k)
    if (std::abs(h_[static_cast<std::size_t>(k)] - h_[0]) > 1e-12 * h_[0]) return false;
  return true;
}

std::size_t Grid::index(const std::array<int, 3>& ijk) const {
  std::size_t idx = 0;
  for (int k = 0; k < n_; ++k)
    idx += static_cast<std::size_t>(ijk[static_cast<std::size_t>(k)]) * stride_[static_cast<std::size_t>(k)];
  return idx;
}

std::array<int, 3> Grid::multi_index(std::size_t idx) const {
  std::array<int, 3> ijk{0, 0, 0};
  for (int k = 0; k < n_; ++k) {
    const auto K = static_cast<std::size_t>(k);
    ijk[K] = static_cast<int>(idx / stride_[K]);
    idx %= stride_[K];
  }
  return ijk;
}

Vec Grid::node(std::size_t idx) const {
  const auto ijk = multi_index(idx);
  Vec x(n_);
  for (int k = 0; k < n_; ++k) x(k) = coord(k, ijk[static_cast<std::size_t>(k)]);
  if (ijk[static_cast<std::size_t>(n_ - 1)] == thin_index()) x(n_ - 1) = 0.0;
  return x;
}

bool Grid::on_boundary(std::size_t idx) const {
  const auto ijk = multi_index(idx);
  for (int k = 0; k < n_; ++k) {
    const int i = ijk[static_cast<std::size_t>(k)];
    if (i == 0 || i == m_ - 1) return true;
  }
  return false;
}

bool Grid::contains(const Vec& x, double slack) const { return box().contains(x, slack); }

double Grid::distance_to_boundary(const Vec& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_; ++k) {
    const auto K = static_cast<std::size_t>(k);
    d = std::min({d, x(k) - lo_[K], hi_[K] - x(k)});
  }
  return d;
}

Box Grid::box() const {
  Box b{Vec(n_), Vec(n_)};
  for (int k = 0; k < n_; ++k) {
    b.lo(k) = lo_[static_cast<std::size_t>(k)];
    b.hi(k) = hi_[static_cast<std::size_t>(k)];
  }
  return b;
}

std::vector<std::size_t> Grid::thin_nodes() const {
  std::vector<std::size_t> out;
  const int kt = thin_index();
  if (n_ == 2) {
    for (int i = 0; i < m_; ++i) out.push_back(index({i, kt, 0}));
  } else {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) out.push_back(index({i, j, kt}));
  }
  return out;
}

std::string to_string(FieldTag tag) {
  switch (tag) {
    case FieldTag::Solved: return "solved";
    case FieldTag::Exact: return "exact";
    case FieldTag::Rescaled: return "rescaled";
  }
  return "solved";
}

ScalarField::ScalarField(Grid grid, std::vector<double> values, FieldTag tag)
    : grid_(std::move(grid)), values_(std::move(values)), tag_(tag), cache_(std::make_shared<GradientCache>()) {
  if (values_.size() != grid_.size()) throw Error(ErrorKind::InvalidArgument, "ScalarField: size mismatch");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "ScalarField: non-finite value");
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(const Vec&)>& f, FieldTag tag) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
  return ScalarField(grid, std::move(v), tag);
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

struct CellLocation {
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> t{0.0, 0.0, 0.0};
};

CellLocation locate(const Grid& g, const Vec& x, Side side) {
  if (!g.contains(x)) throw Error(ErrorKind::OutOfDomain, "point outside the grid box");
  CellLocation c;
  const int m = g.nodes_per_axis();
  for (int k = 0; k < g.dim(); ++k) {
    const auto K = static_cast<std::size_t>(k);
    const double s = (x(k) - g.lower(k)) / g.spacing(k);
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, m - 2);
    double t = std::clamp(s - i, 0.0, 1.0);
    if (k == g.dim() - 1 && x(k) == 0.0) {
      // on the thin plane: pick the cell on the requested side
      if (side == Side::Plus) {
        i = g.thin_index();
        t = 0.0;
      } else {
        i = g.thin_index() - 1;
        t = 1.0;
      }
    }
    c.base[K] = i;
    c.t[K] = t;
  }
  return c;
}

}  // namespace

double ScalarField::value(const Vec& x) const {
  const CellLocation c = locate(grid_, x, Side::Plus);
  const int n = grid_.dim();
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::array<int, 3> ijk = c.base;
    for (int k = 0; k < n; ++k) {
      const auto K = static_cast<std::size_t>(k);
      const int bit = (corner >> k) & 1;
      ijk[K] += bit;
      w *= bit ? c.t[K] : 1.0 - c.t[K];
    }
    if (w != 0.0) acc += w * values_[grid_.index(ijk)];
  }
  return acc;
}

Vec ScalarField::node_gradient(std::size_t idx, Side side) const {
  const int n = grid_.dim();
  const int m = grid_.nodes_per_axis();
  const auto ijk = grid_.multi_index(idx);
  Vec g(n);
  for (int k = 0; k < n; ++k) {
    const auto K = static_cast<std::size_t>(k);
    const std::size_t s = grid_.stride(k);
    const double h = grid_.spacing(k);
    const int i = ijk[K];
    const bool thin_normal = (k == n - 1) && (i == grid_.thin_index());
    if (thin_normal) {
      if (side == Side::Plus)
        g(k) = (-3.0 * values_[idx] + 4.0 * values_[idx + s] - values_[idx + 2 * s]) / (2.0 * h);
      else
        g(k) = (3.0 * values_[idx] - 4.0 * values_[idx - s] + values_[idx - 2 * s]) / (2.0 * h);
    } else if (i == 0) {
      g(k) = (-3.0 * values_[idx] + 4.0 * values_[idx + s] - values_[idx + 2 * s]) / (2.0 * h);
    } else if (i == m - 1) {
      g(k) = (3.0 * values_[idx] - 4.0 * values_[idx - s] + values_[idx - 2 * s]) / (2.0 * h);
    } else {
      g(k) = (values_[idx + s] - values_[idx - s]) / (2.0 * h);
    }
  }
  return g;
}

void ScalarField::ensure_cache() const {
  std::call_once(cache_->once, [this] {
    const int n = grid_.dim();
    for (int k = 0; k < n; ++k) cache_->plus[static_cast<std::size_t>(k)].resize(values_.size());
    const auto thin = grid_.thin_nodes();
    cache_->minus_normal.assign(values_.size(), 0.0);
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      const Vec g = node_gradient(idx, Side::Plus);
      for (int k = 0; k < n; ++k) cache_->plus[static_cast<std::size_t>(k)][idx] = g(k);
    }
    for (std::size_t idx : thin) cache_->minus_normal[idx] = node_gradient(idx, Side::Minus)(n - 1);
  });
}

Vec ScalarField::gradient(const Vec& x, Side side) const {
  ensure_cache();
  const CellLocation c = locate(grid_, x, side);
  const int n = grid_.dim();
  const int kt = grid_.thin_index();
  // the cell lies on one side of the thin plane; its thin-plane corners use that side
  const bool below = c.base[static_cast<std::size_t>(n - 1)] < kt;
  Vec g = Vec::Zero(n);
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::array<int, 3> ijk = c.base;
    for (int k = 0; k < n; ++k) {
      const auto K = static_cast<std::size_t>(k);
      const int bit = (corner >> k) & 1;
      ijk[K] += bit;
      w *= bit ? c.t[K] : 1.0 - c.t[K];
    }
    if (w == 0.0) continue;
    const std::size_t idx = grid_.index(ijk);
    for (int k = 0; k < n; ++k) g(k) += w * cache_->plus[static_cast<std::size_t>(k)][idx];
    if (below && ijk[static_cast<std::size_t>(n - 1)] == kt)
      g(n - 1) += w * (cache_->minus_normal[idx] - cache_->plus[static_cast<std::size_t>(n - 1)][idx]);
  }
  return g;
}

double sample(const ScalarField& field, const Vec& x) { return field.value(x); }

Vec one_sided_gradient(const ScalarField& field, const Vec& x, Side side) { return field.gradient(x, side); }

// ---------------------------------------------------------------- SGF1

namespace {

static_assert(std::endian::native == std::endian::little, "SGF1 writer assumes a little-endian host");

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::Io, "SGF1: truncated input");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_sgf1(const ScalarField& field) {
  const Grid& g = field.grid();
  std::vector<unsigned char> out;
  out.reserve(16 + 16 * static_cast<std::size_t>(g.dim()) + 8 * g.size());
  for (char c : {'S', 'G', 'F', '1'}) out.push_back(static_cast<unsigned char>(c));
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nodes_per_axis()));
  for (int k = 0; k < g.dim(); ++k) {
    put<double>(out, g.lower(k));
    put<double>(out, g.upper(k));
  }
  for (double v : field.values()) put<double>(out, v);
  return out;
}

ScalarField decode_sgf1(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "SGF1", 4) != 0)
    throw Error(ErrorKind::Io, "SGF1: bad magic");
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != 1) throw Error(ErrorKind::Io, "SGF1: unsupported version");
  const auto n = get<std::uint32_t>(bytes, pos);
  const auto m = get<std::uint32_t>(bytes, pos);
  if (n < 2 || n > 3) throw Error(ErrorKind::Io, "SGF1: unsupported dimension");
  std::array<double, 3> lo{-1, -1, -1}, hi{1, 1, 1};
  for (std::uint32_t k = 0; k < n; ++k) {
    lo[k] = get<double>(bytes, pos);
    hi[k] = get<double>(bytes, pos);
  }
  Grid grid(static_cast<int>(n), static_cast<int>(m), lo, hi);
  if (bytes.size() - pos != 8 * grid.size()) throw Error(ErrorKind::Io, "SGF1: payload size mismatch");
  std::vector<double> values(grid.size());
  std::memcpy(values.data(), bytes.data() + pos, 8 * grid.size());
  return ScalarField(grid, std::move(values));
}

void write_sgf1(const std::string& path, const ScalarField& field) {
  const auto bytes = encode_sgf1(field);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

ScalarField read_sgf1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_sgf1(bytes);
}

}  // namespace thinlab
