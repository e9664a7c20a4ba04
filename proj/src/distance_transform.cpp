#include "landsite/distance_transform.hpp"

#include <algorithm>
#include <vector>

namespace landsite {
namespace {

// Lower envelope of parabolas y = f[q] + (x - q)^2 over one line; entries
// with f == inf are skipped.
void envelope_1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInfiniteDistance) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInfiniteDistance;
      z[1] = kInfiniteDistance;
      continue;
    }
    // z[0] == -inf, so the loop stops at k == 0 at the latest.
    double s = 0.0;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInfiniteDistance;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInfiniteDistance);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

Grid<double> squared_distance_to_sources(const Mask& source) {
  const int rows = source.rows();
  const int cols = source.cols();
  Grid<double> dist(rows, cols, kInfiniteDistance);

  // Rows: exact 1-D distance by a forward and a backward scan.
  for (int r = 0; r < rows; ++r) {
    double last = -1;
    for (int c = 0; c < cols; ++c) {
      if (source(r, c)) last = c;
      if (last >= 0) {
        const double d = c - last;
        dist(r, c) = d * d;
      }
    }
    last = -1;
    for (int c = cols - 1; c >= 0; --c) {
      if (source(r, c)) last = c;
      if (last >= 0) {
        const double d = last - c;
        dist(r, c) = std::min(dist(r, c), d * d);
      }
    }
  }

  // Columns: parabola envelope over the row results.
  std::vector<double> f(rows), out(rows), z(rows + 1);
  std::vector<int> v(rows);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) f[r] = dist(r, c);
    envelope_1d(f, out, v, z);
    for (int r = 0; r < rows; ++r) dist(r, c) = out[r];
  }
  return dist;
}

Grid<double> squared_distance_to_background(const Mask& mask) {
  Mask padded(mask.rows() + 2, mask.cols() + 2, 1);
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) padded(r + 1, c + 1) = mask(r, c) ? 0 : 1;
  }
  const Grid<double> full = squared_distance_to_sources(padded);
  Grid<double> out(mask.rows(), mask.cols(), 0.0);
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) out(r, c) = full(r + 1, c + 1);
  }
  return out;
}

}  // namespace landsite
