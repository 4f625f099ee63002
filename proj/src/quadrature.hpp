#ifndef ADIAMAG_SRC_QUADRATURE_HPP
#define ADIAMAG_SRC_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace adiamag::detail
{

/// Cumulative integral of sampled f over nodes s that are uniform within
/// each piece; pieces are separated by a repeated node. Even nodes use
/// composite Simpson, odd ones add the three-point half-panel rule.
inline std::vector<double> cumulative_simpson(const std::vector<double>& s,
                                              const std::vector<double>& f)
{
  const std::size_t n = s.size();
  std::vector<double> out(n, 0.0);
  std::size_t begin = 0;
  double base = 0.0;
  while (begin < n) {
    std::size_t end = begin;
    while (end + 1 < n && s[end + 1] > s[end]) {
      ++end;
    }
    out[begin] = base;
    for (std::size_t j = begin; j + 1 <= end; j += 2) {
      const double h = s[j + 1] - s[j];
      if (j + 2 <= end) {
        out[j + 1] = out[j] + h / 12.0 * (5 * f[j] + 8 * f[j + 1] - f[j + 2]);
        out[j + 2] = out[j] + h / 3.0 * (f[j] + 4 * f[j + 1] + f[j + 2]);
      } else {
        out[j + 1] = out[j] + 0.5 * h * (f[j] + f[j + 1]);
      }
    }
    base = out[end];
    begin = end + 1;
  }
  return out;
}

}  // namespace adiamag::detail

#endif  // ADIAMAG_SRC_QUADRATURE_HPP
