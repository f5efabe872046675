#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace heliopack::oracle {

namespace {

double seg_dist(const P2& p, const P2& a, const P2& b) {
  const P2 ab = b - a;
  const double l2 = ab.squaredNorm();
  const double t = l2 > 0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

void extend(const Poly& ring, double& x0, double& y0, double& x1, double& y1) {
  for (const auto& p : ring) {
    x0 = std::min(x0, p.x());
    y0 = std::min(y0, p.y());
    x1 = std::max(x1, p.x());
    y1 = std::max(y1, p.y());
  }
}

}  // namespace

bool inside_ring(const P2& p, const Poly& ring) {
  bool in = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const P2& a = ring[i];
    const P2& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
      in = !in;
  }
  return in;
}

double min_distance_to_rings(const P2& p, const std::vector<Poly>& rings) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ring : rings)
    for (std::size_t i = 0; i < ring.size(); ++i)
      best = std::min(best, seg_dist(p, ring[i], ring[(i + 1) % ring.size()]));
  return best;
}

double raster_overlap_area(const Poly& a, const Poly& b, double cell) {
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  extend(a, x0, y0, x1, y1);
  long count = 0;
  for (double y = y0 + 0.5 * cell; y < y1; y += cell)
    for (double x = x0 + 0.5 * cell; x < x1; x += cell) {
      const P2 p(x, y);
      if (inside_ring(p, a) && inside_ring(p, b)) ++count;
    }
  return static_cast<double>(count) * cell * cell;
}

int eroded_components(const Poly& exterior, const std::vector<Poly>& holes, double distance, double cell) {
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  extend(exterior, x0, y0, x1, y1);
  const int w = static_cast<int>(std::ceil((x1 - x0) / cell));
  const int h = static_cast<int>(std::ceil((y1 - y0) / cell));
  std::vector<Poly> rings{exterior};
  rings.insert(rings.end(), holes.begin(), holes.end());
  std::vector<char> keep(static_cast<std::size_t>(w) * h, 0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const P2 p(x0 + (c + 0.5) * cell, y0 + (r + 0.5) * cell);
      if (!inside_ring(p, exterior)) continue;
      bool in_hole = false;
      for (const auto& hole : holes) in_hole = in_hole || inside_ring(p, hole);
      if (in_hole) continue;
      if (min_distance_to_rings(p, rings) >= distance) keep[static_cast<std::size_t>(r) * w + c] = 1;
    }
  int comps = 0;
  std::vector<char> seen(keep.size(), 0);
  for (int start = 0; start < w * h; ++start) {
    if (!keep[start] || seen[start]) continue;
    ++comps;
    std::deque<int> q{start};
    seen[start] = 1;
    while (!q.empty()) {
      const int cur = q.front();
      q.pop_front();
      const int r = cur / w, c = cur % w;
      const int nb[4][2] = {{r + 1, c}, {r - 1, c}, {r, c + 1}, {r, c - 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
        const int id = n[0] * w + n[1];
        if (keep[id] && !seen[id]) {
          seen[id] = 1;
          q.push_back(id);
        }
      }
    }
  }
  return comps;
}

double min_box_area_sweep(const std::vector<P2>& points, double step_deg) {
  double best = INFINITY;
  for (double a = 0.0; a < 180.0; a += step_deg) {
    const double r = a * M_PI / 180.0;
    const P2 u(std::cos(r), std::sin(r)), v(-std::sin(r), std::cos(r));
    double u0 = INFINITY, u1 = -INFINITY, v0 = INFINITY, v1 = -INFINITY;
    for (const auto& p : points) {
      u0 = std::min(u0, p.dot(u));
      u1 = std::max(u1, p.dot(u));
      v0 = std::min(v0, p.dot(v));
      v1 = std::max(v1, p.dot(v));
    }
    best = std::min(best, (u1 - u0) * (v1 - v0));
  }
  return best;
}

std::pair<double, double> width_sweep(const std::vector<P2>& points, double step_deg) {
  double lo = INFINITY, hi = 0.0;
  for (double a = 0.0; a < 180.0; a += step_deg) {
    const double r = a * M_PI / 180.0;
    const P2 u(std::cos(r), std::sin(r));
    double u0 = INFINITY, u1 = -INFINITY;
    for (const auto& p : points) {
      u0 = std::min(u0, p.dot(u));
      u1 = std::max(u1, p.dot(u));
    }
    lo = std::min(lo, u1 - u0);
    hi = std::max(hi, u1 - u0);
  }
  return {hi, lo};
}

bool visible_by_sampling(const P2& a, const P2& b, const Poly& exterior, const std::vector<Poly>& holes,
                         double step) {
  const double len = (b - a).norm();
  const int n = std::max(2, static_cast<int>(std::ceil(len / step)));
  std::vector<Poly> rings{exterior};
  rings.insert(rings.end(), holes.begin(), holes.end());
  for (int i = 1; i < n; ++i) {
    const P2 p = a + (b - a) * (static_cast<double>(i) / n);
    const bool on_boundary = min_distance_to_rings(p, rings) < 1e-9;
    if (on_boundary) continue;
    if (!inside_ring(p, exterior)) return false;
    for (const auto& h : holes)
      if (inside_ring(p, h)) return false;
  }
  return true;
}

double monte_carlo_shaded_fraction(const std::vector<P3>& caster, const std::vector<P3>& receiver,
                                   const P3& to_sun, int rays, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const P3 r0 = receiver[0];
  const P3 ru = receiver[1] - receiver[0];
  const P3 rv = receiver[3] - receiver[0];
  const P3 c0 = caster[0];
  const P3 cu = caster[1] - caster[0];
  const P3 cv = caster[3] - caster[0];
  const P3 normal = cu.cross(cv);
  const double denom = normal.dot(to_sun);
  if (std::abs(denom) < 1e-14) return 0.0;
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = cu;
  basis.col(1) = cv;
  const Eigen::Matrix2d gram = basis.transpose() * basis;
  const Eigen::Matrix2d gram_inv = gram.inverse();
  int hits = 0;
  for (int i = 0; i < rays; ++i) {
    const P3 p = r0 + uni(rng) * ru + uni(rng) * rv;
    const double t = normal.dot(c0 - p) / denom;
    if (t <= 0.0) continue;
    const P3 hit = p + t * to_sun;
    const Eigen::Vector2d ab = gram_inv * (basis.transpose() * (hit - c0));
    if (ab.x() >= 0.0 && ab.x() <= 1.0 && ab.y() >= 0.0 && ab.y() <= 1.0) ++hits;
  }
  return static_cast<double>(hits) / rays;
}

Instance random_instance(int n, int k, double edge_prob, double shade_prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Instance inst;
  inst.n = n;
  inst.k = k;
  inst.cost.resize(n);
  inst.tariff.assign(k, 1.0);
  inst.gen.assign(n, std::vector<double>(k, 0.0));
  inst.diag.assign(n, std::vector<double>(k, 0.0));
  inst.s.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(k, 0.0)));
  for (int t = 0; t < k; ++t) inst.tariff[t] = 0.5 + uni(rng);
  for (int i = 0; i < n; ++i) {
    inst.cost[i] = 2.0 + 4.0 * uni(rng);
    for (int t = 0; t < k; ++t) inst.gen[i][t] = 2.0 * uni(rng);
    for (int t = 0; t < k; ++t)
      if (uni(rng) < 0.1) inst.diag[i][t] = 0.5 * uni(rng);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uni(rng) < edge_prob) inst.edges.emplace_back(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || uni(rng) >= shade_prob) continue;
      for (int t = 0; t < k; ++t)
        if (uni(rng) < 0.5) inst.s[i][j][t] = 0.05 + 0.6 * uni(rng);
    }
  return inst;
}

double evaluate(const Instance& inst, const std::vector<int>& x) {
  double total = 0.0;
  for (int i = 0; i < inst.n; ++i) {
    if (!x[i]) continue;
    double term = -inst.cost[i];
    for (int t = 0; t < inst.k; ++t) {
      double shade = inst.diag[i][t];
      for (int j = 0; j < inst.n; ++j)
        if (j != i && x[j]) shade += inst.s[i][j][t];
      term += inst.tariff[t] * inst.gen[i][t] * (1.0 - std::min(1.0, shade));
    }
    total += term;
  }
  return total;
}

Enumeration enumerate_independent_sets(const Instance& inst) {
  std::vector<std::uint32_t> adj(inst.n, 0);
  for (const auto& [a, b] : inst.edges) {
    adj[a] |= 1u << b;
    adj[b] |= 1u << a;
  }
  Enumeration best;
  best.x.assign(inst.n, 0);
  best.best = 0.0;
  std::vector<int> x(inst.n);
  for (std::uint32_t mask = 1; mask < (1u << inst.n); ++mask) {
    bool independent = true;
    for (int i = 0; i < inst.n && independent; ++i)
      if ((mask >> i & 1u) && (adj[i] & mask)) independent = false;
    if (!independent) continue;
    for (int i = 0; i < inst.n; ++i) x[i] = (mask >> i) & 1u;
    const double v = evaluate(inst, x);
    if (v > best.best) {
      best.best = v;
      best.x = x;
    }
  }
  return best;
}

std::pair<double, double> almanac_sun(int year, int month, int day, double utc_hours, double latitude,
                                      double longitude) {
  const double d2r = M_PI / 180.0;
  int y = year, m = month;
  if (m <= 2) {
    y -= 1;
    m += 12;
  }
  const int a = y / 100;
  const int b = 2 - a + a / 4;
  const double jd = std::floor(365.25 * (y + 4716)) + std::floor(30.6001 * (m + 1)) + day + b - 1524.5 +
                    utc_hours / 24.0;
  const double n = jd - 2451545.0;
  const double L = std::fmod(280.460 + 0.9856474 * n, 360.0);
  const double g = std::fmod(357.528 + 0.9856003 * n, 360.0) * d2r;
  const double lambda = (L + 1.915 * std::sin(g) + 0.020 * std::sin(2 * g)) * d2r;
  const double eps = (23.439 - 0.0000004 * n) * d2r;
  const double ra = std::atan2(std::cos(eps) * std::sin(lambda), std::cos(lambda));
  const double dec = std::asin(std::sin(eps) * std::sin(lambda));
  const double gmst_hours = std::fmod(18.697374558 + 24.06570982441908 * n, 24.0);
  const double lst = (gmst_hours * 15.0 + longitude) * d2r;
  const double ha = lst - ra;
  const double lat = latitude * d2r;
  const double sin_el = std::sin(lat) * std::sin(dec) + std::cos(lat) * std::cos(dec) * std::cos(ha);
  const double el = std::asin(sin_el);
  const double az = std::atan2(-std::sin(ha) * std::cos(dec),
                               std::cos(lat) * std::sin(dec) - std::sin(lat) * std::cos(dec) * std::cos(ha));
  double az_deg = az / d2r;
  if (az_deg < 0) az_deg += 360.0;
  return {az_deg, el / d2r};
}

Grid direct_gradient(const std::vector<Grid>& bands, int radius) {
  const int h = static_cast<int>(bands[0].size());
  const int w = static_cast<int>(bands[0][0].size());
  Grid out(h, std::vector<double>(w, 0.0));
  for (const auto& band : bands) {
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double hi = -INFINITY, lo = INFINITY;
        for (int dr = -radius; dr <= radius; ++dr)
          for (int dc = -radius; dc <= radius; ++dc) {
            if (dr * dr + dc * dc > radius * radius) continue;
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            hi = std::max(hi, band[rr][cc]);
            lo = std::min(lo, band[rr][cc]);
          }
        out[r][c] = std::max(out[r][c], hi - lo);
      }
  }
  return out;
}

std::vector<std::vector<int>> border_fill(const std::vector<std::vector<int>>& mask) {
  const int h = static_cast<int>(mask.size());
  const int w = static_cast<int>(mask[0].size());
  std::vector<std::vector<int>> outside(h, std::vector<int>(w, 0));
  std::deque<std::pair<int, int>> q;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if ((r == 0 || c == 0 || r == h - 1 || c == w - 1) && !mask[r][c]) {
        outside[r][c] = 1;
        q.emplace_back(r, c);
      }
  while (!q.empty()) {
    const auto [r, c] = q.front();
    q.pop_front();
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        if (mask[rr][cc] || outside[rr][cc]) continue;
        outside[rr][cc] = 1;
        q.emplace_back(rr, cc);
      }
  }
  std::vector<std::vector<int>> filled(h, std::vector<int>(w, 0));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) filled[r][c] = outside[r][c] ? 0 : 1;
  return filled;
}

Grid black_tophat_lines(const Grid& image, int length) {
  const int h = static_cast<int>(image.size());
  const int w = static_cast<int>(image[0].size());
  const int half = length / 2;
  // Replicate edges far enough that the crop never sees the padding border.
  const int pad = 2 * half;
  const int ph = h + 2 * pad, pw = w + 2 * pad;
  Grid padded(ph, std::vector<double>(pw));
  for (int r = 0; r < ph; ++r)
    for (int c = 0; c < pw; ++c) padded[r][c] = image[std::clamp(r - pad, 0, h - 1)][std::clamp(c - pad, 0, w - 1)];
  const int dirs[4][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}};
  Grid acc(h, std::vector<double>(w, 0.0));
  for (const auto& d : dirs) {
    Grid dil(ph, std::vector<double>(pw, -INFINITY));
    for (int r = 0; r < ph; ++r)
      for (int c = 0; c < pw; ++c)
        for (int s = -half; s <= half; ++s) {
          const int rr = r + s * d[0], cc = c + s * d[1];
          if (rr >= 0 && rr < ph && cc >= 0 && cc < pw) dil[r][c] = std::max(dil[r][c], padded[rr][cc]);
        }
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double m = INFINITY;
        for (int s = -half; s <= half; ++s) m = std::min(m, dil[r + pad + s * d[0]][c + pad + s * d[1]]);
        acc[r][c] += (m - image[r][c]) / 4.0;
      }
  }
  return acc;
}

bool xml_well_formed(const std::string& text, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<std::string> stack;
  int roots = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (text[i] != '<') {
      if (text[i] == '&') {
        const std::size_t semi = text.find(';', i);
        if (semi == std::string::npos || semi - i > 8) return fail("bare ampersand");
      } else if (!std::isspace(static_cast<unsigned char>(text[i])) && stack.empty()) {
        return fail("text outside root");
      }
      ++i;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const std::size_t end = text.find("-->", i + 4);
      if (end == std::string::npos) return fail("unterminated comment");
      i = end + 3;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      const std::size_t end = text.find("?>", i + 2);
      if (end == std::string::npos) return fail("unterminated declaration");
      i = end + 2;
      continue;
    }
    const bool closing = i + 1 < n && text[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::size_t name_start = j;
    while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '-' || text[j] == '_' ||
                     text[j] == ':'))
      ++j;
    const std::string name = text.substr(name_start, j - name_start);
    if (name.empty()) return fail("empty tag name");
    bool self_closing = false;
    // Attributes: name="value" pairs.
    while (j < n && text[j] != '>') {
      if (std::isspace(static_cast<unsigned char>(text[j]))) {
        ++j;
        continue;
      }
      if (text[j] == '/' && j + 1 < n && text[j + 1] == '>') {
        self_closing = true;
        ++j;
        break;
      }
      if (closing) return fail("attributes on closing tag");
      std::size_t k = j;
      while (k < n && text[k] != '=' && text[k] != '>' && !std::isspace(static_cast<unsigned char>(text[k]))) ++k;
      if (k >= n || text[k] != '=') return fail("attribute without value in <" + name + ">");
      ++k;
      if (k >= n || (text[k] != '"' && text[k] != '\'')) return fail("unquoted attribute in <" + name + ">");
      const char quote = text[k];
      const std::size_t end = text.find(quote, k + 1);
      if (end == std::string::npos) return fail("unterminated attribute");
      if (text.substr(k + 1, end - k - 1).find('<') != std::string::npos) return fail("'<' in attribute");
      j = end + 1;
    }
    if (j >= n) return fail("unterminated tag");
    i = j + 1;
    if (closing) {
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty()) ++roots;
      stack.push_back(name);
    } else if (stack.empty()) {
      ++roots;
    }
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (roots != 1) return fail("expected exactly one root element");
  return true;
}

double modularity(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<int>& label) {
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& [u, v] : edges) a[u][v] = a[v][u] = 1.0;
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      k[i] += a[i][j];
      two_m += a[i][j];
    }
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (label[i] == label[j]) q += a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

}  // namespace heliopack::oracle
