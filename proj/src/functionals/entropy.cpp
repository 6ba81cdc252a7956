#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcflab/functionals.hpp"

namespace mcflab {

namespace {

struct Candidate {
  Vec3 center;
  double log_scale;
  double value;
  double center_bracket;
  double log_bracket;
};

// Values at many scales for one center, using distances sorted once.
class SortedEvaluator {
 public:
  explicit SortedEvaluator(const GaussianNodes& nodes) : nodes_(nodes), buf_(nodes.points.size()) {}

  void set_center(const Vec3& c) {
    for (std::size_t i = 0; i < buf_.size(); ++i) buf_[i] = {(nodes_.points[i] - c).squaredNorm(), nodes_.weights[i]};
    std::sort(buf_.begin(), buf_.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  }

  double evaluate(double scale) const {
    const double k = 0.25 * scale * scale;
    double sum = 0.0;
    for (const auto& [d2, w] : buf_) {
      const double e = k * d2;
      if (e > 46.0) break;
      sum += w * std::exp(-e);
    }
    return sum * scale * scale / (4.0 * std::numbers::pi);
  }

 private:
  const GaussianNodes& nodes_;
  std::vector<std::pair<double, double>> buf_;
};

template <class F>
double golden_max(F&& f, double lo, double hi, int iters, double& best_x, int& evals) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  evals += 2;
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
    ++evals;
  }
  if (f1 >= f2) {
    best_x = x1;
    return f1;
  }
  best_x = x2;
  return f2;
}

}  // namespace

EntropyResult entropy(const TriMesh& mesh, const EntropySearch& search) {
  return entropy(mesh, estimate_curvature(mesh), search);
}

EntropyResult entropy(const TriMesh& mesh, const CurvatureField& curv, const EntropySearch& search) {
  if (search.grid < 2 || search.n_scales < 2 || !(search.scale_lo > 0.0) || !(search.scale_hi > search.scale_lo))
    throw Error(ErrorCode::InvalidParams, "invalid entropy search grid");
  EntropyResult res;
  const GaussianNodes coarse = GaussianNodes::vertices(mesh, curv.vertex_area);
  const GaussianNodes fine = GaussianNodes::faces(mesh);

  Vec3 lo = mesh.vertices[0], hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double r_bb = std::max(0.5 * (hi - lo).norm(), 1e-300);
  const Vec3 step = (hi - lo) / (search.grid - 1);
  const double log_lo = std::log(search.scale_lo / r_bb);
  const double log_step = std::log(search.scale_hi / search.scale_lo) / (search.n_scales - 1);
  res.center_step = step.maxCoeff();
  res.log_scale_step = log_step;

  // coarse grid, vertex-area quadrature
  std::vector<Candidate> grid_cands;
  SortedEvaluator sorted(coarse);
  for (int i = 0; i < search.grid; ++i)
    for (int j = 0; j < search.grid; ++j)
      for (int k = 0; k < search.grid; ++k) {
        const Vec3 c = lo + Vec3(i * step.x(), j * step.y(), k * step.z());
        sorted.set_center(c);
        for (int s = 0; s < search.n_scales; ++s) {
          const double ls = log_lo + s * log_step;
          grid_cands.push_back({c, ls, sorted.evaluate(std::exp(ls)), res.center_step, log_step});
          ++res.evaluations;
        }
      }
  std::sort(grid_cands.begin(), grid_cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  std::vector<Candidate> pool;
  for (const auto& c : grid_cands) {
    if (static_cast<int>(pool.size()) >= search.refine_candidates) break;
    bool distinct = true;
    for (const auto& p : pool)
      distinct = distinct && ((p.center - c.center).norm() > 1.5 * res.center_step ||
                              std::abs(p.log_scale - c.log_scale) > 1.5 * log_step);
    if (distinct) pool.push_back(c);
  }

  // model-shape seeds: a vertex with mean curvature H sits on a neck of radius
  // 1/H (best scale sqrt(2) H) or a sphere of radius 2/H (best scale H)
  if (search.curvature_seeds && curv.size() == mesh.num_vertices()) {
    std::vector<int> order(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return curv.H[a] > curv.H[b]; });
    const int stride = std::max(1, mesh.num_vertices() / 256);
    std::vector<int> seeds;
    for (int k = 0; k < std::min(32, mesh.num_vertices()); ++k) seeds.push_back(order[k]);
    for (int v = 0; v < mesh.num_vertices(); v += stride) seeds.push_back(v);
    std::vector<Candidate> seed_cands;
    for (int v : seeds) {
      const double h = curv.H[v];
      if (!(h > 0.0)) continue;
      const Vec3& x = mesh.vertices[v];
      const Vec3& n = curv.normal[v];
      const Candidate neck{x - n / h, std::log(std::sqrt(2.0) * h), 0.0, 1.0 / h, std::log(2.0)};
      const Candidate ball{x - 2.0 * n / h, std::log(h), 0.0, 1.0 / h, std::log(2.0)};
      for (Candidate c : {neck, ball}) {
        c.value = coarse.evaluate(c.center, std::exp(c.log_scale));
        ++res.evaluations;
        seed_cands.push_back(c);
      }
    }
    std::sort(seed_cands.begin(), seed_cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
    for (int k = 0; k < std::min<int>(search.refine_candidates, seed_cands.size()); ++k) pool.push_back(seed_cands[k]);
  }

  // refine with face quadrature, coordinate-wise golden section
  double best = fine.evaluate(Vec3::Zero(), 1.0);
  ++res.evaluations;
  res.center = Vec3::Zero();
  res.scale = 1.0;
  res.refined_center_bracket = res.center_step;
  res.refined_log_scale_bracket = log_step;
  for (auto cand : pool) {
    double hc = std::min(cand.center_bracket, 1.5 * std::exp(-cand.log_scale));
    double hs = cand.log_bracket;
    Vec3 c = cand.center;
    double ls = cand.log_scale;
    double val = fine.evaluate(c, std::exp(ls));
    ++res.evaluations;
    for (int round = 0; round < search.refine_rounds; ++round) {
      for (int coord = 0; coord < 4; ++coord) {
        double x_best = 0.0;
        double v = 0.0;
        if (coord < 3) {
          const double x0 = c[coord];
          v = golden_max(
              [&](double x) {
                Vec3 cc = c;
                cc[coord] = x;
                return fine.evaluate(cc, std::exp(ls));
              },
              x0 - hc, x0 + hc, 14, x_best, res.evaluations);
          if (v > val) {
            c[coord] = x_best;
            val = v;
          }
        } else {
          v = golden_max([&](double x) { return fine.evaluate(c, std::exp(x)); }, ls - hs, ls + hs, 14, x_best,
                         res.evaluations);
          if (v > val) {
            ls = x_best;
            val = v;
          }
        }
      }
      hc *= 0.5;
      hs *= 0.5;
    }
    if (val > best) {
      best = val;
      res.center = c;
      res.scale = std::exp(ls);
      res.refined_center_bracket = hc;
      res.refined_log_scale_bracket = hs;
    }
  }
  res.lambda = best;
  return res;
}

nlohmann::json to_json(const EntropyResult& r) {
  return {{"lambda", r.lambda},
          {"center", {r.center.x(), r.center.y(), r.center.z()}},
          {"scale", r.scale},
          {"center_step", r.center_step},
          {"log_scale_step", r.log_scale_step},
          {"refined_center_bracket", r.refined_center_bracket},
          {"refined_log_scale_bracket", r.refined_log_scale_bracket},
          {"evaluations", r.evaluations}};
}

}  // namespace mcflab
