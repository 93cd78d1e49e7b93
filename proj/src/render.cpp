#include "infogeo/render.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "infogeo/errors.hpp"

namespace infogeo {

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void require_2d(int dim, const char* what) {
  if (dim != 2) throw ValidationError(std::string("rendering is 2-D only; ") + what + " has dimension " +
                                      std::to_string(dim));
}

struct Extent {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  void add(double x, double y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  bool empty() const { return !(x1 >= x0); }
};

void add_ellipse_extent(Extent& e, const Belief& b, double chi2) {
  const double r = std::sqrt(chi2 * max_eigenvalue(b.cov));
  e.add(b.mean(0) - r, b.mean(1) - r);
  e.add(b.mean(0) + r, b.mean(1) + r);
}

std::string ellipse(const Belief& b, double chi2, const char* style) {
  const SymEig eig = sym_eig(b.cov);
  // Major axis along the eigenvector of the larger eigenvalue.
  const double rx = std::sqrt(chi2 * std::max(eig.values(1), 0.0));
  const double ry = std::sqrt(chi2 * std::max(eig.values(0), 0.0));
  const double angle = std::atan2(eig.vectors(1, 1), eig.vectors(0, 1)) * 180.0 / M_PI;
  const std::string cx = num(b.mean(0)), cy = num(b.mean(1));
  return "<ellipse cx=\"" + cx + "\" cy=\"" + cy + "\" rx=\"" + num(rx) + "\" ry=\"" + num(ry) +
         "\" transform=\"rotate(" + num(angle) + " " + cx + " " + cy + ")\" " + style + "/>\n";
}

}  // namespace

std::string render_svg(const RenderScene& s) {
  if (s.env) require_2d(s.env->dim(), "environment");
  if (s.tree) require_2d(s.tree->dim(), "tree");
  if (s.path && !s.path->empty()) require_2d(s.path->front().dim(), "path");
  if (!(s.chi2 > 0.0)) throw ValidationError("chi2 must be positive");

  Extent e;
  if (s.env) {
    e.add(s.env->bounds.min(0), s.env->bounds.min(1));
    e.add(s.env->bounds.max(0), s.env->bounds.max(1));
  } else {
    if (s.tree)
      for (int i = 0; i < static_cast<int>(s.tree->size()); ++i) add_ellipse_extent(e, s.tree->belief(i), s.chi2);
    if (s.path)
      for (const auto& b : *s.path) add_ellipse_extent(e, b, s.chi2);
  }
  if (e.empty()) e = Extent{0.0, 0.0, 1.0, 1.0};
  const double w = std::max(e.x1 - e.x0, 1e-9), h = std::max(e.y1 - e.y0, 1e-9);
  const double pad = 0.02 * std::max(w, h);
  const double px_w = 800.0, px_h = 800.0 * h / w;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(px_w) + "\" height=\"" + num(px_h) +
         "\" viewBox=\"" + num(e.x0 - pad) + " " + num(e.y0 - pad) + " " + num(w + 2 * pad) + " " +
         num(h + 2 * pad) + "\">\n";
  // Flip y so the workspace reads with y up.
  out += "<g transform=\"matrix(1 0 0 -1 0 " + num(e.y0 + e.y1) + ")\">\n";

  if (s.env) {
    const Environment& env = *s.env;
    out += "<rect x=\"" + num(env.bounds.min(0)) + "\" y=\"" + num(env.bounds.min(1)) + "\" width=\"" +
           num(env.bounds.max(0) - env.bounds.min(0)) + "\" height=\"" + num(env.bounds.max(1) - env.bounds.min(1)) +
           "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\"/>\n";
    for (const auto& o : env.obstacles) {
      out += "<polygon points=\"";
      bool first = true;
      for (const auto& v : o.vertices()) {
        if (!first) out += ' ';
        first = false;
        out += num(v(0)) + "," + num(v(1));
      }
      out += "\" fill=\"#555555\" stroke=\"none\"/>\n";
    }
    out += "<rect x=\"" + num(env.goal_box.min(0)) + "\" y=\"" + num(env.goal_box.min(1)) + "\" width=\"" +
           num(env.goal_box.max(0) - env.goal_box.min(0)) + "\" height=\"" +
           num(env.goal_box.max(1) - env.goal_box.min(1)) +
           "\" fill=\"#8fd18f\" fill-opacity=\"0.5\" stroke=\"#2e7d32\" stroke-width=\"1\" "
           "vector-effect=\"non-scaling-stroke\"/>\n";
  }

  if (s.tree) {
    const BeliefTree& t = *s.tree;
    out += "<g stroke=\"#7a9cc6\" stroke-width=\"0.5\" vector-effect=\"non-scaling-stroke\">\n";
    for (int i = 1; i < static_cast<int>(t.size()); ++i) {
      const Vec& a = t.belief(t.parent(i)).mean;
      const Vec& b = t.belief(i).mean;
      out += "<line x1=\"" + num(a(0)) + "\" y1=\"" + num(a(1)) + "\" x2=\"" + num(b(0)) + "\" y2=\"" + num(b(1)) +
             "\"/>\n";
    }
    out += "</g>\n";
  }

  const char* style = "fill=\"none\" stroke=\"#c62828\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\"";
  if (s.path && !s.path->empty()) {
    out += "<polyline fill=\"none\" stroke=\"#c62828\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\" "
           "points=\"";
    for (std::size_t k = 0; k < s.path->size(); ++k) {
      if (k) out += ' ';
      out += num((*s.path)[k].mean(0)) + "," + num((*s.path)[k].mean(1));
    }
    out += "\"/>\n";
    for (const auto& b : *s.path) out += ellipse(b, s.chi2, style);
  } else if (s.tree && s.tree_ellipses) {
    for (int i = 0; i < static_cast<int>(s.tree->size()); ++i) out += ellipse(s.tree->belief(i), s.chi2, style);
  }

  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace infogeo
