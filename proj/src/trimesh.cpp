#include "tdg/trimesh.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>

namespace tdg {

namespace {

// Quantized periodic key for coordinate matching. The quantum is far below
// the feature separation (h/2) and far above accumulated roundoff.
struct PointKey {
  std::int64_t x, y;
  bool operator<(const PointKey& o) const { return x < o.x || (x == o.x && y < o.y); }
};

PointKey make_key(const Eigen::Vector2d& p, double L, double quantum) {
  auto wrap = [&](double c) {
    double w = std::fmod(c, L);
    if (w < 0.0) w += L;
    // values within a quantum of L belong to 0
    if (w > L - 0.5 * quantum) w = 0.0;
    return w;
  };
  return PointKey{static_cast<std::int64_t>(std::llround(wrap(p.x()) / quantum)),
                  static_cast<std::int64_t>(std::llround(wrap(p.y()) / quantum))};
}

void build_edges(TriMesh2D& mesh) {
  const int nt = mesh.num_elements();
  const double quantum = mesh.char_h() / 64.0;
  mesh.edges.clear();
  mesh.elem_edges.assign(nt, {-1, -1, -1});

  std::map<PointKey, int> by_midpoint;
  for (int k = 0; k < nt; ++k) {
    for (int le = 0; le < 3; ++le) {
      const Eigen::Vector2d a = mesh.vertex(mesh.triangles(k, le));
      const Eigen::Vector2d b = mesh.vertex(mesh.triangles(k, (le + 1) % 3));
      const PointKey key = make_key(0.5 * (a + b), mesh.L, quantum);
      auto it = by_midpoint.find(key);
      if (it == by_midpoint.end()) {
        TriMesh2D::Edge edge;
        edge.elem_minus = k;
        edge.local_minus = le;
        edge.a = a;
        edge.b = b;
        edge.length = (b - a).norm();
        const Eigen::Vector2d d = (b - a) / edge.length;
        edge.normal = Eigen::Vector2d(d.y(), -d.x());  // outward for CCW orientation
        edge.offset_plus.setZero();
        by_midpoint.emplace(key, static_cast<int>(mesh.edges.size()));
        mesh.elem_edges[k][le] = static_cast<int>(mesh.edges.size());
        mesh.edges.push_back(edge);
      } else {
        TriMesh2D::Edge& edge = mesh.edges[it->second];
        if (edge.elem_plus != -1)
          throw std::logic_error("build_edges: more than two triangles share an edge");
        edge.elem_plus = k;
        edge.local_plus = le;
        // translation that carries minus-side coordinates onto this side
        const Eigen::Vector2d mid_minus = 0.5 * (edge.a + edge.b);
        const Eigen::Vector2d mid_plus = 0.5 * (a + b);
        for (int d = 0; d < 2; ++d)
          edge.offset_plus(d) = std::round((mid_plus(d) - mid_minus(d)) / mesh.L) * mesh.L;
        mesh.elem_edges[k][le] = it->second;
      }
    }
  }

  for (const auto& edge : mesh.edges)
    if (edge.elem_plus == -1)
      throw std::logic_error("build_edges: unmatched edge on a periodic mesh");
}

}  // namespace

Eigen::Matrix2d TriMesh2D::jacobian(int k) const {
  const Eigen::Vector2d v0 = vertex(triangles(k, 0));
  Eigen::Matrix2d J;
  J.col(0) = vertex(triangles(k, 1)) - v0;
  J.col(1) = vertex(triangles(k, 2)) - v0;
  return J;
}

double TriMesh2D::total_area() const {
  double acc = 0.0;
  for (int k = 0; k < num_elements(); ++k) acc += signed_area(k);
  return acc;
}

Eigen::Vector2d TriMesh2D::to_physical(int k, double r, double s) const {
  return vertex(triangles(k, 0)) + jacobian(k) * Eigen::Vector2d(r, s);
}

Eigen::Vector2d TriMesh2D::to_reference(int k, const Eigen::Vector2d& x) const {
  return jacobian(k).inverse() * (x - vertex(triangles(k, 0)));
}

Eigen::Vector2d TriMesh2D::outward_normal(int k, int local_edge) const {
  const Eigen::Vector2d a = vertex(triangles(k, local_edge));
  const Eigen::Vector2d b = vertex(triangles(k, (local_edge + 1) % 3));
  const Eigen::Vector2d d = (b - a).normalized();
  return Eigen::Vector2d(d.y(), -d.x());
}

TriMesh2D build_tri_mesh(double L, int n) {
  if (n < 1) throw std::invalid_argument("build_tri_mesh: need n >= 1");
  if (!(L > 0.0)) throw std::invalid_argument("build_tri_mesh: need L > 0");

  TriMesh2D mesh;
  mesh.L = L;
  mesh.resolution = n;
  const double h = L / n;

  mesh.vertices.resize((n + 1) * (n + 1), 2);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      mesh.vertices(vid(i, j), 0) = i * h;
      mesh.vertices(vid(i, j), 1) = j * h;
    }

  mesh.triangles.resize(2 * n * n, 3);
  int t = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      // split along the (i+1, j) -- (i, j+1) diagonal; markedly better coarse
      // accuracy than the aligned split for waves travelling along (1, 1)
      mesh.triangles.row(t++) << vid(i, j), vid(i + 1, j), vid(i, j + 1);
      mesh.triangles.row(t++) << vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1);
    }

  build_edges(mesh);
  return mesh;
}

TriMesh2D refine(const TriMesh2D& old) {
  TriMesh2D mesh;
  mesh.L = old.L;
  mesh.resolution = 2 * old.resolution;

  const double quantum = mesh.L / (mesh.resolution * 64.0);
  std::map<PointKey, int> vertex_ids;
  std::vector<Eigen::Vector2d> verts;
  auto get_vertex = [&](const Eigen::Vector2d& p) {
    // raw (unwrapped) coordinates are deduplicated; quantize without wrapping
    PointKey key{static_cast<std::int64_t>(std::llround((p.x() + mesh.L) / quantum)),
                 static_cast<std::int64_t>(std::llround((p.y() + mesh.L) / quantum))};
    auto it = vertex_ids.find(key);
    if (it != vertex_ids.end()) return it->second;
    const int id = static_cast<int>(verts.size());
    verts.push_back(p);
    vertex_ids.emplace(key, id);
    return id;
  };

  std::vector<std::array<int, 3>> tris;
  for (int k = 0; k < old.num_elements(); ++k) {
    const Eigen::Vector2d v0 = old.vertex(old.triangles(k, 0));
    const Eigen::Vector2d v1 = old.vertex(old.triangles(k, 1));
    const Eigen::Vector2d v2 = old.vertex(old.triangles(k, 2));
    const int a = get_vertex(v0), b = get_vertex(v1), c = get_vertex(v2);
    const int ab = get_vertex(0.5 * (v0 + v1));
    const int bc = get_vertex(0.5 * (v1 + v2));
    const int ca = get_vertex(0.5 * (v2 + v0));
    tris.push_back({a, ab, ca});
    tris.push_back({ab, b, bc});
    tris.push_back({ca, bc, c});
    tris.push_back({ab, bc, ca});
  }

  mesh.vertices.resize(verts.size(), 2);
  for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i].transpose();
  mesh.triangles.resize(tris.size(), 3);
  for (size_t i = 0; i < tris.size(); ++i)
    mesh.triangles.row(i) << tris[i][0], tris[i][1], tris[i][2];

  build_edges(mesh);
  return mesh;
}

void write_mesh(const TriMesh2D& mesh, const std::string& prefix) {
  {
    std::ofstream out(prefix + "_vertices.txt");
    if (!out) throw std::runtime_error("write_mesh: cannot open " + prefix + "_vertices.txt");
    for (int v = 0; v < mesh.vertices.rows(); ++v)
      out << mesh.vertices(v, 0) << " " << mesh.vertices(v, 1) << "\n";
  }
  {
    std::ofstream out(prefix + "_triangles.txt");
    if (!out) throw std::runtime_error("write_mesh: cannot open " + prefix + "_triangles.txt");
    for (int t = 0; t < mesh.triangles.rows(); ++t)
      out << mesh.triangles(t, 0) << " " << mesh.triangles(t, 1) << " " << mesh.triangles(t, 2)
          << "\n";
  }
}

int periodic_vertex_count(const TriMesh2D& mesh) {
  const double quantum = mesh.char_h() / 64.0;
  std::map<PointKey, int> unique;
  for (int v = 0; v < mesh.vertices.rows(); ++v)
    unique.emplace(make_key(mesh.vertex(v), mesh.L, quantum), v);
  return static_cast<int>(unique.size());
}

}  // namespace tdg
