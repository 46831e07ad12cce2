#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tdg {

/// Fully periodic structured triangulation of [0, L]^2: n x n squares, each
/// split along the (lower-left -> upper-right) diagonal. Vertices along the
/// periodic boundary are stored with their raw coordinates; periodicity lives
/// entirely in the edge identification.
struct TriMesh2D {
  double L = 1.0;
  int resolution = 1;  // squares per side; characteristic size h = L / resolution

  Eigen::MatrixXd vertices;   // nv x 2
  Eigen::MatrixXi triangles;  // nt x 3, counterclockwise

  struct Edge {
    int elem_minus = -1, local_minus = -1;  // minus = lower element index
    int elem_plus = -1, local_plus = -1;
    Eigen::Vector2d a, b;         // endpoints, minus-side coordinates; parameter runs a -> b
    Eigen::Vector2d normal;       // unit, outward from the minus element
    double length = 0.0;
    Eigen::Vector2d offset_plus;  // translation from minus-side to plus-side coordinates
  };
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> elem_edges;  // local edge i spans vertices (i, i+1 mod 3)

  int num_elements() const { return static_cast<int>(triangles.rows()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  double char_h() const { return L / resolution; }

  Eigen::Vector2d vertex(int v) const { return vertices.row(v).transpose(); }

  /// Affine map columns [v1 - v0, v2 - v0]; det = 2 * area for CCW triangles.
  Eigen::Matrix2d jacobian(int k) const;
  double signed_area(int k) const { return 0.5 * jacobian(k).determinant(); }
  double total_area() const;

  Eigen::Vector2d to_physical(int k, double r, double s) const;
  Eigen::Vector2d to_reference(int k, const Eigen::Vector2d& x) const;

  /// Outward unit normal of element k on its local edge.
  Eigen::Vector2d outward_normal(int k, int local_edge) const;
};

TriMesh2D build_tri_mesh(double L, int n);

/// Uniform red refinement: every triangle into four, h halves.
TriMesh2D refine(const TriMesh2D& mesh);

/// Plain-text export: "<prefix>_vertices.txt" (x y per line) and
/// "<prefix>_triangles.txt" (three vertex indices per line).
void write_mesh(const TriMesh2D& mesh, const std::string& prefix);

/// Count of distinct vertices after periodic identification (Euler-formula
/// checks: V - E + F = 0 on the torus).
int periodic_vertex_count(const TriMesh2D& mesh);

}  // namespace tdg
