#pragma once

#include <stdexcept>

namespace tdg {

/// Uniform periodic partition of [a, b] into num_elements intervals.
struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  int num_elements = 1;
  double h = 1.0;

  int left_neighbor(int k) const { return (k + num_elements - 1) % num_elements; }
  int right_neighbor(int k) const { return (k + 1) % num_elements; }

  double element_left(int k) const { return a + k * h; }
  double element_right(int k) const { return a + (k + 1) * h; }
  double element_center(int k) const { return a + (k + 0.5) * h; }

  /// Physical coordinate of a reference point xi in [-1, 1] on element k.
  double to_physical(int k, double xi) const { return element_center(k) + 0.5 * h * xi; }
};

inline Mesh1D build_mesh_1d(double a, double b, int num_elements) {
  if (num_elements < 1) throw std::invalid_argument("build_mesh_1d: need at least one element");
  if (!(b > a)) throw std::invalid_argument("build_mesh_1d: domain must satisfy b > a");
  Mesh1D mesh;
  mesh.a = a;
  mesh.b = b;
  mesh.num_elements = num_elements;
  mesh.h = (b - a) / num_elements;
  return mesh;
}

}  // namespace tdg
