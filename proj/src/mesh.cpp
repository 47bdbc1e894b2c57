#include "neuroskin/mesh.hpp"

#include <cmath>
#include <string>

#include "neuroskin/errors.hpp"

namespace neuroskin {

Mesh::Mesh(std::size_t nx, std::size_t ny, double elem_size)
    : nx_(nx), ny_(ny), elem_size_(elem_size) {
  if (nx == 0 || ny == 0) throw InvalidArgument("mesh: element counts must be >= 1");
  if (!(elem_size > 0.0) || !std::isfinite(elem_size))
    throw InvalidArgument("mesh: element size must be positive");

  coords_.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      coords_.push_back({static_cast<double>(i) * elem_size, static_cast<double>(j) * elem_size});

  connectivity_.reserve(nx * ny);
  for (std::size_t row = 0; row < ny; ++row) {
    for (std::size_t col = 0; col < nx; ++col) {
      const std::size_t n0 = node_at(col, row);
      connectivity_.push_back({n0, n0 + 1, n0 + nx + 2, n0 + nx + 1});
    }
  }

  constrained_.reserve(kDofsPerNode * (nx + 1));
  for (std::size_t i = 0; i <= nx; ++i) {
    constrained_.push_back(DofMap::dof(i, Axis::x));
    constrained_.push_back(DofMap::dof(i, Axis::y));
  }
}

const std::array<std::size_t, 4>& Mesh::element_nodes(std::size_t e) const {
  if (e >= connectivity_.size())
    throw IndexError("element index " + std::to_string(e) + " out of range (" +
                     std::to_string(connectivity_.size()) + " elements)");
  return connectivity_[e];
}

std::vector<std::size_t> Mesh::free_edge_nodes() const {
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i <= nx_; ++i) nodes.push_back(node_at(i, ny_));
  return nodes;
}

Mesh build_grid_mesh(std::size_t nx, std::size_t ny, double elem_size) {
  return Mesh(nx, ny, elem_size);
}

std::vector<std::size_t> supported_edge_dofs(const Mesh& mesh) { return mesh.constrained_dofs(); }

std::array<std::size_t, 4> element_node_ids(const Mesh& mesh, std::size_t e) {
  return mesh.element_nodes(e);
}

}  // namespace neuroskin
