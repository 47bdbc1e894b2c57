#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace neuroskin {

inline constexpr std::size_t kDofsPerNode = 2;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class Axis { x = 0, y = 1 };

// Node -> global DOF addressing: node n owns (2n, 2n+1) = (u_x, u_y).
struct DofMap {
  static constexpr std::size_t dof(std::size_t node, Axis axis) {
    return kDofsPerNode * node + static_cast<std::size_t>(axis);
  }
  static constexpr std::size_t node_of(std::size_t dof) { return dof / kDofsPerNode; }
  static constexpr Axis axis_of(std::size_t dof) {
    return dof % kDofsPerNode == 0 ? Axis::x : Axis::y;
  }
};

/// Structured grid of square 4-node elements.
///
/// Nodes are numbered row-major starting at the supported edge (y = 0), with
/// x varying fastest. Element e = row * nx + col has corners listed
/// counter-clockwise from the lower-left node.
class Mesh {
 public:
  Mesh(std::size_t nx, std::size_t ny, double elem_size);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double elem_size() const { return elem_size_; }
  double elem_area() const { return elem_size_ * elem_size_; }

  std::size_t node_count() const { return coords_.size(); }
  std::size_t element_count() const { return connectivity_.size(); }
  std::size_t dof_count() const { return kDofsPerNode * node_count(); }

  const std::vector<Point2>& node_coords() const { return coords_; }
  const std::vector<std::array<std::size_t, 4>>& connectivity() const { return connectivity_; }

  /// Throws IndexError when e is out of range.
  const std::array<std::size_t, 4>& element_nodes(std::size_t e) const;

  std::size_t node_at(std::size_t col, std::size_t row) const { return row * (nx_ + 1) + col; }

  /// Sorted global DOFs fixed to zero (pinned supported edge).
  const std::vector<std::size_t>& constrained_dofs() const { return constrained_; }

  /// Nodes on the free edge opposite the supports (y = ny * elem_size).
  std::vector<std::size_t> free_edge_nodes() const;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double elem_size_;
  std::vector<Point2> coords_;
  std::vector<std::array<std::size_t, 4>> connectivity_;
  std::vector<std::size_t> constrained_;
};

Mesh build_grid_mesh(std::size_t nx, std::size_t ny, double elem_size);

/// Both in-plane DOFs of every node on the y = 0 edge, ascending.
std::vector<std::size_t> supported_edge_dofs(const Mesh& mesh);

std::array<std::size_t, 4> element_node_ids(const Mesh& mesh, std::size_t e);

}  // namespace neuroskin
