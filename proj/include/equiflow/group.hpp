#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace equiflow {

// Finite cyclic group C_u of planar rotations. Element k is the rotation by
// angle 2*pi*k/u.
struct GroupSpec {
  int order;

  explicit GroupSpec(int u) : order(u) {
    if (u < 1) throw std::invalid_argument("group order must be >= 1");
  }
  bool operator==(const GroupSpec& o) const { return order == o.order; }
};

struct GroupElement {
  int index;  // in [0, order)
  int order;

  GroupElement(int k, const GroupSpec& spec)
      : index(((k % spec.order) + spec.order) % spec.order), order(spec.order) {}

  double angle() const { return 2.0 * M_PI * index / order; }

  GroupElement compose(const GroupElement& other) const {
    require_same_order(other);
    return GroupElement(index + other.index, GroupSpec(order));
  }

  GroupElement inverse() const { return GroupElement(order - index, GroupSpec(order)); }

  bool is_identity() const { return index == 0; }

  void require_same_order(const GroupElement& other) const {
    if (order != other.order)
      throw std::invalid_argument("group order mismatch");
  }
};

enum class BlockType { Trivial, Standard, Regular };

inline int block_dim(BlockType b, int order) {
  switch (b) {
    case BlockType::Trivial: return 1;
    case BlockType::Standard: return 2;
    case BlockType::Regular: return order;
  }
  return 0;
}

// A formal direct sum of irreducible/regular blocks over C_u, realized as a
// block-diagonal orthogonal matrix action.
struct RepSpec {
  int order;                     // group order u
  std::vector<BlockType> blocks;

  RepSpec() : order(1) {}
  RepSpec(int u, std::vector<BlockType> bs) : order(u), blocks(std::move(bs)) {
    if (u < 1) throw std::invalid_argument("group order must be >= 1");
  }

  int total_dim() const {
    int d = 0;
    for (BlockType b : blocks) d += block_dim(b, order);
    return d;
  }

  // n consecutive copies of this rep (e.g. per-step rep -> whole-chunk rep)
  RepSpec repeated(int n) const {
    std::vector<BlockType> bs;
    bs.reserve(blocks.size() * n);
    for (int i = 0; i < n; ++i)
      for (BlockType b : blocks) bs.push_back(b);
    return RepSpec(order, std::move(bs));
  }

  bool operator==(const RepSpec& o) const {
    return order == o.order && blocks == o.blocks;
  }

  std::vector<std::string> tags() const;
  static RepSpec from_tags(int order, const std::vector<std::string>& tags);
};

// Convenience builders.
RepSpec rep_regular_channels(int order, int channels);
RepSpec rep_trivial_channels(int order, int channels);

// Manipulator end-effector action block: rho1^3 (6D rotation) + (rho1+rho0)
// (xy translation + z) + rho0 (gripper).
RepSpec rep_action10(int order);

// Dense block-diagonal matrix of the rep action, row-major dim x dim.
std::vector<double> realize(const RepSpec& rep, const GroupElement& g);

// y = realize(rep, g) * x without materializing the matrix.
void act(const RepSpec& rep, const GroupElement& g, const double* x, double* y);
std::vector<double> act(const RepSpec& rep, const GroupElement& g,
                        const std::vector<double>& v);

// An n-step sequence of action vectors.
struct Trajectory {
  int steps = 0;
  int step_dim = 0;
  std::vector<double> data;  // steps * step_dim, row-major

  Trajectory() = default;
  Trajectory(int n, int d) : steps(n), step_dim(d), data((size_t)n * d, 0.0) {}

  double* step(int i) { return data.data() + (size_t)i * step_dim; }
  const double* step(int i) const { return data.data() + (size_t)i * step_dim; }
};

// Stepwise application of the per-step rep.
Trajectory act_trajectory(const RepSpec& rep_per_step, const GroupElement& g,
                          const Trajectory& traj);

}  // namespace equiflow
