#include "equiflow/group.hpp"

#include <cstring>

namespace equiflow {

std::vector<std::string> RepSpec::tags() const {
  std::vector<std::string> out;
  out.reserve(blocks.size());
  for (BlockType b : blocks) {
    switch (b) {
      case BlockType::Trivial: out.push_back("triv"); break;
      case BlockType::Standard: out.push_back("std"); break;
      case BlockType::Regular: out.push_back("reg"); break;
    }
  }
  return out;
}

RepSpec RepSpec::from_tags(int order, const std::vector<std::string>& tags) {
  std::vector<BlockType> bs;
  bs.reserve(tags.size());
  for (const auto& t : tags) {
    if (t == "triv") bs.push_back(BlockType::Trivial);
    else if (t == "std") bs.push_back(BlockType::Standard);
    else if (t == "reg") bs.push_back(BlockType::Regular);
    else throw std::invalid_argument("unknown rep block tag: " + t);
  }
  return RepSpec(order, std::move(bs));
}

RepSpec rep_regular_channels(int order, int channels) {
  return RepSpec(order, std::vector<BlockType>(channels, BlockType::Regular));
}

RepSpec rep_trivial_channels(int order, int channels) {
  return RepSpec(order, std::vector<BlockType>(channels, BlockType::Trivial));
}

RepSpec rep_action10(int order) {
  using B = BlockType;
  return RepSpec(order, {B::Standard, B::Standard, B::Standard,  // 6D rotation
                         B::Standard, B::Trivial,                // xy + z
                         B::Trivial});                           // gripper
}

static void check_group(const RepSpec& rep, const GroupElement& g) {
  if (rep.order != g.order)
    throw std::invalid_argument("rep/group order mismatch");
}

std::vector<double> realize(const RepSpec& rep, const GroupElement& g) {
  check_group(rep, g);
  int d = rep.total_dim();
  std::vector<double> m((size_t)d * d, 0.0);
  int off = 0;
  double c = std::cos(g.angle());
  double s = std::sin(g.angle());
  for (BlockType b : rep.blocks) {
    switch (b) {
      case BlockType::Trivial:
        m[(size_t)off * d + off] = 1.0;
        off += 1;
        break;
      case BlockType::Standard:
        if (g.is_identity()) {
          m[(size_t)off * d + off] = 1.0;
          m[(size_t)(off + 1) * d + off + 1] = 1.0;
        } else {
          m[(size_t)off * d + off] = c;
          m[(size_t)off * d + off + 1] = -s;
          m[(size_t)(off + 1) * d + off] = s;
          m[(size_t)(off + 1) * d + off + 1] = c;
        }
        off += 2;
        break;
      case BlockType::Regular: {
        int u = rep.order;
        // shift coordinates by k: e_j -> e_{j+k}
        for (int j = 0; j < u; ++j) {
          int i = (j + g.index) % u;
          m[(size_t)(off + i) * d + off + j] = 1.0;
        }
        off += u;
        break;
      }
    }
  }
  return m;
}

void act(const RepSpec& rep, const GroupElement& g, const double* x, double* y) {
  check_group(rep, g);
  int off = 0;
  double c = std::cos(g.angle());
  double s = std::sin(g.angle());
  for (BlockType b : rep.blocks) {
    switch (b) {
      case BlockType::Trivial:
        y[off] = x[off];
        off += 1;
        break;
      case BlockType::Standard:
        if (g.is_identity()) {
          y[off] = x[off];
          y[off + 1] = x[off + 1];
        } else {
          double a0 = x[off], a1 = x[off + 1];
          y[off] = c * a0 - s * a1;
          y[off + 1] = s * a0 + c * a1;
        }
        off += 2;
        break;
      case BlockType::Regular: {
        int u = rep.order;
        for (int j = 0; j < u; ++j) y[off + (j + g.index) % u] = x[off + j];
        off += u;
        break;
      }
    }
  }
}

std::vector<double> act(const RepSpec& rep, const GroupElement& g,
                        const std::vector<double>& v) {
  if ((int)v.size() != rep.total_dim())
    throw std::invalid_argument("act: vector dimension mismatch");
  std::vector<double> out(v.size());
  act(rep, g, v.data(), out.data());
  return out;
}

Trajectory act_trajectory(const RepSpec& rep_per_step, const GroupElement& g,
                          const Trajectory& traj) {
  if (traj.step_dim != rep_per_step.total_dim())
    throw std::invalid_argument("act_trajectory: step dimension mismatch");
  Trajectory out(traj.steps, traj.step_dim);
  for (int i = 0; i < traj.steps; ++i)
    act(rep_per_step, g, traj.step(i), out.step(i));
  return out;
}

}  // namespace equiflow
