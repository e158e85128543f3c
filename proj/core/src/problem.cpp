#include "chid/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "chid/error.hpp"
#include "chid/parallel.hpp"
#include "chid/quadrature.hpp"

namespace chid {
namespace {

// Values at one quadrature point handed to a column/rhs kernel.
struct PointData {
  double phi;
  double dphi;
  double d3phi;
  double dmu;
};

struct Kernel {
  // coefficient multiplying theta_j(phi) psi_i' for each column group
  std::vector<std::function<double(const PointData&)>> groups;
  // integrand multiplying psi_i' in the rhs correction (subtracted)
  std::function<double(const PointData&)> rhs;
  bool needs_mu = false;
  const ParameterFunction* potential = nullptr;
};

void validate_indices(const ObservationData& data,
                      std::span<const std::size_t> indices) {
  if (indices.empty()) throw ValidationError("no data instants selected");
  for (std::size_t k : indices) {
    if (k == 0 || k >= data.size()) {
      throw ValidationError("data index " + std::to_string(k) +
                            " is outside 1.." + std::to_string(data.size() - 1));
    }
  }
}

AssembledProblem assemble(ProblemKind kind, const ObservationData& data,
                          double gamma, std::span<const std::size_t> indices,
                          const AssemblyOptions& options, const Kernel& kernel) {
  validate_indices(data, indices);
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  const auto space = spline_space(options.grid);
  const std::size_t nparam = space->size();
  const std::size_t ngroups = kernel.groups.size();
  const auto& basis = data.basis;
  const auto& mesh = basis.mesh();
  const auto ndof = static_cast<Eigen::Index>(basis.dof_count());
  const auto& rule = gauss_legendre(options.quadrature_points);
  const GramPair grams = assemble_grams(basis);

  AssembledProblem p;
  p.kind = kind;
  p.grid = options.grid;
  p.data_fingerprint = data.fingerprint();
  p.M = std::make_shared<const GramFactor>(grams.h1);
  const RegularizerGram rg = assemble_param_gram(options.grid);
  const auto np = static_cast<Eigen::Index>(nparam);
  p.R = Eigen::MatrixXd::Zero(np * static_cast<Eigen::Index>(ngroups),
                              np * static_cast<Eigen::Index>(ngroups));
  for (std::size_t g = 0; g < ngroups; ++g) {
    const auto o = static_cast<Eigen::Index>(g) * np;
    p.R.block(o, o, np, np) = rg.R;
  }
  p.blocks.resize(indices.size());

  parallel_for(indices.size(), options.threads, [&](std::size_t b) {
    const std::size_t k = indices[b];
    const PeriodicField phi = data.field(k);
    const PeriodicField lap = projected_laplacian(phi);
    PeriodicField mu{basis, Eigen::VectorXd()};
    if (kernel.needs_mu) {
      mu = chemical_potential_from_data(data, k, gamma, *kernel.potential);
    }
    TimeBlock& blk = p.blocks[b];
    blk.time = data.times[k];
    blk.index = k;
    blk.T = Eigen::MatrixXd::Zero(ndof, np * static_cast<Eigen::Index>(ngroups));
    blk.y = grams.l2 * data.time_derivative_field(k).coeffs;
    std::vector<double> theta(nparam);
    for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
      const auto dofs = basis.local_dofs(cell);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double u = rule.points[q];
        const double w = rule.weights[q] * mesh.h();
        PointData pd{phi.eval_local(cell, u, 0), phi.eval_local(cell, u, 1),
                     lap.eval_local(cell, u, 1),
                     kernel.needs_mu ? mu.eval_local(cell, u, 1) : 0.0};
        if (!(std::abs(pd.phi) <= 1.0)) {
          throw ValidationError("data value " + std::to_string(pd.phi) +
                                " at t = " + std::to_string(blk.time) +
                                " lies outside [-1, 1]");
        }
        space->basis(pd.phi, 0, theta);
        const auto dpsi = basis.shape(u, 1);
        const double r = kernel.rhs ? kernel.rhs(pd) : 0.0;
        for (std::size_t g = 0; g < ngroups; ++g) {
          const double coef = w * kernel.groups[g](pd);
          const auto o = static_cast<Eigen::Index>(g) * np;
          for (std::size_t a = 0; a < basis.local_count(); ++a) {
            const auto row = static_cast<Eigen::Index>(dofs[a]);
            const double cd = coef * dpsi[a];
            for (std::size_t j = 0; j < nparam; ++j) {
              blk.T(row, o + static_cast<Eigen::Index>(j)) += cd * theta[j];
            }
          }
        }
        if (r != 0.0) {
          for (std::size_t a = 0; a < basis.local_count(); ++a) {
            blk.y(static_cast<Eigen::Index>(dofs[a])) -= w * r * dpsi[a];
          }
        }
      }
    }
  });
  return p;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::identify_f: return "identify-f";
    case ProblemKind::identify_b: return "identify-b";
    case ProblemKind::identify_joint: return "identify-joint";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "identify-f") return ProblemKind::identify_f;
  if (name == "identify-b") return ProblemKind::identify_b;
  if (name == "identify-joint") return ProblemKind::identify_joint;
  throw ValidationError("unknown problem kind '" + name + "'");
}

Eigen::Index AssembledProblem::rows() const {
  Eigen::Index r = 0;
  for (const auto& b : blocks) r += b.T.rows();
  return r;
}

Eigen::MatrixXd AssembledProblem::stacked_T() const {
  Eigen::MatrixXd out(rows(), cols());
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.T.rows()) = b.T;
    r += b.T.rows();
  }
  return out;
}

Eigen::VectorXd AssembledProblem::stacked_y() const {
  Eigen::VectorXd out(rows());
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.segment(r, b.y.size()) = b.y;
    r += b.y.size();
  }
  return out;
}

double AssembledProblem::residual_norm(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (const auto& b : blocks) {
    const double d = M->dual_norm(b.T * x - b.y);
    sum += d * d;
  }
  return std::sqrt(sum);
}

AssembledProblem assemble_identify_f(const ObservationData& data, double gamma,
                                     const ParameterFunction& mobility,
                                     std::span<const std::size_t> indices,
                                     const AssemblyOptions& options) {
  if (sampled_minimum(mobility) <= 0.0) {
    throw ValidationError("known mobility is not positive on [-1, 1]");
  }
  Kernel k;
  k.groups.emplace_back([](const PointData& pd) { return -pd.dphi; });
  k.rhs = [&](const PointData& pd) {
    return gamma * mobility.eval(pd.phi, 0) * pd.d3phi;
  };
  return assemble(ProblemKind::identify_f, data, gamma, indices, options, k);
}

AssembledProblem assemble_identify_b(const ObservationData& data, double gamma,
                                     const ParameterFunction& potential,
                                     std::span<const std::size_t> indices,
                                     const AssemblyOptions& options) {
  Kernel k;
  k.groups.emplace_back([](const PointData& pd) { return -pd.dmu; });
  k.needs_mu = true;
  k.potential = &potential;
  return assemble(ProblemKind::identify_b, data, gamma, indices, options, k);
}

AssembledProblem assemble_identify_joint(const ObservationData& data,
                                         double gamma,
                                         std::span<const std::size_t> indices,
                                         const AssemblyOptions& options) {
  Kernel k;
  k.groups.emplace_back([gamma](const PointData& pd) { return gamma * pd.d3phi; });
  k.groups.emplace_back([](const PointData& pd) { return -pd.dphi; });
  AssembledProblem p =
      assemble(ProblemKind::identify_joint, data, gamma, indices, options, k);
  std::vector<std::size_t> distinct(indices.begin(), indices.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) {
    p.warnings.emplace_back(
        "joint identification from a single instant: rank deficiency expected");
  }
  return p;
}

}  // namespace chid
