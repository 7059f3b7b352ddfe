#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tresca/errors.hpp"
#include "tresca/grid.hpp"

namespace tresca {

/// Nodal displacement or velocity: column k holds node k (split copies included).
using VectorField = Eigen::Matrix2Xd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

template <typename Scalar>
using Tensor2 = Eigen::Matrix<Scalar, 2, 2>;

/// Per-node isotropic material (defined on the base lattice).
struct MaterialField {
  Eigen::ArrayXd rho;
  Eigen::ArrayXd lambda;
  Eigen::ArrayXd mu;

  static MaterialField uniform(const Grid& grid, double rho, double lambda, double mu);

  /// Throws InvalidArgument unless rho > 0, mu > 0, lambda + 2 mu > 0 everywhere.
  void validate(const Grid& grid) const;
  double max_p_speed() const;
  double min_s_speed() const;
};

template <typename Scalar>
Tensor2<Scalar> symmetric_part(const Tensor2<Scalar>& grad) {
  return Scalar(0.5) * (grad + grad.transpose());
}

/// Isotropic Hooke law: 2 mu eps + lambda tr(eps) I.
template <typename Derived>
Tensor2<typename Derived::Scalar> stress(const Eigen::MatrixBase<Derived>& eps,
                                         typename Derived::Scalar lambda,
                                         typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  return Scalar(2) * mu * eps + lambda * eps.trace() * Tensor2<Scalar>::Identity();
}

template <typename Scalar>
struct TractionParts {
  Scalar normal;
  Eigen::Matrix<Scalar, 2, 1> tangential;
};

/// Normal scalar and tangential vector of a traction vector t on a surface with unit normal n.
template <typename DerivedT, typename DerivedN>
TractionParts<typename DerivedT::Scalar> split_traction(const Eigen::MatrixBase<DerivedT>& t,
                                                        const Eigen::MatrixBase<DerivedN>& n) {
  using Scalar = typename DerivedT::Scalar;
  using std::abs;
  if (abs(n.norm() - Scalar(1)) > Scalar(1e-12))
    throw InvalidArgument("traction decomposition needs a unit normal");
  const Scalar sn = t.dot(n);
  return {sn, t - sn * n};
}

/// Splits sigma n into its normal scalar and tangential vector.
template <typename DerivedS, typename DerivedN>
TractionParts<typename DerivedS::Scalar> traction_decompose(const Eigen::MatrixBase<DerivedS>& sigma,
                                                            const Eigen::MatrixBase<DerivedN>& n) {
  return split_traction((sigma * n).eval(), n);
}

/// Lumped bilinear-element discretization of div sigma on a split-node mesh.
///
/// The stiffness is assembled from exact 2x2-Gauss element matrices; nodal
/// masses are rho h^2 / 4 per adjacent element, so a plus or minus fault copy
/// carries the mass of its own half-cell only. Elements never straddle the
/// fault, so no stencil differences across it.
class ElasticOperator {
public:
  ElasticOperator(const Mesh& mesh, const MaterialField& material);

  const Mesh& mesh() const { return mesh_; }
  const MaterialField& material() const { return material_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// Lumped mass per node.
  const Eigen::VectorXd& mass() const { return mass_; }
  /// Lumped area per node (mass with unit density).
  const Eigen::VectorXd& area() const { return area_; }
  /// 1 for unconstrained dofs, 0 on the Dirichlet boundary (per dof).
  const Eigen::VectorXd& free_dofs() const { return free_; }
  Index dofs() const { return 2 * mesh_.node_count(); }

  /// Fault tributary length per split node.
  double fault_length() const { return mesh_.grid().h; }

  /// -K u at every node.
  VectorField internal_force(const VectorField& u) const;
  /// div sigma(u): -K u divided by the lumped mass. At boundary and split
  /// nodes this is the one-sided half-cell value without boundary traction.
  VectorField divergence_of_stress(const VectorField& u) const;

  double strain_energy(const VectorField& u) const;
  double bilinear(const VectorField& a, const VectorField& b) const;

  Eigen::Vector2d element_lame(Index e) const;

  /// Element matrices for unit lambda (mu = 0) and unit mu (lambda = 0).
  static const Eigen::Matrix<double, 8, 8>& unit_lambda_block();
  static const Eigen::Matrix<double, 8, 8>& unit_mu_block();

private:
  Mesh mesh_;
  MaterialField material_;
  SparseMatrix stiffness_;
  Eigen::VectorXd mass_;
  Eigen::VectorXd area_;
  Eigen::VectorXd free_;
};

/// Cell-centre symmetric gradient per element (central differences of the
/// four corners, each side using its own fault copy).
std::vector<Tensor2<double>> strain(const Mesh& mesh, const VectorField& u);

/// Cell stress from cell strain with element-averaged Lame parameters.
std::vector<Tensor2<double>> stress(const ElasticOperator& op,
                                    const std::vector<Tensor2<double>>& eps);

/// div sigma(u) per node; convenience wrapper over ElasticOperator.
VectorField elastic_operator(const ElasticOperator& op, const VectorField& u);

/// Builds a nodal field from a function of the node position.
template <typename F>
VectorField sample_field(const Mesh& mesh, F&& f) {
  VectorField u(2, mesh.node_count());
  for (Index k = 0; k < mesh.node_count(); ++k)
    u.col(k) = f(mesh.coord(k));
  return u;
}

} // namespace tresca
