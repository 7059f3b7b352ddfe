#include "tresca/elastic.hpp"

#include <array>
#include <cmath>

namespace tresca {

MaterialField MaterialField::uniform(const Grid& grid, double rho, double lambda, double mu) {
  const Index n = grid.base_count();
  MaterialField m{Eigen::ArrayXd::Constant(n, rho), Eigen::ArrayXd::Constant(n, lambda),
                  Eigen::ArrayXd::Constant(n, mu)};
  m.validate(grid);
  return m;
}

void MaterialField::validate(const Grid& grid) const {
  const Index n = grid.base_count();
  if (rho.size() != n || lambda.size() != n || mu.size() != n)
    throw InvalidArgument("material fields must have one value per base node");
  if (!((rho > 0.0).all() && (mu > 0.0).all() && (lambda + 2.0 * mu > 0.0).all()))
    throw InvalidArgument("material needs rho > 0, mu > 0, lambda + 2 mu > 0");
  if (!(rho.allFinite() && lambda.allFinite() && mu.allFinite()))
    throw InvalidArgument("material must be finite");
}

double MaterialField::max_p_speed() const {
  return ((lambda + 2.0 * mu) / rho).sqrt().maxCoeff();
}

double MaterialField::min_s_speed() const { return (mu / rho).sqrt().minCoeff(); }

namespace {

constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};

// Strain-displacement rows (exx, eyy, gxy) at a natural point, unit spacing.
Eigen::Matrix<double, 3, 8> b_matrix(double xi, double eta) {
  Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
  for (int a = 0; a < 4; ++a) {
    // d/dx = 2 d/dxi for a unit square
    const double dx = 0.5 * kXi[a] * (1.0 + kEta[a] * eta);
    const double dy = 0.5 * kEta[a] * (1.0 + kXi[a] * xi);
    b(0, 2 * a) = dx;
    b(1, 2 * a + 1) = dy;
    b(2, 2 * a) = dy;
    b(2, 2 * a + 1) = dx;
  }
  return b;
}

Eigen::Matrix<double, 8, 8> element_block(double lambda, double mu) {
  Eigen::Matrix3d d;
  d << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;
  const double g = 1.0 / std::sqrt(3.0);
  Eigen::Matrix<double, 8, 8> k = Eigen::Matrix<double, 8, 8>::Zero();
  for (double xi : {-g, g})
    for (double eta : {-g, g}) {
      const auto b = b_matrix(xi, eta);
      k += 0.25 * b.transpose() * d * b; // det J = 1/4 on the unit square
    }
  return k;
}

} // namespace

const Eigen::Matrix<double, 8, 8>& ElasticOperator::unit_lambda_block() {
  static const Eigen::Matrix<double, 8, 8> k = element_block(1.0, 0.0);
  return k;
}

const Eigen::Matrix<double, 8, 8>& ElasticOperator::unit_mu_block() {
  static const Eigen::Matrix<double, 8, 8> k = element_block(0.0, 1.0);
  return k;
}

ElasticOperator::ElasticOperator(const Mesh& mesh, const MaterialField& material)
    : mesh_(mesh), material_(material) {
  material_.validate(mesh_.grid());
  const Index n = mesh_.node_count();
  const double h2 = mesh_.grid().h * mesh_.grid().h;
  mass_ = Eigen::VectorXd::Zero(n);
  area_ = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(mesh_.element_count()) * 64);
  for (Index e = 0; e < mesh_.element_count(); ++e) {
    const auto nodes = mesh_.element_nodes(e);
    double rho = 0;
    for (Index v : nodes)
      rho += 0.25 * material_.rho(mesh_.base_of(v));
    const Eigen::Vector2d lame = element_lame(e);
    const Eigen::Matrix<double, 8, 8> ke =
        lame(0) * unit_lambda_block() + lame(1) * unit_mu_block();
    for (int a = 0; a < 4; ++a) {
      mass_(nodes[a]) += 0.25 * rho * h2;
      area_(nodes[a]) += 0.25 * h2;
      for (int b = 0; b < 4; ++b)
        for (int ca = 0; ca < 2; ++ca)
          for (int cb = 0; cb < 2; ++cb)
            trip.emplace_back(2 * nodes[a] + ca, 2 * nodes[b] + cb, ke(2 * a + ca, 2 * b + cb));
    }
  }
  stiffness_.resize(2 * n, 2 * n);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
  stiffness_.makeCompressed();

  free_ = Eigen::VectorXd::Ones(2 * n);
  for (Index k = 0; k < n; ++k)
    if (mesh_.is_boundary(k))
      free_.segment<2>(2 * k).setZero();
}

Eigen::Vector2d ElasticOperator::element_lame(Index e) const {
  Eigen::Vector2d lame = Eigen::Vector2d::Zero();
  for (Index v : mesh_.element_nodes(e)) {
    const Index b = mesh_.base_of(v);
    lame += 0.25 * Eigen::Vector2d(material_.lambda(b), material_.mu(b));
  }
  return lame;
}

VectorField ElasticOperator::internal_force(const VectorField& u) const {
  VectorField f(2, u.cols());
  Eigen::Map<Eigen::VectorXd>(f.data(), f.size()) =
      -(stiffness_ * Eigen::Map<const Eigen::VectorXd>(u.data(), u.size()));
  return f;
}

VectorField ElasticOperator::divergence_of_stress(const VectorField& u) const {
  VectorField f = internal_force(u);
  for (Index k = 0; k < f.cols(); ++k)
    f.col(k) /= mass_(k);
  return f;
}

double ElasticOperator::bilinear(const VectorField& a, const VectorField& b) const {
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), a.size()), vb(b.data(), b.size());
  return va.dot(stiffness_ * vb);
}

double ElasticOperator::strain_energy(const VectorField& u) const { return 0.5 * bilinear(u, u); }

std::vector<Tensor2<double>> strain(const Mesh& mesh, const VectorField& u) {
  const double h = mesh.grid().h;
  std::vector<Tensor2<double>> eps(std::size_t(mesh.element_count()));
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto n = mesh.element_nodes(e);
    // gradient of the bilinear interpolant at the cell centre
    const Eigen::Vector2d dx = 0.5 * ((u.col(n[1]) + u.col(n[2])) - (u.col(n[0]) + u.col(n[3]))) / h;
    const Eigen::Vector2d dy = 0.5 * ((u.col(n[2]) + u.col(n[3])) - (u.col(n[0]) + u.col(n[1]))) / h;
    Tensor2<double> grad;
    grad.col(0) = dx;
    grad.col(1) = dy;
    eps[std::size_t(e)] = symmetric_part(grad);
  }
  return eps;
}

std::vector<Tensor2<double>> stress(const ElasticOperator& op,
                                    const std::vector<Tensor2<double>>& eps) {
  if (Index(eps.size()) != op.mesh().element_count())
    throw InvalidArgument("strain field does not match the mesh");
  std::vector<Tensor2<double>> sigma(eps.size());
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const Eigen::Vector2d lame = op.element_lame(Index(e));
    sigma[e] = stress(eps[e], lame(0), lame(1));
  }
  return sigma;
}

VectorField elastic_operator(const ElasticOperator& op, const VectorField& u) {
  if (u.cols() != op.mesh().node_count())
    throw InvalidArgument("displacement field does not match the mesh");
  return op.divergence_of_stress(u);
}

} // namespace tresca
