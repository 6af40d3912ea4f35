#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vessel {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

/// Nodal 2D fields (coordinates, displacements, velocities): one row per node,
/// columns are the (z, r) components.
template <typename Scalar>
using NodalField2 = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

using Index = Eigen::Index;

/// Every physical constant of the model in CGS units. Values are scenario
/// inputs; the defaults describe the desk-scale demo vessel.
template <typename Scalar>
struct PhysicalParams {
  Scalar rho = 1.0;      ///< fluid density [g/cm^3]
  Scalar rho_w = 1.5;    ///< wall density [g/cm^3]
  Scalar h0 = 0.25;      ///< wall thickness [cm]
  Scalar nu = 0.035;     ///< kinematic viscosity [cm^2/s]
  Scalar a = 1.0e4;      ///< string wave coefficient [cm^2/s^2]
  Scalar b = 8.0e5;      ///< elastic foundation coefficient [1/s^2]
  Scalar c = 2.0;        ///< viscoelastic coefficient [cm^2/s]
  Scalar p0 = 0.0;       ///< external (reference) pressure [dyn/cm^2]
  Scalar R0 = 0.5;       ///< reference radius [cm]
  Scalar L = 2.5;        ///< vessel length [cm]
};

/// Thrown when a linear solve does not meet its residual contract.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a mesh update produces a non-positive triangle area.
class MeshValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vessel
