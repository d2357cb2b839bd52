#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fracdecay/coefficient.hpp"
#include "fracdecay/decayfit.hpp"
#include "fracdecay/specfun.hpp"
#include "fracdecay/time_grid.hpp"
#include "fracdecay/trace.hpp"

namespace fracdecay::spectral {

enum class Boundary { dirichlet, neumann };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Laplacian eigenpairs on (0,L) or (0,Lx)x(0,Ly), ascending eigenvalues, with a
/// composite Gauss-Legendre rule for inner products.
class EigenSystem {
 public:
  static EigenSystem interval(double length, Boundary bc, int modes = 64);
  static EigenSystem rectangle(double lx, double ly, Boundary bc, int modes = 64);

  int dimension() const { return ly_ > 0.0 ? 2 : 1; }
  int size() const { return static_cast<int>(eigenvalues_.size()); }
  Boundary boundary() const { return bc_; }
  double length_x() const { return lx_; }
  double length_y() const { return ly_; }
  double eigenvalue(int k) const { return eigenvalues_.at(k); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// Smallest positive eigenvalue (lambda_1 for Dirichlet, lambda_2 for Neumann).
  double first_positive_eigenvalue() const;
  double eigenfunction(int k, Point p) const;

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  EigenSystem() = default;
  void build_quadrature();
  double axis_function(int index, double length, double x) const;

  double lx_ = 0.0;
  double ly_ = 0.0;
  Boundary bc_ = Boundary::dirichlet;
  std::vector<double> eigenvalues_;
  std::vector<std::pair<int, int>> indices_;
  std::vector<Point> nodes_;
  std::vector<double> weights_;
};

struct Projection {
  std::vector<double> coefficients;
  double norm_sq = 0.0;
  double parseval_defect = 0.0;
};

Projection project_initial_data(const EigenSystem& sys, const std::function<double(Point)>& u0);

/// u_k(t) = u0k E_{alpha,1+beta/alpha,beta/alpha}(-lambda_k t^{alpha+beta}).
SolutionTrace solve_subdiffusion(const EigenSystem& sys, double alpha, double beta, std::span<const double> u0k,
                                 std::span<const double> times, const specfun::SeriesAccuracy& acc = {});

/// d^alpha u_k + lambda_k a(t) u_k = 0 by L1 stepping, one mode at a time.
SolutionTrace solve_subdiffusion_l1(const EigenSystem& sys, double alpha, const Coefficient& coeff,
                                    std::span<const double> u0k, const TimeGrid& grid);

/// u_k(t) = u0k exp(-lambda_k int_0^t a).
SolutionTrace solve_heat_general(const EigenSystem& sys, const Coefficient& coeff, std::span<const double> u0k,
                                 std::span<const double> times);

decayfit::DecayReport verify_dirichlet_sandwich(const SolutionTrace& trace, const EigenSystem& sys, double alpha,
                                                double beta);
decayfit::DecayReport verify_neumann(const SolutionTrace& trace, const EigenSystem& sys, double alpha, double beta,
                                     double u00, double u01);
decayfit::DecayReport verify_general_coefficient_upper(const SolutionTrace& trace, double alpha, double kappa,
                                                       double beta, const specfun::SeriesAccuracy& acc = {});

/// Field values of sum_k c_k e_k at the given points.
std::vector<double> reconstruct(const EigenSystem& sys, std::span<const double> modal, std::span<const Point> points);
/// L2 norm of the reconstructed field under the system quadrature.
double quadrature_norm(const EigenSystem& sys, std::span<const double> modal);

}  // namespace fracdecay::spectral
