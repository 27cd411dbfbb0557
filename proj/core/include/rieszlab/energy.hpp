#pragma once

#include "rieszlab/configuration.hpp"
#include "rieszlab/cs_extension.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/measure.hpp"
#include "rieszlab/potential.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace riesz {

// H_N = 1/2 sum_{i != j} g(x_i - x_j) + N sum_i V(x_i).
double hamiltonian(const Configuration& X, const Potential& V, const RieszParams& p);
// 1/2 sum_{i != j} g(x_i - x_j) only.
double pair_energy(const Configuration& X, const RieszParams& p);

// F_N(X, mu) = 1/2 [ sum_{i != j} g(x_i - x_j) - 2 N sum_i h^mu(x_i) + N^2 iint g dmu dmu ].
double next_order_energy(const Configuration& X, const MeasurePotential& pot, const RieszParams& p);
double next_order_energy(const Configuration& X, const GridMeasure& mu, const RieszParams& p);

// |H_N - N^2 E(mu_V) - N sum zeta(x_i) - F_N|, every term evaluated for the
// piecewise-constant mu_V with exact cell integrals.
double splitting_residual(const Configuration& X, const Potential& V, const EquilibriumResult& eq);

// r_i = 1/4 min(min_{j != i} |x_i - x_j|, N^{-1/d}).
std::vector<double> minimal_distances(const Configuration& X, const RieszParams& p);

// (g(x) - g(eta))_+ as a function of |x|.
double truncation_f(double eta, double r, const RieszParams& p);
// int f_eta(x - c) dmu(x) for the piecewise-constant mu (1-D, exact).
double truncation_mass(double eta, double c, const GridMeasure& mu, const RieszParams& p);

struct Box {
    std::array<double, 2> center{0.0, 0.0};
    double side = 1.0;
    double lo(int a = 0) const { return center[a] - 0.5 * side; }
    double hi(int a = 0) const { return center[a] + 0.5 * side; }
    bool contains(std::array<double, 2> x, int d) const;
};

struct LocalEnergyReport {
    Box box;
    // int_{Q x [-height, height]} |y|^gamma |grad h_{N,r}|^2
    double value = 0.0;
    std::size_t point_count = 0;
    double height = 0.0;
    // analytic truncated self-energies vs quadrature of the cross terms
    double self_part = 0.0;
    double cross_part = 0.0;
    std::size_t quadrature_points = 0;
};

struct ElectricOptions {
    int gauss = 3;
    // cells within this many cell sizes of a particle are subdivided
    double refine_factor = 2.0;
    // finest sub-cell relative to r_i
    double finest = 1.0 / 16.0;
    // particles farther than this many base-cell sizes enter through the
    // interpolated smooth field; 0 evaluates every particle at every point
    double far_factor = 8.0;
    double y_min_rel = 1e-7;
    double grading = 1.3;
    int max_points = 64;  // desk-scale cap on N
};

// Extended-space energies for a fixed measure: tabulates the measure field on
// graded y levels once, then integrates |y|^gamma |grad h_{N,r}|^2 for any
// configuration. Box x-edges snap to the measure's cell faces. d = 1.
class ElectricEnergy {
public:
    ElectricEnergy(const GridMeasure& mu, const RieszParams& p, ElectricOptions opt = {});
    ~ElectricEnergy();
    ElectricEnergy(ElectricEnergy&&) noexcept;

    // Region Q x [-height, height]; height defaults to the box side.
    LocalEnergyReport local(const Configuration& X, const Box& box, double height = -1.0) const;
    // Whole extended plane: the region is enlarged until the remaining dipole
    // tail is negligible.
    double global(const Configuration& X) const;
    // F_N from the electric formulation:
    //   (1 / (2 c_ext)) (int |y|^gamma |grad h_{N,r}|^2 - c_ext sum g(r_i)) - N sum int f_{r_i} dmu
    double next_order_energy(const Configuration& X) const;

    const GridMeasure& measure() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Vector field psi on R (d = 1) with its derivative.
struct VectorField1D {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    static VectorField1D constant(double c);
    static VectorField1D identity();
    static VectorField1D scaled(const VectorField1D& f, double lambda);
};

// A_n = 1/2 iint_{x != y} D^n g(x - y) : (psi(x) - psi(y))^n d(fluct)(x) d(fluct)(y),
// fluct = sum delta_{x_i} - N mu, n in {1, 2, 3}.
class Commutator {
public:
    Commutator(const GridMeasure& mu, const RieszParams& p, VectorField1D psi, int n);
    double operator()(const Configuration& X) const;
    // The X-independent term N^2/2 iint k dmu dmu divided by N^2.
    double measure_term() const { return mm_; }

private:
    double kernel(double x, double y) const;
    double against_measure(double x) const;
    GridMeasure mu_;
    RieszParams p_;
    VectorField1D psi_;
    int n_;
    double prefactor_;
    double mm_ = 0.0;
};

double commutator_An(const Configuration& X, const GridMeasure& mu, const RieszParams& p,
                     const VectorField1D& psi, int n);

}  // namespace riesz
