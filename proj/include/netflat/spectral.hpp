#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "netflat/flat.hpp"
#include "netflat/laplacian.hpp"
#include "netflat/propagator.hpp"
#include "netflat/weights.hpp"

namespace netflat {

// Finite-section symmetric realization of the operator at depth D. Tail-cut
// vertices on dirichlet tails are clamped to zero; other cut vertices get a
// free truncation row. The section matrix is symmetrized by the mu^(1/2)
// conjugation, so a standard self-adjoint eigensolver applies.
//
// Compressed far fields carry relaxation rates that grow geometrically with
// depth, which would swamp a dense eigensolver (its absolute accuracy is
// eps * |A|). Vertices whose rate exceeds kFastRateThreshold are therefore
// removed by star-mesh (Kron) elimination of the conductance matrix before
// the eigensolve: exact for the equilibrium coupling, and the dynamic error
// of treating those vertices as instantaneously relaxed is below
// lambda_slow / threshold, well under the refinement tolerance. Their values
// are reconstructed as conductance-weighted means of their neighbors.
class SpectralModel {
public:
    const std::vector<VertexId>& section() const noexcept { return section_; }
    bool is_dirichlet(int section_index) const {
        return dirichlet_[static_cast<size_t>(section_index)];
    }
    int kept_count() const noexcept { return static_cast<int>(kept_vertices_.size()); }
    int depth() const noexcept { return depth_; }
    double symmetry_defect() const noexcept { return symmetry_defect_; }

    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }

    // Values of f at the kept (non-dirichlet) section vertices.
    Eigen::VectorXd restrict(const FlatFunction& f, int component = 0) const;
    // exp(-t A) applied in the original coordinates.
    Eigen::VectorXd evolve(const Eigen::VectorXd& kept_values, double t) const;

    // Value at a section vertex: kept entry, or exactly 0 at dirichlet rows.
    double value_at(const Eigen::VectorXd& kept_values, const VertexId& v) const;
    bool in_section(const VertexId& v) const;

    double mu_at_kept(int kept_index) const {
        return mu_[static_cast<size_t>(kept_index)];
    }
    const std::vector<VertexId>& kept_vertices() const noexcept { return kept_vertices_; }
    int eliminated_count() const noexcept { return static_cast<int>(eliminated_.size()); }

    static constexpr double kFastRateThreshold = 1e8;

    friend SpectralModel build_spectral_model_masked(
        const Weighting& weighting, const std::function<bool(const VertexId&)>& dirichlet,
        int depth);

private:
    struct EliminationStep {
        int vertex;  // kept index
        std::vector<std::pair<int, double>> neighbor_weights;  // kept index, C share
    };

    std::shared_ptr<const GraphModel> graph_;
    std::vector<VertexId> section_;     // sorted ball vertices
    std::vector<bool> dirichlet_;       // per section index
    std::vector<int> kept_;             // section index -> kept index (-1 for dirichlet)
    std::vector<VertexId> kept_vertices_;
    std::vector<double> mu_;            // per kept vertex
    std::vector<EliminationStep> eliminated_;  // in elimination order
    std::vector<int> remaining_;               // kept indices in the eigensystem
    std::vector<int> kept_to_remaining_;       // -1 when eliminated
    Eigen::VectorXd sqrt_mu_;                  // over remaining
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    int depth_ = 0;
    double symmetry_defect_ = 0.0;
};

// Section with dirichlet clamping on the cut vertices of omega tails and
// free truncation elsewhere.
SpectralModel build_spectral_model(const Weighting& weighting, const BoundarySet& omega,
                                   int depth);
// Explicit dirichlet mask (used for finite graphs and tests).
SpectralModel build_spectral_model_masked(
    const Weighting& weighting, const std::function<bool(const VertexId&)>& dirichlet,
    int depth);

// Eigenfunction-expansion evolution of f restricted to the section. The
// result carries the evolved values on the section; beyond it the input's
// flat extension is kept, so only section values are meaningful for t > 0.
FlatFunction spectral_propagate(const SpectralModel& model, const FlatFunction& f, double t);

// 1 / (4 mu_total diam). The diameter is computed on a generated region
// augmented with one pseudo-end per tail at its exact remaining-series
// distance; for multi-slot tails the straight-descent remainder makes the
// result an upper bound on the true diameter, keeping the lower bound valid.
double dirichlet_lower_bound(std::shared_ptr<const GraphModel> g, const WeightPlan& plan);

struct ConvergenceRow {
    int n = 0;
    double t = 0.0;
    double sup_diff = 0.0;
    int depth_used = 0;
    double refinement_defect = 0.0;
};

struct ConvergenceSetup {
    std::vector<double> t_grid;
    std::vector<int> n_list;
    int initial_depth = 16;
    int max_depth = 4096;
    int window_radius = 8;
    double tol = 1e-8;
    double refine_tol = 1e-6;
    int threads = 1;
};

// Strong-convergence experiment: for each n, evolve f through the spectral
// realization of the hybrid-weight operator and report the sup difference
// against the series semigroup on the evaluation window.
std::vector<ConvergenceRow> linear_convergence_experiment(const Laplacian& base,
                                                          const WeightPlan& plan,
                                                          const BoundarySet& omega,
                                                          const FlatFunction& f,
                                                          const ConvergenceSetup& setup);

std::vector<VertexId> evaluation_window(const GraphModel& g, int radius);

}  // namespace netflat
