#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdelab/core.hpp"
#include "sdelab/rng.hpp"

namespace sdelab {

/// How initial states x0 are drawn, one draw per path, keyed by
/// (seed, path, component) so ensembles rebuild bit-identically.
struct InitialLaw {
    enum class Kind { fixed, gaussian };
    Kind kind = Kind::fixed;
    std::vector<double> mean;     // or the fixed value
    std::vector<double> std_dev;  // gaussian only; componentwise

    void sample(std::uint64_t seed, std::uint32_t path, std::span<double> out) const;
    std::string describe() const;
};

InitialLaw fixed_initial(std::vector<double> value);
InitialLaw gaussian_initial(std::vector<double> mean, std::vector<double> std_dev);

/// n_paths independent trajectories on a grid, plus everything needed to
/// reproduce them.
struct StochasticEnsemble {
    UniformGrid grid;
    std::size_t dim = 1;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::string initial_law;
    std::vector<double> states;  // n_paths x n x dim, path-major

    double state(std::size_t path, std::size_t k, std::size_t d = 0) const {
        return states[(path * grid.n + k) * dim + d];
    }
    double& state(std::size_t path, std::size_t k, std::size_t d = 0) {
        return states[(path * grid.n + k) * dim + d];
    }
    std::span<const double> state_row(std::size_t path, std::size_t k) const {
        return {states.data() + (path * grid.n + k) * dim, dim};
    }
};

}  // namespace sdelab
