#pragma once

#include "magneto/tri_mesh.hpp"

namespace magneto {

struct RemeshOptions {
    int max_iterations = 10;
    // Extra tangential relaxation sweeps after the last topological pass.
    int relax_sweeps = 8;
    // Spring sweeps towards the mean edge length after relaxation.
    int equalize_sweeps = 20;
    // Share of edges that must land in [0.7, 1.3] x target.
    double required_fraction = 0.9;
};

struct EdgeLengthStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    // Fraction of edges within [lo, hi] x reference.
    double fraction_within(double reference, double lo, double hi) const;
    std::vector<double> lengths;
};

EdgeLengthStats edge_lengths(const TriMesh &mesh);

// Incremental isotropic remeshing: split long edges, collapse short ones,
// flip towards valence 6, then relax vertices tangentially and project them
// back onto the input surface. Open boundaries are kept on the input
// boundary and sharp boundary corners stay fixed.
TriMesh remesh_isotropic(const TriMesh &mesh, double target_edge, const RemeshOptions &options = {});

} // namespace magneto
