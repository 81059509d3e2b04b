// Average spread time per family, both models, from the natural worst start.
#include <cstdio>

#include "gossip_lab/estimators.hpp"
#include "gossip_lab/generators.hpp"

using namespace gossip_lab;

int main() {
    const std::size_t n = 64;
    std::printf("%-22s %10s %10s %8s\n", "graph", "sync", "async", "ratio");
    for (const FamilySpec& spec : {FamilySpec::path(n), FamilySpec::star(n), FamilySpec::complete(n),
                                   FamilySpec::double_star(n), FamilySpec::diamonds(3, 20), FamilySpec::hypercube(6)}) {
        const Graph g = generate_family(spec);
        // vertex 1 is a leaf of the star and of the double star; an interior vertex elsewhere
        const Vertex start = spec.family == Family::path ? 0 : 1;
        const Estimate s = estimate_average_spread(g, start, Model::sync, Variant::push_pull, 2000, 7);
        const Estimate a = estimate_average_spread(g, start, Model::async, Variant::push_pull, 2000, 7);
        std::printf("%-22s %10.3f %10.3f %8.3f\n", spec.label().c_str(), s.point, a.point, s.point / a.point);
    }
}
