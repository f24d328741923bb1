#include "cocycle/model.hpp"

#include <algorithm>

namespace cocycle {

void CocycleSpec::validate() const {
    if (omega.rational) throw DomainError("cocycle analysis requires an irrational rotation number");
    if (!(epsilon > 0 && epsilon < eps0))
        throw DomainError("epsilon must lie in (0, eps0)");
    if (phases.size() == 0) throw DomainError("empty phase family");
}

FactorSequence eval_factors(const CocycleSpec& spec, double x) {
    FactorSequence seq;
    seq.delta = 1;
    for (std::size_t k = 0; k < spec.phases.size(); ++k) {
        const Factor f{spec.phi(k, x), spec.lambda(k, x)};
        seq.delta = std::min(seq.delta, std::abs(std::cos(f.phi)));
        seq.factors.push_back(f);
    }
    return seq;
}

}  // namespace cocycle
