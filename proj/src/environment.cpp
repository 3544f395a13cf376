#include "hyts/environment.hpp"

#include "hyts/errors.hpp"

namespace hyts {

Environment::Environment(const HybridInstance& instance, std::uint64_t seed) : instance_(&instance), rng_(seed) {}

double Environment::observe(const Action& a) {
    return observe(instance_->view().index_of(a));
}

double Environment::observe(std::size_t action_index) {
    const InstanceView& v = instance_->view();
    if (action_index >= v.num_actions())
        throw InvalidArgument("action index out of range");
    const Action& a = v.action(action_index);
    return v.family(a).sample(v.feature(action_index).dot(instance_->theta_star()), rng_);
}

}  // namespace hyts
