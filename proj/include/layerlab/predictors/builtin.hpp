#pragma once

#include "layerlab/predict/registry.hpp"

namespace layerlab::predictors {

// gazetteer, chat, geometric_table, remote_image (in that order).
void register_builtin_predictors(predict::Registry& registry);
predict::Registry default_registry();

}  // namespace layerlab::predictors
