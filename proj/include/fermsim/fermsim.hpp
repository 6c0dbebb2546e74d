#pragma once

#include "fermsim/error.hpp"
#include "fermsim/evolver.hpp"
#include "fermsim/liouvillian.hpp"
#include "fermsim/model.hpp"
#include "fermsim/observables.hpp"
#include "fermsim/operators.hpp"
#include "fermsim/presets.hpp"
