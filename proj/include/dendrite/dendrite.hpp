#pragma once

// Umbrella header for the dendrite cable-model toolkit.

#include "dendrite/eigenproblem.hpp"
#include "dendrite/io.hpp"
#include "dendrite/model.hpp"
#include "dendrite/optimize.hpp"
#include "dendrite/run_config.hpp"
#include "dendrite/transfer.hpp"
#include "dendrite/transient.hpp"
