// Umbrella header: the whole library plus the experiment runner.
#pragma once

#include "experiment.hpp"
