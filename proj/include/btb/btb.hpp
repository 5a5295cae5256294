#pragma once

#include "btb/brinkman.hpp"
#include "btb/config.hpp"
#include "btb/entropy.hpp"
#include "btb/errors.hpp"
#include "btb/experiments.hpp"
#include "btb/grid.hpp"
#include "btb/initial_data.hpp"
#include "btb/output.hpp"
#include "btb/pressure.hpp"
#include "btb/time_integrator.hpp"
#include "btb/verify.hpp"
