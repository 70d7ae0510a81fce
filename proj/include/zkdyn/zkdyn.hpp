#pragma once

#include "zkdyn/action.hpp"
#include "zkdyn/directional.hpp"
#include "zkdyn/errors.hpp"
#include "zkdyn/models.hpp"
#include "zkdyn/random.hpp"
#include "zkdyn/spectrum.hpp"
#include "zkdyn/torus.hpp"
